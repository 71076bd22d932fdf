#include <iostream>

#include "respdc/cli.hpp"

int main(int argc, char** argv) { return respdc::cli::main(argc, argv, std::cout, std::cerr); }
