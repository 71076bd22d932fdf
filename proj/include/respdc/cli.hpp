#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "respdc/config.hpp"

namespace respdc::cli {

inline const std::vector<std::string> kSubcommands = {
    "spectrum",     "clusters",   "jsa",       "purity",    "bandwidth-map", "purity-map",
    "purity-vs-pump", "brightness", "stability", "fine-tune", "design"};

struct Artifact {
  std::string filename;
  std::string content;
};

struct RunResult {
  std::string summary;  // one line, no trailing newline
  std::vector<Artifact> artifacts;
};

// Executes one subcommand in memory. Throws ConfigError for an unknown subcommand.
RunResult run(const std::string& subcommand, const RunConfig& config);

// Writes the artifacts matching the configured format plus the resolved configuration.
std::vector<std::filesystem::path> write_artifacts(const RunResult& result, const RunConfig& config);

// Fixed-format number rendering shared by every CSV artifact.
std::string format_number(double value);

// Full command-line entry point; returns the process exit status (0, 1 or 2).
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace respdc::cli
