#pragma once

// Minimal reader/writer for the TOML subset used by the data and config files:
// [table] and [table.sub] headers, key = value with strings, numbers, booleans
// and (possibly multi-line) arrays of those, and # comments. Inline tables,
// dates and arrays of tables are rejected with a located error.

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace respdc::toml {

struct Value;
using Array = std::vector<Value>;

class Table {
 public:
  bool contains(const std::string& key) const { return entries_.count(key) != 0; }
  const Value& at(const std::string& key) const;
  Value& operator[](const std::string& key);
  const std::map<std::string, Value>& entries() const { return entries_; }

  // Typed lookups; `context` names the enclosing table in error messages.
  double number(const std::string& key) const;
  double number_or(const std::string& key, double fallback) const;
  std::optional<double> optional_number(const std::string& key) const;
  std::string string(const std::string& key) const;
  std::string string_or(const std::string& key, const std::string& fallback) const;
  bool boolean_or(const std::string& key, bool fallback) const;
  std::vector<double> numbers(const std::string& key) const;
  const Table* subtable(const std::string& key) const;
  Table& ensure_subtable(const std::string& key);

  std::string name;  // dotted path, for messages
  std::string source;  // file the table came from

 private:
  std::map<std::string, Value> entries_;
};

struct Value {
  std::variant<double, long long, bool, std::string, Array, std::shared_ptr<Table>> data;
  int line = 0;

  bool is_number() const { return std::holds_alternative<double>(data) || std::holds_alternative<long long>(data); }
  double as_number() const;
};

Table parse(const std::string& text, const std::string& source_name = "<string>");
Table parse_file(const std::filesystem::path& path);

// Serializes with keys in lexical order; scalar keys before subtables.
std::string dump(const Table& table);

}  // namespace respdc::toml
