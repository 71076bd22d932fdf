#include "respdc/toml.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "respdc/error.hpp"

namespace respdc::toml {

namespace {

[[noreturn]] void fail(const std::string& source, int line, const std::string& what) {
  throw ConfigError(source + ":" + std::to_string(line) + ": " + what);
}

std::string where(const Table& t, const std::string& key) {
  std::string path = t.name.empty() ? key : t.name + "." + key;
  return t.source.empty() ? path : t.source + ": " + path;
}

class Parser {
 public:
  Parser(const std::string& text, std::string source) : text_(text), source_(std::move(source)) {}

  Table run() {
    Table root;
    root.source = source_;
    Table* current = &root;
    while (true) {
      skip_blank_and_comments();
      if (eof()) break;
      if (peek() == '[') {
        ++pos_;
        if (!eof() && peek() == '[') fail(source_, line_, "arrays of tables are not supported");
        std::vector<std::string> path = parse_key_path(']');
        expect(']');
        expect_line_end();
        current = &root;
        std::string dotted;
        for (const auto& part : path) {
          dotted = dotted.empty() ? part : dotted + "." + part;
          if (current->contains(part) && !current->subtable(part))
            fail(source_, line_, "key '" + dotted + "' is already a value");
          current = &current->ensure_subtable(part);
          current->name = dotted;
          current->source = source_;
        }
        if (!declared_.insert(dotted).second) fail(source_, line_, "table [" + dotted + "] declared twice");
        continue;
      }
      std::vector<std::string> path = parse_key_path('=');
      expect('=');
      skip_inline_space();
      int value_line = line_;
      Value v = parse_value();
      v.line = value_line;
      expect_line_end();
      Table* target = current;
      for (size_t i = 0; i + 1 < path.size(); ++i) target = &target->ensure_subtable(path[i]);
      if (target->contains(path.back())) fail(source_, value_line, "duplicate key '" + path.back() + "'");
      (*target)[path.back()] = std::move(v);
    }
    return root;
  }

 private:
  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }

  void skip_inline_space() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos_;
  }

  void skip_comment() {
    if (!eof() && peek() == '#')
      while (!eof() && peek() != '\n') ++pos_;
  }

  void skip_blank_and_comments() {
    while (!eof()) {
      char c = peek();
      if (c == ' ' || c == '\t' || c == '\r') {
        ++pos_;
      } else if (c == '\n') {
        ++pos_;
        ++line_;
      } else if (c == '#') {
        skip_comment();
      } else {
        break;
      }
    }
  }

  void expect(char c) {
    skip_inline_space();
    if (eof() || peek() != c) fail(source_, line_, std::string("expected '") + c + "'");
    ++pos_;
  }

  void expect_line_end() {
    skip_inline_space();
    skip_comment();
    if (!eof() && peek() == '\r') ++pos_;
    if (eof()) return;
    if (peek() != '\n') fail(source_, line_, "unexpected trailing characters");
    ++pos_;
    ++line_;
  }

  std::vector<std::string> parse_key_path(char terminator) {
    std::vector<std::string> parts;
    while (true) {
      skip_inline_space();
      std::string key;
      if (!eof() && peek() == '"') {
        key = parse_string();
      } else {
        while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-'))
          key += text_[pos_++];
      }
      if (key.empty()) fail(source_, line_, "expected a key");
      parts.push_back(key);
      skip_inline_space();
      if (!eof() && peek() == '.') {
        ++pos_;
        continue;
      }
      if (eof() || peek() != terminator) fail(source_, line_, std::string("expected '") + terminator + "' after key");
      return parts;
    }
  }

  std::string parse_string() {
    ++pos_;  // opening quote
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') fail(source_, line_, "unterminated string");
      char c = text_[pos_++];
      if (c == '"') break;
      if (c == '\\') {
        if (eof()) fail(source_, line_, "unterminated escape");
        char e = text_[pos_++];
        switch (e) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          default: fail(source_, line_, std::string("unsupported escape \\") + e);
        }
      } else {
        out += c;
      }
    }
    return out;
  }

  Value parse_value() {
    if (eof()) fail(source_, line_, "missing value");
    char c = peek();
    Value v;
    if (c == '"') {
      v.data = parse_string();
    } else if (c == '[') {
      ++pos_;
      Array arr;
      while (true) {
        skip_blank_and_comments();
        if (eof()) fail(source_, line_, "unterminated array");
        if (peek() == ']') {
          ++pos_;
          break;
        }
        int item_line = line_;
        Value item = parse_value();
        item.line = item_line;
        arr.push_back(std::move(item));
        skip_blank_and_comments();
        if (!eof() && peek() == ',') {
          ++pos_;
        } else if (eof() || peek() != ']') {
          fail(source_, line_, "expected ',' or ']' in array");
        }
      }
      v.data = std::move(arr);
    } else if (c == '{') {
      fail(source_, line_, "inline tables are not supported");
    } else if (text_.compare(pos_, 4, "true") == 0) {
      pos_ += 4;
      v.data = true;
    } else if (text_.compare(pos_, 5, "false") == 0) {
      pos_ += 5;
      v.data = false;
    } else {
      std::string token;
      while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '.' || peek() == '+' ||
                        peek() == '-' || peek() == '_'))
        token += text_[pos_++];
      std::string clean;
      for (char ch : token)
        if (ch != '_') clean += ch;
      if (clean.empty()) fail(source_, line_, "invalid value");
      bool integral = clean.find_first_of(".eEin") == std::string::npos;
      try {
        size_t used = 0;
        if (integral) {
          long long n = std::stoll(clean, &used);
          if (used != clean.size()) throw std::invalid_argument(clean);
          v.data = n;
        } else {
          if (clean == "inf" || clean == "+inf" || clean == "-inf" || clean == "nan")
            fail(source_, line_, "non-finite numbers are not accepted");
          double d = std::stod(clean, &used);
          if (used != clean.size()) throw std::invalid_argument(clean);
          v.data = d;
        }
      } catch (const std::logic_error&) {
        fail(source_, line_, "invalid value '" + token + "'");
      }
    }
    return v;
  }

  const std::string& text_;
  std::string source_;
  size_t pos_ = 0;
  int line_ = 1;
  std::set<std::string> declared_;
};

std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  std::string s = buf;
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out + "\"";
}

std::string scalar_text(const Value& v) {
  struct Visitor {
    std::string operator()(double d) const { return format_number(d); }
    std::string operator()(long long n) const { return std::to_string(n); }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(const std::string& s) const { return quote(s); }
    std::string operator()(const Array& a) const {
      std::string out = "[";
      for (size_t i = 0; i < a.size(); ++i) {
        if (i) out += ", ";
        out += scalar_text(a[i]);
      }
      return out + "]";
    }
    std::string operator()(const std::shared_ptr<Table>&) const { return ""; }
  };
  return std::visit(Visitor{}, v.data);
}

void dump_into(const Table& t, const std::string& prefix, std::ostringstream& os) {
  bool has_scalars = false;
  for (const auto& [k, v] : t.entries())
    if (!std::holds_alternative<std::shared_ptr<Table>>(v.data)) has_scalars = true;
  if (!prefix.empty() && has_scalars) os << "\n[" << prefix << "]\n";
  for (const auto& [k, v] : t.entries())
    if (!std::holds_alternative<std::shared_ptr<Table>>(v.data)) os << k << " = " << scalar_text(v) << "\n";
  for (const auto& [k, v] : t.entries())
    if (auto p = std::get_if<std::shared_ptr<Table>>(&v.data))
      dump_into(**p, prefix.empty() ? k : prefix + "." + k, os);
}

}  // namespace

double Value::as_number() const {
  if (auto d = std::get_if<double>(&data)) return *d;
  if (auto n = std::get_if<long long>(&data)) return static_cast<double>(*n);
  throw ConfigError("value is not a number");
}

const Value& Table::at(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError(where(*this, key) + ": missing required key");
  return it->second;
}

Value& Table::operator[](const std::string& key) { return entries_[key]; }

double Table::number(const std::string& key) const {
  const Value& v = at(key);
  if (!v.is_number())
    throw ConfigError(source + ":" + std::to_string(v.line) + ": " + where(*this, key) + " must be a number");
  return v.as_number();
}

double Table::number_or(const std::string& key, double fallback) const {
  return contains(key) ? number(key) : fallback;
}

std::optional<double> Table::optional_number(const std::string& key) const {
  if (!contains(key)) return std::nullopt;
  return number(key);
}

std::string Table::string(const std::string& key) const {
  const Value& v = at(key);
  auto s = std::get_if<std::string>(&v.data);
  if (!s) throw ConfigError(source + ":" + std::to_string(v.line) + ": " + where(*this, key) + " must be a string");
  return *s;
}

std::string Table::string_or(const std::string& key, const std::string& fallback) const {
  return contains(key) ? string(key) : fallback;
}

bool Table::boolean_or(const std::string& key, bool fallback) const {
  if (!contains(key)) return fallback;
  const Value& v = at(key);
  auto b = std::get_if<bool>(&v.data);
  if (!b) throw ConfigError(source + ":" + std::to_string(v.line) + ": " + where(*this, key) + " must be a boolean");
  return *b;
}

std::vector<double> Table::numbers(const std::string& key) const {
  const Value& v = at(key);
  auto a = std::get_if<Array>(&v.data);
  if (!a) throw ConfigError(source + ":" + std::to_string(v.line) + ": " + where(*this, key) + " must be an array");
  std::vector<double> out;
  for (const auto& item : *a) {
    if (!item.is_number())
      throw ConfigError(source + ":" + std::to_string(item.line) + ": " + where(*this, key) + " must hold numbers");
    out.push_back(item.as_number());
  }
  return out;
}

const Table* Table::subtable(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return nullptr;
  auto p = std::get_if<std::shared_ptr<Table>>(&it->second.data);
  return p ? p->get() : nullptr;
}

Table& Table::ensure_subtable(const std::string& key) {
  auto it = entries_.find(key);
  if (it != entries_.end()) {
    auto p = std::get_if<std::shared_ptr<Table>>(&it->second.data);
    if (!p) throw ConfigError(where(*this, key) + ": key is already a value");
    return **p;
  }
  auto t = std::make_shared<Table>();
  t->name = name.empty() ? key : name + "." + key;
  t->source = source;
  entries_[key].data = t;
  return *t;
}

Table parse(const std::string& text, const std::string& source_name) { return Parser(text, source_name).run(); }

Table parse_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

std::string dump(const Table& table) {
  std::ostringstream os;
  dump_into(table, "", os);
  std::string s = os.str();
  if (!s.empty() && s.front() == '\n') s.erase(0, 1);
  return s;
}

}  // namespace respdc::toml
