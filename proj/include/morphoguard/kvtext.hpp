#pragma once

// Reader for the small structured-text format shared by robot descriptions,
// skin layouts and model configs:
//
//   # comment
//   name = "arm7"
//   end_effector_offset = [0.03, 0, 0.05]
//   [joint]
//   parent = -1
//
// Keys before the first [section] belong to the root table. Values are numbers,
// double-quoted strings, or flat numeric arrays.

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace morphoguard::kv {

using Value = std::variant<double, std::string, std::vector<double>>;

struct Entry {
  std::string key;
  Value value;
  int line = 0;
};

class Table {
 public:
  Table() = default;
  Table(std::string name, std::string source, int line)
      : name_(std::move(name)), source_(std::move(source)), line_(line) {}

  const std::string& name() const { return name_; }
  int line() const { return line_; }
  const std::vector<Entry>& entries() const { return entries_; }
  void add(Entry e);

  bool has(std::string_view key) const { return find(key) != nullptr; }
  const Entry* find(std::string_view key) const;

  double number(std::string_view key) const;
  double number_or(std::string_view key, double fallback) const;
  long integer(std::string_view key) const;
  std::string text(std::string_view key) const;
  std::string text_or(std::string_view key, std::string fallback) const;
  std::vector<double> array(std::string_view key, std::optional<std::size_t> expected_len = {}) const;

  /// "file:line: message" using the line of `key` (or the table header when absent).
  [[noreturn]] void fail(std::string_view key, std::string_view message) const;

 private:
  const Entry& require(std::string_view key) const;

  std::string name_;
  std::string source_;
  int line_ = 0;
  std::vector<Entry> entries_;
};

struct Document {
  Table root;
  std::vector<Table> sections;
};

/// Throws ConfigError with "source:line: ..." on malformed input.
Document parse(std::string_view text, std::string_view source);
Document parse_file(const std::string& path);

std::string read_text_file(const std::string& path);

/// Shortest round-tripping decimal form of a double ("%.17g" trimmed).
std::string format_number(double v);
std::string format_array(const std::vector<double>& values);

}  // namespace morphoguard::kv
