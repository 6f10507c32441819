#include "morphoguard/kvtext.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "morphoguard/common.hpp"

namespace morphoguard::kv {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void parse_fail(std::string_view source, int line, const std::string& msg) {
  std::ostringstream os;
  os << source << ":" << line << ": " << msg;
  throw ConfigError(os.str());
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  std::string tmp(s);
  char* end = nullptr;
  errno = 0;
  out = std::strtod(tmp.c_str(), &end);
  return end == tmp.c_str() + tmp.size() && errno == 0 && std::isfinite(out);
}

// Strip a trailing comment that is not inside a string.
std::string_view strip_comment(std::string_view s) {
  bool in_str = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') in_str = !in_str;
    if (s[i] == '#' && !in_str) return s.substr(0, i);
  }
  return s;
}

Value parse_value(std::string_view raw, std::string_view source, int line) {
  const auto s = trim(raw);
  if (s.empty()) parse_fail(source, line, "missing value");
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"') parse_fail(source, line, "unterminated string");
    return std::string(s.substr(1, s.size() - 2));
  }
  if (s.front() == '[') {
    if (s.back() != ']') parse_fail(source, line, "unterminated array");
    std::vector<double> values;
    auto body = trim(s.substr(1, s.size() - 2));
    while (!body.empty()) {
      const auto comma = body.find(',');
      const auto item = trim(body.substr(0, comma));
      double v = 0.0;
      if (!parse_double(item, v)) parse_fail(source, line, "bad array element '" + std::string(item) + "'");
      values.push_back(v);
      if (comma == std::string_view::npos) break;
      body = trim(body.substr(comma + 1));
      if (body.empty()) parse_fail(source, line, "trailing comma in array");
    }
    return values;
  }
  double v = 0.0;
  if (!parse_double(s, v)) parse_fail(source, line, "bad number '" + std::string(s) + "'");
  return v;
}

const char* kind_name(const Value& v) {
  switch (v.index()) {
    case 0: return "number";
    case 1: return "string";
    default: return "array";
  }
}

}  // namespace

void Table::add(Entry e) {
  if (find(e.key) != nullptr) {
    std::ostringstream os;
    os << source_ << ":" << e.line << ": duplicate key '" << e.key << "'";
    throw ConfigError(os.str());
  }
  entries_.push_back(std::move(e));
}

const Entry* Table::find(std::string_view key) const {
  for (const auto& e : entries_)
    if (e.key == key) return &e;
  return nullptr;
}

void Table::fail(std::string_view key, std::string_view message) const {
  const Entry* e = find(key);
  std::ostringstream os;
  os << source_ << ":" << (e ? e->line : line_) << ": ";
  if (!name_.empty()) os << "[" << name_ << "] ";
  os << "field '" << key << "': " << message;
  throw ConfigError(os.str());
}

const Entry& Table::require(std::string_view key) const {
  const Entry* e = find(key);
  if (e == nullptr) fail(key, "missing");
  return *e;
}

double Table::number(std::string_view key) const {
  const auto& e = require(key);
  if (const auto* d = std::get_if<double>(&e.value)) return *d;
  fail(key, std::string("expected number, got ") + kind_name(e.value));
}

double Table::number_or(std::string_view key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

long Table::integer(std::string_view key) const {
  const double d = number(key);
  if (d != std::floor(d) || std::abs(d) > 1e15) fail(key, "expected integer");
  return static_cast<long>(d);
}

std::string Table::text(std::string_view key) const {
  const auto& e = require(key);
  if (const auto* s = std::get_if<std::string>(&e.value)) return *s;
  fail(key, std::string("expected string, got ") + kind_name(e.value));
}

std::string Table::text_or(std::string_view key, std::string fallback) const {
  return has(key) ? text(key) : fallback;
}

std::vector<double> Table::array(std::string_view key, std::optional<std::size_t> expected_len) const {
  const auto& e = require(key);
  const auto* a = std::get_if<std::vector<double>>(&e.value);
  if (a == nullptr) fail(key, std::string("expected array, got ") + kind_name(e.value));
  if (expected_len && a->size() != *expected_len)
    fail(key, "expected " + std::to_string(*expected_len) + " elements, got " + std::to_string(a->size()));
  return *a;
}

Document parse(std::string_view text, std::string_view source) {
  Document doc;
  doc.root = Table("", std::string(source), 1);
  Table* current = &doc.root;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    ++line_no;
    const auto line = trim(strip_comment(raw));
    if (!line.empty()) {
      if (line.front() == '[') {
        if (line.back() != ']') parse_fail(source, line_no, "malformed section header");
        const auto name = trim(line.substr(1, line.size() - 2));
        if (name.empty()) parse_fail(source, line_no, "empty section name");
        doc.sections.emplace_back(std::string(name), std::string(source), line_no);
        current = &doc.sections.back();
      } else {
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) parse_fail(source, line_no, "expected 'key = value'");
        const auto key = trim(line.substr(0, eq));
        if (key.empty()) parse_fail(source, line_no, "empty key");
        current->add(Entry{std::string(key), parse_value(line.substr(eq + 1), source, line_no), line_no});
      }
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return doc;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Document parse_file(const std::string& path) { return parse(read_text_file(path), path); }

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_array(const std::vector<double>& values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += format_number(values[i]);
  }
  return out + "]";
}

}  // namespace morphoguard::kv
