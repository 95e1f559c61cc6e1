#include "reann/keyvalue.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>

#include <fmt/format.h>

#include "reann/error.hpp"

namespace reann {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(std::string_view s, const std::string& what) {
  const std::string text = trim(s);
  if (text.empty()) throw MalformedInput(what + ": empty number");
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size() || errno == ERANGE)
    throw MalformedInput(what + ": not a number '" + text + "'");
  return v;
}

long long parse_integer(std::string_view s, const std::string& what) {
  const std::string text = trim(s);
  if (text.empty()) throw MalformedInput(what + ": empty integer");
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(text.c_str(), &end, 10);
  if (end != text.c_str() + text.size() || errno == ERANGE)
    throw MalformedInput(what + ": not an integer '" + text + "'");
  return v;
}

std::string exact_decimal(double v) { return fmt::format("{}", v); }

KeyValueFile KeyValueFile::parse(std::istream& in, const std::string& origin) {
  KeyValueFile kv;
  kv.origin_ = origin;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const std::string body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw MalformedInput(fmt::format("{}:{}: expected 'key = value'", origin, lineno));
    std::string key = trim(std::string_view(body).substr(0, eq));
    if (key.empty()) throw MalformedInput(fmt::format("{}:{}: empty key", origin, lineno));
    kv.set(key, trim(std::string_view(body).substr(eq + 1)));
  }
  return kv;
}

KeyValueFile KeyValueFile::read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MalformedInput("cannot open " + path.string());
  return parse(in, path.string());
}

bool KeyValueFile::contains(const std::string& key) const { return values_.count(key) != 0; }

const std::string& KeyValueFile::at(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw MalformedInput(origin_ + ": missing key '" + key + "'");
  return it->second;
}

std::optional<std::string> KeyValueFile::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string KeyValueFile::get_or(const std::string& key, const std::string& fallback) const {
  return get(key).value_or(fallback);
}

double KeyValueFile::number(const std::string& key) const {
  return parse_double(at(key), origin_ + ": " + key);
}

double KeyValueFile::number_or(const std::string& key, double fallback) const {
  return contains(key) ? number(key) : fallback;
}

long long KeyValueFile::integer(const std::string& key) const {
  return parse_integer(at(key), origin_ + ": " + key);
}

long long KeyValueFile::integer_or(const std::string& key, long long fallback) const {
  return contains(key) ? integer(key) : fallback;
}

bool KeyValueFile::boolean_or(const std::string& key, bool fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw MalformedInput(origin_ + ": " + key + ": expected boolean, got '" + *v + "'");
}

std::vector<double> KeyValueFile::numbers(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : split_list(at(key), ','))
    out.push_back(parse_double(item, origin_ + ": " + key));
  return out;
}

void KeyValueFile::set(const std::string& key, std::string value) {
  if (values_.count(key) == 0) order_.push_back(key);
  values_[key] = std::move(value);
}

void KeyValueFile::write(std::ostream& out) const {
  for (const auto& key : order_) out << key << " = " << values_.at(key) << '\n';
}

}  // namespace reann
