#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace reann {

/// Flat `key = value` text, one key per line, `#` starts a comment.
/// Keys keep their first-seen order so files can be re-emitted stably.
class KeyValueFile {
 public:
  static KeyValueFile parse(std::istream& in, const std::string& origin = "<stream>");
  static KeyValueFile read(const std::filesystem::path& path);

  bool contains(const std::string& key) const;
  const std::string& at(const std::string& key) const;
  std::optional<std::string> get(const std::string& key) const;

  std::string get_or(const std::string& key, const std::string& fallback) const;
  double number(const std::string& key) const;
  double number_or(const std::string& key, double fallback) const;
  long long integer(const std::string& key) const;
  long long integer_or(const std::string& key, long long fallback) const;
  bool boolean_or(const std::string& key, bool fallback) const;
  std::vector<double> numbers(const std::string& key) const;

  void set(const std::string& key, std::string value);
  const std::vector<std::string>& keys() const { return order_; }
  const std::string& origin() const { return origin_; }

  void write(std::ostream& out) const;

 private:
  std::string origin_;
  std::map<std::string, std::string> values_;
  std::vector<std::string> order_;
};

std::string trim(std::string_view s);
std::vector<std::string> split_list(std::string_view s, char sep);
double parse_double(std::string_view s, const std::string& what);
long long parse_integer(std::string_view s, const std::string& what);

/// Shortest-width decimal that reads back to the identical double.
std::string exact_decimal(double v);

}  // namespace reann
