#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace emdm {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat `key = value` text config. `#` starts a comment; blank lines are
/// ignored; keys are dotted paths such as `noise.error_rate`. Reading a key
/// marks it consumed so callers can reject typos with `unused_keys()`.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in);
  static KeyValueConfig parse(std::string_view text);
  static KeyValueConfig load(const std::filesystem::path& path);

  void set(std::string key, std::string value);
  bool has(std::string_view key) const;

  std::optional<std::string> get(std::string_view key) const;
  std::string get_or(std::string_view key, std::string fallback) const;
  double get_double(std::string_view key, double fallback) const;
  std::int64_t get_int(std::string_view key, std::int64_t fallback) const;
  std::uint64_t get_uint(std::string_view key, std::uint64_t fallback) const;
  /// Comma-separated list; whitespace around items is trimmed.
  std::vector<std::string> get_list(std::string_view key) const;

  /// Keys starting with `prefix`, in sorted order.
  std::vector<std::string> keys_with_prefix(std::string_view prefix) const;
  std::vector<std::string> unused_keys() const;

 private:
  struct Entry {
    std::string value;
    std::size_t line = 0;
    mutable bool used = false;
  };
  std::map<std::string, Entry, std::less<>> entries_;
};

std::vector<double> parse_double_list(const std::vector<std::string>& items, std::string_view what);
std::vector<std::size_t> parse_size_list(const std::vector<std::string>& items, std::string_view what);

}  // namespace emdm
