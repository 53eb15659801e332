#pragma once

// Plain "key = value" configuration files. '#' starts a comment, blank lines
// are ignored, keys are case-sensitive and may appear once.

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <string>

namespace exopinf {

class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in);
  static KeyValueConfig load(const std::string& path);

  bool contains(const std::string& key) const { return entries_.contains(key); }
  std::optional<std::string> get_string(const std::string& key) const;
  /// Throws SchemaError (with the key's line) when the value is not a number.
  std::optional<double> get_double(const std::string& key) const;
  std::optional<long long> get_integer(const std::string& key) const;
  /// Throws SchemaError naming the first key not in `known` (comma-separated).
  void require_known_keys(const std::string& known) const;

  void set(const std::string& key, const std::string& value) { entries_[key] = {value, 0}; }

 private:
  struct Entry {
    std::string value;
    std::size_t line;
  };
  std::map<std::string, Entry> entries_;
};

}  // namespace exopinf
