#include "exopinf/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "exopinf/errors.hpp"

namespace exopinf {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::istream& in) {
  KeyValueConfig config;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw SchemaError("expected 'key = value'", number);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw SchemaError("empty key", number);
    if (config.entries_.contains(key)) throw SchemaError("duplicate key '" + key + "'", number);
    config.entries_[key] = {value, number};
  }
  return config;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open config file '" + path + "'", 0);
  return parse(in);
}

std::optional<std::string> KeyValueConfig::get_string(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second.value;
}

std::optional<double> KeyValueConfig::get_double(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(it->second.value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != it->second.value.size()) {
    throw SchemaError("value of '" + key + "' is not a number", it->second.line);
  }
  return value;
}

std::optional<long long> KeyValueConfig::get_integer(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  std::size_t used = 0;
  long long value = 0;
  try {
    value = std::stoll(it->second.value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != it->second.value.size()) {
    throw SchemaError("value of '" + key + "' is not an integer", it->second.line);
  }
  return value;
}

void KeyValueConfig::require_known_keys(const std::string& known) const {
  std::set<std::string> allowed;
  std::istringstream is(known);
  std::string key;
  while (std::getline(is, key, ',')) allowed.insert(trim(key));
  for (const auto& [k, entry] : entries_) {
    if (!allowed.contains(k)) throw SchemaError("unknown key '" + k + "'", entry.line);
  }
}

}  // namespace exopinf
