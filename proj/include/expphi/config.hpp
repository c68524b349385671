#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>

namespace expphi {

/// Flat key = value configuration. Lines starting with '#' and blank lines
/// are ignored. Later assignments win, so CLI overrides are applied with
/// set() after load_file().
class Config {
 public:
  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  // Typed reads; a missing key takes the default and is recorded as used.
  std::string get_string(const std::string& key, const std::string& fallback);
  double get_double(const std::string& key, double fallback);
  long long get_int(const std::string& key, long long fallback);
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback);

  // Throws ConfigError naming every key outside `allowed`.
  void require_known(const std::set<std::string>& allowed) const;

  // Every key read so far with its effective value, plus any explicit keys.
  const std::map<std::string, std::string>& resolved() const { return resolved_; }
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, std::string> resolved_;
};

}  // namespace expphi
