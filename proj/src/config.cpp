#include "expphi/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "expphi/errors.hpp"

namespace expphi {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

Config Config::from_string(const std::string& text) {
  Config c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    c.set(key, trim(t.substr(eq + 1)));
  }
  return c;
}

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str());
}

void Config::set(const std::string& key, const std::string& value) {
  values_[key] = value;
  resolved_[key] = value;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) {
  const auto it = values_.find(key);
  const std::string v = it == values_.end() ? fallback : it->second;
  resolved_[key] = v;
  return v;
}

double Config::get_double(const std::string& key, double fallback) {
  const auto it = values_.find(key);
  if (it == values_.end()) {
    resolved_[key] = format_double(fallback);
    return fallback;
  }
  try {
    std::size_t used = 0;
    const double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': '" + it->second + "' is not a number");
  }
}

long long Config::get_int(const std::string& key, long long fallback) {
  const auto it = values_.find(key);
  if (it == values_.end()) {
    resolved_[key] = std::to_string(fallback);
    return fallback;
  }
  long long v = 0;
  const auto& s = it->second;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError("key '" + key + "': '" + s + "' is not an integer");
  }
  return v;
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) {
  const auto it = values_.find(key);
  if (it == values_.end()) {
    resolved_[key] = std::to_string(fallback);
    return fallback;
  }
  std::uint64_t v = 0;
  const auto& s = it->second;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError("key '" + key + "': '" + s + "' is not an unsigned integer");
  }
  return v;
}

void Config::require_known(const std::set<std::string>& allowed) const {
  std::string bad;
  for (const auto& [k, v] : values_) {
    if (!allowed.count(k)) bad += (bad.empty() ? "" : ", ") + k;
  }
  if (!bad.empty()) throw ConfigError("unknown config keys: " + bad);
}

}  // namespace expphi
