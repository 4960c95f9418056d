#include "afrg/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "afrg/errors.hpp"

namespace afrg {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str());
}

Config Config::from_string(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + " is not `key = value`: " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key on config line " + std::to_string(lineno));
    cfg.entries_[key] = value;
  }
  return cfg;
}

void Config::set(const std::string& key, const std::string& value) {
  entries_[key] = value;
  effective_[key] = value;
}

bool Config::has(const std::string& key) const { return entries_.count(key) != 0; }

double Config::get_double(const std::string& key, double def) const {
  double v = def;
  auto it = entries_.find(key);
  if (it != entries_.end()) {
    try {
      size_t pos = 0;
      v = std::stod(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ConfigError("config key `" + key + "` is not a number: " + it->second);
    }
  }
  effective_[key] = format_double(v);
  return v;
}

int Config::get_int(const std::string& key, int def) const {
  const double v = get_double(key, static_cast<double>(def));
  const int i = static_cast<int>(v);
  if (static_cast<double>(i) != v) throw ConfigError("config key `" + key + "` is not an integer");
  effective_[key] = std::to_string(i);
  return i;
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t def) const {
  std::uint64_t v = def;
  auto it = entries_.find(key);
  if (it != entries_.end()) {
    try {
      v = std::stoull(it->second);
    } catch (const std::exception&) {
      throw ConfigError("config key `" + key + "` is not an unsigned integer: " + it->second);
    }
  }
  effective_[key] = std::to_string(v);
  return v;
}

bool Config::get_bool(const std::string& key, bool def) const {
  bool v = def;
  auto it = entries_.find(key);
  if (it != entries_.end()) {
    const std::string& s = it->second;
    if (s == "true" || s == "on" || s == "1")
      v = true;
    else if (s == "false" || s == "off" || s == "0")
      v = false;
    else
      throw ConfigError("config key `" + key + "` is not a boolean: " + s);
  }
  effective_[key] = v ? "true" : "false";
  return v;
}

std::string Config::get_string(const std::string& key, const std::string& def) const {
  std::string v = def;
  auto it = entries_.find(key);
  if (it != entries_.end()) v = it->second;
  effective_[key] = v;
  return v;
}

std::vector<double> Config::get_list(const std::string& key, const std::vector<double>& def) const {
  std::vector<double> v = def;
  auto it = entries_.find(key);
  if (it != entries_.end()) {
    v.clear();
    std::istringstream ss(it->second);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        v.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw ConfigError("config key `" + key + "` has a non-numeric element: " + tok);
      }
    }
  }
  std::string joined;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) joined += ",";
    joined += format_double(v[i]);
  }
  effective_[key] = joined;
  return v;
}

std::string Config::echo() const {
  std::string out;
  for (const auto& [k, val] : effective_) out += k + " = " + val + "\n";
  return out;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace afrg
