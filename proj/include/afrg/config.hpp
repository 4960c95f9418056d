#pragma once

#include <map>
#include <string>
#include <vector>

namespace afrg {

// Flat key/value configuration. File syntax is one `key = value` pair per
// line, `#` starts a comment, keys are dotted lowercase paths. Every getter
// takes the built-in default; the resolved value is recorded so a run can
// echo the complete effective configuration.
class Config {
 public:
  Config() = default;

  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;

  double get_double(const std::string& key, double def) const;
  int get_int(const std::string& key, int def) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t def) const;
  bool get_bool(const std::string& key, bool def) const;
  std::string get_string(const std::string& key, const std::string& def) const;
  // Comma-separated list of numbers, e.g. "1.0,0.5,0.25".
  std::vector<double> get_list(const std::string& key, const std::vector<double>& def) const;

  // Every key ever queried (or set), with its resolved value, sorted.
  std::string echo() const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
  mutable std::map<std::string, std::string> effective_;
};

std::string format_double(double v);

}  // namespace afrg
