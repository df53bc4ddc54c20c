#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace rcnkit {

// Plain-text "key = value" configuration. '#' starts a comment, blank lines
// are ignored. Later assignments (and CLI overrides) win.
class Config {
 public:
  Config() = default;

  static Config from_file(const std::filesystem::path& path);
  static Config from_string(const std::string& text, const std::string& origin = "<string>");

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get_str(const std::string& key) const;
  std::string get_str(const std::string& key, const std::string& fallback) const;
  long get_int(const std::string& key) const;
  long get_int(const std::string& key, long fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  // Comma-separated lists.
  std::vector<long> get_int_list(const std::string& key) const;
  std::vector<double> get_double_list(const std::string& key) const;

  std::vector<std::string> keys() const;
  void merge(const Config& overrides);  // overrides win

 private:
  std::map<std::string, std::string> values_;
  std::string origin_ = "<empty>";
};

}  // namespace rcnkit
