#pragma once

#include <map>
#include <string>
#include <vector>

namespace survred {

// Flat key registry behind the config file and the CLI flags. Config files
// are plain key = value lines with optional [section] headers (section names
// prefix the keys); CLI flags override file values. Unknown keys are
// rejected.
struct ConfigKey {
  std::string key;
  std::string default_value;
  std::string help;
};

class RunConfig {
 public:
  RunConfig();

  void load_file(const std::string& path);
  void set(const std::string& key, const std::string& value);
  bool is_known(const std::string& key) const;

  const std::string& get(const std::string& key) const;
  double get_double(const std::string& key) const;
  int get_int(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<std::string> get_list(const std::string& key) const;  // comma separated
  std::vector<double> get_number_list(const std::string& key) const;

  static const std::vector<ConfigKey>& registry();
  static std::string help_text();

 private:
  std::map<std::string, std::string> values_;
};

std::vector<std::string> split_list(const std::string& s, char sep = ',');

}  // namespace survred
