#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace ruin {

// Flat, sectioned key-value experiment configs (a TOML-compatible subset:
// [section] tables, [[section]] table arrays, scalar and homogeneous-array
// values). Unknown keys are errors, enforced by consumption tracking.

struct ConfigValue {
  enum class Type { Bool, Number, String, NumberArray, StringArray };
  Type type = Type::Number;
  bool b = false;
  double num = 0.0;
  std::string str;
  std::vector<double> nums;
  std::vector<std::string> strs;
  int line = 0;
};

struct ConfigTable {
  std::map<std::string, ConfigValue> values;
  std::map<std::string, std::unique_ptr<ConfigTable>> tables;
  std::map<std::string, std::vector<std::unique_ptr<ConfigTable>>> arrays;
};

ConfigTable parse_config_text(const std::string& text);
ConfigTable parse_config_file(const std::string& path);

// Typed, path-aware access with consumption tracking. After building the
// experiment from a reader, finish() reports the first key nobody consumed.
class ConfigReader {
 public:
  explicit ConfigReader(const ConfigTable& root);

  bool has(const std::string& key) const;
  bool has_table(const std::string& key) const;

  double number(const std::string& key);
  double number_or(const std::string& key, double fallback);
  long long integer(const std::string& key);
  long long integer_or(const std::string& key, long long fallback);
  std::string string(const std::string& key);
  std::string string_or(const std::string& key, const std::string& fallback);
  bool boolean_or(const std::string& key, bool fallback);
  std::vector<double> number_array(const std::string& key);
  // Scalars promote to one-element arrays for convenience.
  std::vector<double> number_array_or_scalar(const std::string& key);

  ConfigReader table(const std::string& key);
  std::optional<ConfigReader> optional_table(const std::string& key);
  std::vector<ConfigReader> table_array(const std::string& key);

  // Full dotted path of `key` within this reader (for error messages).
  std::string path_of(const std::string& key) const;
  [[noreturn]] void fail(const std::string& key, const std::string& why) const;

  // Verifies every key in the whole config was consumed.
  void finish() const;

 private:
  struct Shared {
    const ConfigTable* root;
    std::set<std::string> consumed;
  };
  ConfigReader(std::shared_ptr<Shared> shared, const ConfigTable* table, std::string prefix);
  const ConfigValue& fetch(const std::string& key, ConfigValue::Type want);

  std::shared_ptr<Shared> shared_;
  const ConfigTable* table_;
  std::string prefix_;
};

}  // namespace ruin
