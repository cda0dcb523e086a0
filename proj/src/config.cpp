#include "ruin/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "ruin/errors.hpp"

namespace ruin {

namespace {

[[noreturn]] void parse_fail(int line, const std::string& why) {
  throw ConfigError("config parse error at line " + std::to_string(line) + ": " + why);
}

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') return false;
  return true;
}

// Strips a # comment that is not inside a quoted string.
std::string strip_comment(const std::string& line) {
  bool in_str = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_str = !in_str;
    if (line[i] == '#' && !in_str) return line.substr(0, i);
  }
  return line;
}

std::vector<std::string> split_path(const std::string& path, int line) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream ss(path);
  while (std::getline(ss, cur, '.')) {
    cur = trim(cur);
    if (!valid_key(cur)) parse_fail(line, "bad section name '" + path + "'");
    parts.push_back(cur);
  }
  if (parts.empty()) parse_fail(line, "empty section name");
  return parts;
}

bool parse_number(const std::string& s, double* out) {
  const char* begin = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end != begin + s.size() || s.empty()) return false;
  *out = v;
  return true;
}

ConfigValue parse_scalar(const std::string& raw, int line) {
  ConfigValue v;
  v.line = line;
  if (raw.size() >= 2 && raw.front() == '"' && raw.back() == '"') {
    v.type = ConfigValue::Type::String;
    std::string out;
    for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
      if (raw[i] == '\\' && i + 2 < raw.size() && (raw[i + 1] == '"' || raw[i + 1] == '\\')) {
        out += raw[i + 1];
        ++i;
      } else if (raw[i] == '"') {
        parse_fail(line, "unescaped quote inside string");
      } else {
        out += raw[i];
      }
    }
    v.str = out;
    return v;
  }
  if (raw == "true" || raw == "false") {
    v.type = ConfigValue::Type::Bool;
    v.b = raw == "true";
    return v;
  }
  double num = 0.0;
  if (parse_number(raw, &num)) {
    v.type = ConfigValue::Type::Number;
    v.num = num;
    return v;
  }
  parse_fail(line, "cannot parse value '" + raw + "'");
}

ConfigValue parse_value(const std::string& raw, int line) {
  if (!raw.empty() && raw.front() == '[') {
    if (raw.back() != ']') parse_fail(line, "unterminated array");
    ConfigValue v;
    v.line = line;
    std::string body = raw.substr(1, raw.size() - 2);
    std::vector<std::string> items;
    std::string cur;
    bool in_str = false;
    for (char c : body) {
      if (c == '"') in_str = !in_str;
      if (c == ',' && !in_str) {
        items.push_back(trim(cur));
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (!trim(cur).empty()) items.push_back(trim(cur));
    bool all_nums = true, all_strs = true;
    for (const auto& item : items) {
      const ConfigValue sv = parse_scalar(item, line);
      if (sv.type == ConfigValue::Type::Number) {
        v.nums.push_back(sv.num);
        all_strs = false;
      } else if (sv.type == ConfigValue::Type::String) {
        v.strs.push_back(sv.str);
        all_nums = false;
      } else {
        parse_fail(line, "arrays may hold numbers or strings only");
      }
    }
    if (!all_nums && !all_strs) parse_fail(line, "arrays must be homogeneous");
    v.type = all_nums ? ConfigValue::Type::NumberArray : ConfigValue::Type::StringArray;
    return v;
  }
  return parse_scalar(raw, line);
}

}  // namespace

ConfigTable parse_config_text(const std::string& text) {
  ConfigTable root;
  ConfigTable* current = &root;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;

    if (line.front() == '[') {
      const bool is_array = line.size() >= 2 && line[1] == '[';
      const std::string closer = is_array ? "]]" : "]";
      if (line.substr(line.size() - closer.size()) != closer)
        parse_fail(lineno, "unterminated section header");
      const std::string path =
          line.substr(is_array ? 2 : 1, line.size() - 2 * (is_array ? 2 : 1));
      const auto parts = split_path(path, lineno);
      ConfigTable* node = &root;
      for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        auto& slot = node->tables[parts[i]];
        if (!slot) slot = std::make_unique<ConfigTable>();
        node = slot.get();
      }
      const std::string& leaf = parts.back();
      if (is_array) {
        node->arrays[leaf].push_back(std::make_unique<ConfigTable>());
        current = node->arrays[leaf].back().get();
      } else {
        if (node->tables.count(leaf))
          parse_fail(lineno, "section [" + path + "] defined twice");
        node->tables[leaf] = std::make_unique<ConfigTable>();
        current = node->tables[leaf].get();
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) parse_fail(lineno, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!valid_key(key)) parse_fail(lineno, "bad key '" + key + "'");
    if (value.empty()) parse_fail(lineno, "missing value for key '" + key + "'");
    if (current->values.count(key)) parse_fail(lineno, "duplicate key '" + key + "'");
    current->values[key] = parse_value(value, lineno);
  }
  return root;
}

ConfigTable parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

// ---------------------------------------------------------------------------
// ConfigReader

ConfigReader::ConfigReader(const ConfigTable& root)
    : shared_(std::make_shared<Shared>(Shared{&root, {}})), table_(&root), prefix_() {}

ConfigReader::ConfigReader(std::shared_ptr<Shared> shared, const ConfigTable* table,
                           std::string prefix)
    : shared_(std::move(shared)), table_(table), prefix_(std::move(prefix)) {}

std::string ConfigReader::path_of(const std::string& key) const {
  return prefix_.empty() ? key : prefix_ + "." + key;
}

void ConfigReader::fail(const std::string& key, const std::string& why) const {
  throw ConfigError("config key '" + path_of(key) + "': " + why);
}

bool ConfigReader::has(const std::string& key) const { return table_->values.count(key) > 0; }
bool ConfigReader::has_table(const std::string& key) const {
  return table_->tables.count(key) > 0;
}

const ConfigValue& ConfigReader::fetch(const std::string& key, ConfigValue::Type want) {
  auto it = table_->values.find(key);
  if (it == table_->values.end()) fail(key, "missing");
  shared_->consumed.insert(path_of(key));
  const ConfigValue& v = it->second;
  if (v.type != want) {
    static const char* names[] = {"bool", "number", "string", "number array", "string array"};
    fail(key, std::string("expected ") + names[static_cast<int>(want)] + ", got " +
                  names[static_cast<int>(v.type)]);
  }
  return v;
}

double ConfigReader::number(const std::string& key) {
  return fetch(key, ConfigValue::Type::Number).num;
}
double ConfigReader::number_or(const std::string& key, double fallback) {
  return has(key) ? number(key) : fallback;
}
long long ConfigReader::integer(const std::string& key) {
  const double v = number(key);
  if (std::floor(v) != v || std::abs(v) > 9e15) fail(key, "expected an integer");
  return static_cast<long long>(v);
}
long long ConfigReader::integer_or(const std::string& key, long long fallback) {
  return has(key) ? integer(key) : fallback;
}
std::string ConfigReader::string(const std::string& key) {
  return fetch(key, ConfigValue::Type::String).str;
}
std::string ConfigReader::string_or(const std::string& key, const std::string& fallback) {
  return has(key) ? string(key) : fallback;
}
bool ConfigReader::boolean_or(const std::string& key, bool fallback) {
  return has(key) ? fetch(key, ConfigValue::Type::Bool).b : fallback;
}
std::vector<double> ConfigReader::number_array(const std::string& key) {
  return fetch(key, ConfigValue::Type::NumberArray).nums;
}
std::vector<double> ConfigReader::number_array_or_scalar(const std::string& key) {
  auto it = table_->values.find(key);
  if (it == table_->values.end()) fail(key, "missing");
  if (it->second.type == ConfigValue::Type::Number) return {number(key)};
  return number_array(key);
}

ConfigReader ConfigReader::table(const std::string& key) {
  auto it = table_->tables.find(key);
  if (it == table_->tables.end())
    throw ConfigError("config section '[" + path_of(key) + "]' is missing");
  return ConfigReader(shared_, it->second.get(), path_of(key));
}

std::optional<ConfigReader> ConfigReader::optional_table(const std::string& key) {
  if (!has_table(key)) return std::nullopt;
  return table(key);
}

std::vector<ConfigReader> ConfigReader::table_array(const std::string& key) {
  auto it = table_->arrays.find(key);
  if (it == table_->arrays.end())
    throw ConfigError("config table array '[[" + path_of(key) + "]]' is missing");
  std::vector<ConfigReader> out;
  for (std::size_t i = 0; i < it->second.size(); ++i)
    out.push_back(ConfigReader(shared_, it->second[i].get(),
                               path_of(key) + "[" + std::to_string(i) + "]"));
  return out;
}

namespace {

void collect_unconsumed(const ConfigTable& table, const std::string& prefix,
                        const std::set<std::string>& consumed, std::vector<std::string>* out) {
  for (const auto& [key, value] : table.values) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!consumed.count(path)) out->push_back(path);
  }
  for (const auto& [key, sub] : table.tables) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    collect_unconsumed(*sub, path, consumed, out);
  }
  for (const auto& [key, arr] : table.arrays) {
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string path =
          (prefix.empty() ? key : prefix + "." + key) + "[" + std::to_string(i) + "]";
      collect_unconsumed(*arr[i], path, consumed, out);
    }
  }
}

}  // namespace

void ConfigReader::finish() const {
  std::vector<std::string> unknown;
  collect_unconsumed(*shared_->root, "", shared_->consumed, &unknown);
  if (!unknown.empty())
    throw ConfigError("unknown config key '" + unknown.front() + "' (unknown keys are errors)");
}

}  // namespace ruin
