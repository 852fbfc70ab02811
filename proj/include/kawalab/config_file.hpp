#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "kawalab/errors.hpp"

namespace kawalab {

// Flat key-path configuration: one `key = value` per line, '#' comments,
// values kept verbatim so parse -> serialize -> parse is the identity.
class ConfigFile {
 public:
  static ConfigFile parse_string(const std::string& text) {
    ConfigFile cfg;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string trimmed = trim(line);
      if (trimmed.empty()) continue;
      const auto eq = trimmed.find('=');
      require(eq != std::string::npos,
              "config: line " + std::to_string(lineno) + " is not key = value");
      const std::string key = trim(trimmed.substr(0, eq));
      const std::string value = trim(trimmed.substr(eq + 1));
      require(!key.empty(), "config: empty key on line " + std::to_string(lineno));
      cfg.values_[key] = value;
    }
    return cfg;
  }

  static ConfigFile parse_file(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "config: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str());
  }

  std::string serialize() const {
    std::ostringstream out;
    for (const auto& [k, v] : values_) out << k << " = " << v << "\n";
    return out.str();
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  const std::map<std::string, std::string>& values() const { return values_; }

  void set(const std::string& key, const std::string& value) {
    values_[key] = value;
  }

  std::string get_string(const std::string& key) const {
    const auto it = values_.find(key);
    require(it != values_.end(), "config: missing required key '" + key + "'");
    return it->second;
  }

  std::string get_string(const std::string& key, const std::string& dflt) const {
    const auto it = values_.find(key);
    return it == values_.end() ? dflt : it->second;
  }

  double get_double(const std::string& key) const {
    return to_double(key, get_string(key));
  }
  double get_double(const std::string& key, double dflt) const {
    return has(key) ? get_double(key) : dflt;
  }

  std::uint64_t get_u64(const std::string& key) const {
    const std::string s = get_string(key);
    try {
      std::size_t used = 0;
      const auto v = std::stoull(s, &used);
      require(used == s.size(), "config: key '" + key + "' is not an integer");
      return v;
    } catch (const std::invalid_argument&) {
      throw std::invalid_argument("config: key '" + key + "' is not an integer");
    } catch (const std::out_of_range&) {
      throw std::invalid_argument("config: key '" + key + "' is out of range");
    }
  }
  std::uint64_t get_u64(const std::string& key, std::uint64_t dflt) const {
    return has(key) ? get_u64(key) : dflt;
  }

  bool get_bool(const std::string& key, bool dflt) const {
    if (!has(key)) return dflt;
    const std::string s = get_string(key);
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw std::invalid_argument("config: key '" + key + "' is not a boolean");
  }

  std::vector<double> get_doubles(const std::string& key) const {
    std::istringstream in(get_string(key));
    std::vector<double> out;
    std::string tok;
    while (in >> tok) out.push_back(to_double(key, tok));
    require(!out.empty(), "config: key '" + key + "' has no values");
    return out;
  }

  std::vector<std::string> get_words(const std::string& key) const {
    std::istringstream in(get_string(key));
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
  }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }

  static double to_double(const std::string& key, const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      require(used == s.size(), "config: key '" + key + "' is not a number");
      return v;
    } catch (const std::invalid_argument&) {
      throw std::invalid_argument("config: key '" + key + "' is not a number");
    } catch (const std::out_of_range&) {
      throw std::invalid_argument("config: key '" + key + "' is out of range");
    }
  }

  std::map<std::string, std::string> values_;
};

}  // namespace kawalab
