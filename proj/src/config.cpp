#include "mobipred/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mobipred/csv.hpp"

namespace mobipred {

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string env_name(const std::string& key) {
    std::string name = "MOBIPRED_";
    for (unsigned char c : key) name += c == '.' ? '_' : static_cast<char>(std::toupper(c));
    return name;
}

void parse_into(Config& cfg, std::istream& in) {
    std::string line;
    while (std::getline(in, line)) {
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos) throw std::runtime_error("config line missing '=': " + line);
        cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
}

}  // namespace

Config Config::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    Config cfg;
    parse_into(cfg, in);
    return cfg;
}

Config Config::from_string(const std::string& text) {
    std::istringstream in(text);
    Config cfg;
    parse_into(cfg, in);
    return cfg;
}

void Config::set(const std::string& key, const std::string& value) {
    values_[key] = value;
}

void Config::apply_env_overrides() {
    // Key -> env name is unambiguous (dots become underscores); the reverse
    // is not, so overrides are resolved per key. Existing keys are rewritten
    // eagerly; keys absent from the file are still overridable because
    // lookup() consults the environment once overrides are enabled.
    env_overrides_ = true;
    for (auto& [key, value] : values_)
        if (const char* env = std::getenv(env_name(key).c_str())) value = env;
}

std::optional<std::string> Config::lookup(const std::string& key) const {
    auto it = values_.find(key);
    if (it != values_.end()) return it->second;
    if (env_overrides_)
        if (const char* env = std::getenv(env_name(key).c_str())) return std::string(env);
    return std::nullopt;
}

bool Config::has(const std::string& key) const { return lookup(key).has_value(); }

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    auto v = lookup(key);
    return v ? *v : fallback;
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
    auto s = lookup(key);
    if (!s) return fallback;
    std::int64_t v;
    if (!parse_int64(*s, v)) throw std::runtime_error("config key '" + key + "' is not an integer: " + *s);
    return v;
}

double Config::get_double(const std::string& key, double fallback) const {
    auto s = lookup(key);
    if (!s) return fallback;
    double v;
    if (!parse_double(*s, v)) throw std::runtime_error("config key '" + key + "' is not a number: " + *s);
    return v;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    auto s = lookup(key);
    if (!s) return fallback;
    std::string v = *s;
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw std::runtime_error("config key '" + key + "' is not a boolean: " + *s);
}

std::vector<std::string> Config::get_list(const std::string& key) const {
    std::vector<std::string> out;
    auto s = lookup(key);
    if (!s) return out;
    std::string cur;
    for (char c : *s) {
        if (c == ',') {
            if (!trim(cur).empty()) out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!trim(cur).empty()) out.push_back(trim(cur));
    return out;
}

}  // namespace mobipred
