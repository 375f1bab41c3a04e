#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mobipred {

// Flat key=value configuration. '#' starts a comment. Environment variables
// with the MOBIPRED_ prefix override file values: key "learn.c_exp_step"
// maps to MOBIPRED_LEARN_C_EXP_STEP.
class Config {
  public:
    Config() = default;

    static Config from_file(const std::string& path);
    static Config from_string(const std::string& text);

    void set(const std::string& key, const std::string& value);
    void apply_env_overrides();

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    // Comma-separated list.
    std::vector<std::string> get_list(const std::string& key) const;

    const std::map<std::string, std::string>& entries() const { return values_; }

  private:
    std::optional<std::string> lookup(const std::string& key) const;

    std::map<std::string, std::string> values_;
    bool env_overrides_ = false;
};

}  // namespace mobipred
