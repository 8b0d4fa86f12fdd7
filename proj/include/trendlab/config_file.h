#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace trendlab {

/// Flat `key = value` settings. Keys under a `[section]` header are stored as
/// "section.key"; `#` and `;` start comments.
class ConfigFile {
public:
    static ConfigFile parse(std::string_view text, const std::string& origin = "<config>");
    static ConfigFile load(const std::filesystem::path& path);

    std::optional<std::string> get(const std::string& key) const;
    bool has(const std::string& key) const { return values_.count(key) > 0; }
    /// Keys of one section without the "section." prefix, sorted.
    std::vector<std::string> keys(const std::string& section) const;
    const std::map<std::string, std::string>& values() const { return values_; }

    void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

private:
    std::map<std::string, std::string> values_;
};

/// Splits "a, b ,c" into trimmed non-empty items.
std::vector<std::string> split_list(std::string_view text);
std::string_view trim(std::string_view text);

/// Strict boolean: true/false, yes/no, on/off, 1/0. Throws ConfigError.
bool parse_bool(std::string_view text, std::string_view what);

}  // namespace trendlab
