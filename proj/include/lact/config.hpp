#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lact {

/// Invalid configuration: unknown key, malformed value, missing file.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Flat key=value settings. Blank lines and lines starting with '#' are
/// ignored; whitespace around keys and values is trimmed.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(std::string_view text, const std::string& origin);
KeyValues read_key_values(const std::filesystem::path& path);
std::string format_key_values(const KeyValues& kv);
void write_key_values(const std::filesystem::path& path, const KeyValues& kv);

/// Throws ConfigError naming the first key of kv not in allowed.
void reject_unknown(const KeyValues& kv, const std::set<std::string>& allowed,
                    const std::string& origin);

std::string get_string(const KeyValues& kv, const std::string& key, const std::string& fallback);
std::size_t get_size(const KeyValues& kv, const std::string& key, std::size_t fallback);
std::uint64_t get_u64(const KeyValues& kv, const std::string& key, std::uint64_t fallback);
double get_double(const KeyValues& kv, const std::string& key, double fallback);

}  // namespace lact
