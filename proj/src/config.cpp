#include "lact/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "lact/io.hpp"

namespace lact {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <class T>
T parse_integer(const std::string& key, const std::string& text) {
  T v{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end)
    throw ConfigError("setting '" + key + "': expected a non-negative integer, got '" + text + "'");
  return v;
}

}  // namespace

KeyValues parse_key_values(std::string_view text, const std::string& origin) {
  KeyValues kv;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    const auto where = origin + ":" + std::to_string(line_no) + ": ";
    if (eq == std::string_view::npos) throw ConfigError(where + "expected key=value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError(where + "empty key");
    if (!kv.emplace(key, value).second) throw ConfigError(where + "duplicate key '" + key + "'");
  }
  return kv;
}

KeyValues read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_key_values(buf.str(), path.string());
}

std::string format_key_values(const KeyValues& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

void write_key_values(const std::filesystem::path& path, const KeyValues& kv) {
  const std::string text = format_key_values(kv);
  io::write_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

void reject_unknown(const KeyValues& kv, const std::set<std::string>& allowed,
                    const std::string& origin) {
  for (const auto& [k, v] : kv)
    if (!allowed.contains(k)) throw ConfigError(origin + ": unknown key '" + k + "'");
}

std::string get_string(const KeyValues& kv, const std::string& key, const std::string& fallback) {
  const auto it = kv.find(key);
  return it == kv.end() ? fallback : it->second;
}

std::size_t get_size(const KeyValues& kv, const std::string& key, std::size_t fallback) {
  const auto it = kv.find(key);
  return it == kv.end() ? fallback : parse_integer<std::size_t>(key, it->second);
}

std::uint64_t get_u64(const KeyValues& kv, const std::string& key, std::uint64_t fallback) {
  const auto it = kv.find(key);
  return it == kv.end() ? fallback : parse_integer<std::uint64_t>(key, it->second);
}

double get_double(const KeyValues& kv, const std::string& key, double fallback) {
  const auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  try {
    return io::parse_double(it->second);
  } catch (const std::exception&) {
    throw ConfigError("setting '" + key + "': expected a number, got '" + it->second + "'");
  }
}

}  // namespace lact
