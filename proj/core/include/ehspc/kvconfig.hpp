#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ehspc/scenario.hpp"

namespace ehspc {

/// One `key = value` entry from a flat text config.
struct KeyValue {
  std::string key;
  std::string value;
  int line = 0;
};

/// Parses `key = value` lines. Blank lines and lines starting with `#` are
/// skipped; anything else without `=` is a kParse error naming the line.
std::vector<KeyValue> parse_kv(std::string_view text);
std::vector<KeyValue> read_kv_file(const std::filesystem::path& path);

/// Scenario and Constants field names, in the order write_kv emits them.
std::span<const std::string_view> config_keys();
bool is_config_key(std::string_view key);

/// Assigns one field by name. Returns false for an unknown key; malformed
/// values throw Error(kParse).
bool set_config_field(Scenario& s, Constants& c, std::string_view key,
                      std::string_view value);

/// Current value of a field, formatted as write_kv would.
std::string get_config_field(const Scenario& s, const Constants& c,
                             std::string_view key);

std::string write_kv(const Scenario& s, const Constants& c);

/// Shortest text that still carries 17 significant digits ("%.17g").
std::string format_double(double v);
double parse_double(std::string_view text, std::string_view what);
long long parse_int(std::string_view text, std::string_view what);
std::string_view trim(std::string_view s) noexcept;
std::vector<std::string_view> split(std::string_view s, char sep);

}  // namespace ehspc
