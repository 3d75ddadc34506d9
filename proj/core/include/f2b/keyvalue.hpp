#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

namespace f2b {

/// Flat `key = value` text records. Blank lines and `#` comments are ignored;
/// duplicate keys are a parse error.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(std::istream& in, const std::string& source);
KeyValues read_key_values(const std::filesystem::path& path);
void write_key_values(const KeyValues& values, const std::filesystem::path& path);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_exact(double value);

double parse_number(const std::string& text, const std::string& key);
long parse_integer(const std::string& text, const std::string& key);
bool parse_bool(const std::string& text, const std::string& key);

}  // namespace f2b
