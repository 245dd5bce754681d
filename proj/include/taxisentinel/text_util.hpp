#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace taxisentinel {

std::string to_lower_ascii(std::string_view s);
bool is_word_char(char c);
std::vector<std::string> split_whitespace(std::string_view s);
std::string trim(std::string_view s);

// Replaces every non-alphanumeric byte with a space and lowercases ASCII.
std::string strip_punctuation_lower(std::string_view s);

// UTF-8 byte offset <-> code point offset. Offsets past the end clamp to the
// end; byte offsets inside a multi-byte sequence round down.
std::size_t byte_to_char_offset(std::string_view utf8, std::size_t byte_offset);
std::size_t char_to_byte_offset(std::string_view utf8, std::size_t char_offset);
std::size_t utf8_length(std::string_view utf8);

// Shortest round-trip decimal representation, '.' separator.
std::string format_double(double v);
std::string format_fixed(double v, int digits);

// RFC 4180 field quoting.
std::string csv_field(std::string_view s);
std::vector<std::string> parse_csv_line(std::string_view line);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace taxisentinel
