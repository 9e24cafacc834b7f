#pragma once

#include <string>
#include <string_view>
#include <vector>

// Small UTF-8 helpers. Case mapping covers ASCII and the Latin-1 letters
// (Ñ, É, ...) that show up in Philippine-language text; everything else is
// passed through unchanged.
namespace seqlab::text {

// Splits into code points. Invalid bytes become single-byte units.
std::vector<std::string_view> code_points(std::string_view s);

std::string to_lower(std::string_view s);

bool is_upper_letter(std::string_view cp);
bool is_lower_letter(std::string_view cp);
bool is_ascii_digit(std::string_view cp);
bool is_ascii_punct(std::string_view cp);

// First code point is an uppercase letter.
bool starts_upper(std::string_view word);
// Has at least one cased letter and no lowercase letter.
bool all_upper(std::string_view word);
// Non-empty and every code point is an ASCII digit.
bool all_digits(std::string_view word);

std::vector<std::string> split_whitespace(std::string_view s);

// Strips a trailing '\r' (CRLF input).
std::string_view chomp(std::string_view line);

}  // namespace seqlab::text
