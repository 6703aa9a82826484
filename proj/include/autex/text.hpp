#pragma once

#include <string>
#include <string_view>
#include <vector>

// UTF-8 helpers shared by every module. All offsets exposed by the library
// are counted in Unicode scalar values, so most code works on std::u32string.
namespace autex::text {

std::u32string decode_utf8(std::string_view in);
std::string encode_utf8(std::u32string_view in);

/// Decodes strict UTF-8, falling back to Latin-1 when the input is not
/// valid UTF-8.
std::u32string decode_source(std::string_view in);

bool is_valid_utf8(std::string_view in);

char32_t fold(char32_t c);
std::u32string fold(std::u32string_view s);
std::string fold_utf8(std::string_view s);

/// Alphanumeric in the matcher's sense: ASCII letters and digits, Latin-1
/// and Latin Extended letters, Greek and Cyrillic letters.
bool is_word_char(char32_t c);
bool is_alpha(char32_t c);
bool is_space(char32_t c);

std::string_view trim(std::string_view s);
/// Trims and collapses every whitespace run to one blank.
std::string collapse_whitespace(std::string_view s);

std::vector<std::string> split_lines(std::string_view s);

/// Number of scalar values in a UTF-8 string.
std::size_t length(std::string_view utf8);

/// Case-insensitive ordering: code points after folding, ties broken by the
/// unfolded text so the order is total.
bool less_folded(std::string_view a, std::string_view b);
bool equal_folded(std::string_view a, std::string_view b);

}  // namespace autex::text
