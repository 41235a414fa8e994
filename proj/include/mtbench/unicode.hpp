#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mtbench::unicode {

// Code units used by the segmenter. Valid scalar values map to themselves;
// a byte that is not part of well-formed UTF-8 maps to kRawByteBase + byte.
inline constexpr char32_t kRawByteBase = 0x110000;

constexpr bool is_raw_byte(char32_t unit) { return unit >= kRawByteBase; }

// Strict decode: malformed input throws InvalidArgument.
std::u32string decode(std::string_view text);

// Lossless decode: malformed bytes become raw-byte units.
std::u32string decode_lossless(std::string_view text);

void append_utf8(std::string& out, char32_t unit);
std::string encode(std::u32string_view units);

// Number of scalar values (malformed bytes count one each).
std::size_t length(std::string_view text);

bool is_whitespace(char32_t c);
bool is_punctuation(char32_t c);

// NFKC via ICU. Malformed input is returned unchanged.
std::string nfkc(std::string_view text);

std::string to_lower_ascii(std::string_view text);
std::string_view trim(std::string_view text);

}  // namespace mtbench::unicode
