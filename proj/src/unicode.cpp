#include "mtbench/unicode.hpp"

#include <unicode/errorcode.h>
#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include "mtbench/error.hpp"

namespace mtbench::unicode {
namespace {

// Decodes one scalar at `pos`; returns its byte length, or 0 if malformed.
std::size_t decode_one(std::string_view text, std::size_t pos, char32_t& out) {
  const auto b0 = static_cast<unsigned char>(text[pos]);
  const std::size_t avail = text.size() - pos;
  auto cont = [&](std::size_t i) {
    return (static_cast<unsigned char>(text[pos + i]) & 0xC0) == 0x80;
  };
  auto byte = [&](std::size_t i) {
    return static_cast<char32_t>(static_cast<unsigned char>(text[pos + i]) & 0x3F);
  };
  if (b0 < 0x80) {
    out = b0;
    return 1;
  }
  if (b0 >= 0xC2 && b0 <= 0xDF) {
    if (avail < 2 || !cont(1)) return 0;
    out = (static_cast<char32_t>(b0 & 0x1F) << 6) | byte(1);
    return 2;
  }
  if (b0 >= 0xE0 && b0 <= 0xEF) {
    if (avail < 3 || !cont(1) || !cont(2)) return 0;
    const char32_t c = (static_cast<char32_t>(b0 & 0x0F) << 12) | (byte(1) << 6) | byte(2);
    if (c < 0x800 || (c >= 0xD800 && c <= 0xDFFF)) return 0;
    out = c;
    return 3;
  }
  if (b0 >= 0xF0 && b0 <= 0xF4) {
    if (avail < 4 || !cont(1) || !cont(2) || !cont(3)) return 0;
    const char32_t c = (static_cast<char32_t>(b0 & 0x07) << 18) | (byte(1) << 12) |
                       (byte(2) << 6) | byte(3);
    if (c < 0x10000 || c > 0x10FFFF) return 0;
    out = c;
    return 4;
  }
  return 0;
}

}  // namespace

std::u32string decode(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  for (std::size_t pos = 0; pos < text.size();) {
    char32_t c = 0;
    const std::size_t n = decode_one(text, pos, c);
    if (n == 0) {
      throw Error(ErrorKind::kInvalidArgument,
                  "malformed UTF-8 at byte offset " + std::to_string(pos));
    }
    out.push_back(c);
    pos += n;
  }
  return out;
}

std::u32string decode_lossless(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  for (std::size_t pos = 0; pos < text.size();) {
    char32_t c = 0;
    const std::size_t n = decode_one(text, pos, c);
    if (n == 0) {
      out.push_back(kRawByteBase + static_cast<unsigned char>(text[pos]));
      ++pos;
    } else {
      out.push_back(c);
      pos += n;
    }
  }
  return out;
}

void append_utf8(std::string& out, char32_t c) {
  if (is_raw_byte(c)) {
    out.push_back(static_cast<char>(c - kRawByteBase));
  } else if (c < 0x80) {
    out.push_back(static_cast<char>(c));
  } else if (c < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (c >> 6)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else if (c < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (c >> 12)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (c >> 18)));
    out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  }
}

std::string encode(std::u32string_view units) {
  std::string out;
  out.reserve(units.size());
  for (char32_t c : units) append_utf8(out, c);
  return out;
}

std::size_t length(std::string_view text) { return decode_lossless(text).size(); }

bool is_whitespace(char32_t c) {
  switch (c) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return c >= 0x2000 && c <= 0x200A;
  }
}

bool is_punctuation(char32_t c) {
  if (c < 0x80) {
    return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) ||
           (c >= 0x5B && c <= 0x60) || (c >= 0x7B && c <= 0x7E);
  }
  switch (c) {
    case 0xA1: case 0xA7: case 0xAB: case 0xB6: case 0xB7: case 0xBB: case 0xBF:
    case 0x37E: case 0x387: case 0x55C: case 0x55D: case 0x55E: case 0x589:
    case 0x5BE: case 0x5C0: case 0x5C3: case 0x5F3: case 0x5F4:
    case 0x60C: case 0x60D: case 0x61B: case 0x61F: case 0x66A: case 0x66B:
    case 0x66C: case 0x66D: case 0x6D4: case 0x964: case 0x965: case 0x970:
    case 0xE4F: case 0xE5A: case 0xE5B: case 0x104A: case 0x104B:
    case 0x1361: case 0x1362: case 0x1363: case 0x1364: case 0x1365: case 0x1366:
    case 0x1367: case 0x1368: case 0x17D4: case 0x17D5: case 0x17D6:
    case 0x17D8: case 0x17D9: case 0x17DA:
      return true;
    default:
      break;
  }
  return (c >= 0x2010 && c <= 0x2027) || (c >= 0x2030 && c <= 0x205E) ||
         (c >= 0x3001 && c <= 0x3003) || (c >= 0x3008 && c <= 0x3011) ||
         (c >= 0x3014 && c <= 0x301F) || (c >= 0xFE10 && c <= 0xFE19) ||
         (c >= 0xFE30 && c <= 0xFE4F) || (c >= 0xFE50 && c <= 0xFE6B) ||
         (c >= 0xFF01 && c <= 0xFF0F) || (c >= 0xFF1A && c <= 0xFF20) ||
         (c >= 0xFF3B && c <= 0xFF40) || (c >= 0xFF5B && c <= 0xFF65);
}

std::string nfkc(std::string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* norm = icu::Normalizer2::getNFKCInstance(status);
  if (U_FAILURE(status)) {
    throw Error(ErrorKind::kInvalidArgument, "ICU NFKC normalizer unavailable");
  }
  // ICU would substitute U+FFFD for malformed bytes; keep those lines verbatim.
  try {
    (void)decode(text);
  } catch (const Error&) {
    return std::string(text);
  }
  const icu::UnicodeString src = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  const icu::UnicodeString dst = norm->normalize(src, status);
  if (U_FAILURE(status)) {
    throw Error(ErrorKind::kInvalidArgument, "NFKC normalization failed");
  }
  std::string out;
  dst.toUTF8String(out);
  return out;
}

std::string to_lower_ascii(std::string_view text) {
  std::string out(text);
  for (char& ch : out) {
    if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
  }
  return out;
}

std::string_view trim(std::string_view text) {
  const auto ws = [](char ch) { return ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n'; };
  while (!text.empty() && ws(text.front())) text.remove_prefix(1);
  while (!text.empty() && ws(text.back())) text.remove_suffix(1);
  return text;
}

}  // namespace mtbench::unicode
