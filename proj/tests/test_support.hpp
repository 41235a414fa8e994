#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "mtbench/sampling.hpp"
#include "mtbench/unicode.hpp"
#include "mtbench/unigram_model.hpp"

namespace mtbench::testutil {

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("mtbench-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Scalars drawn from several scripts plus whitespace and the meta marker.
inline std::string random_text(std::mt19937_64& rng, std::size_t max_scalars,
                               bool allow_malformed = false) {
  static const std::vector<std::pair<char32_t, char32_t>> ranges = {
      {U'a', U'z'},       {U'A', U'Z'},       {U'0', U'9'},       {0x00E0, 0x00FF},
      {0x0400, 0x044F},   {0x0900, 0x097F},   {0x0600, 0x06FF},   {0x4E00, 0x4E80},
      {0x3040, 0x309F},   {0xAC00, 0xAC40},   {0x1F600, 0x1F64F}, {0x0E00, 0x0E5B},
  };
  std::string out;
  const std::size_t n = rng() % (max_scalars + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const auto pick = rng() % 100;
    if (pick < 15) {
      out += ' ';
    } else if (pick < 17) {
      out += tokenizer::kMetaSymbolUtf8;
    } else if (pick < 19) {
      out += "\t.,!?"[rng() % 5];
    } else if (allow_malformed && pick < 21) {
      out += static_cast<char>(0x80 + rng() % 0x80);
    } else {
      const auto& [lo, hi] = ranges[rng() % ranges.size()];
      unicode::append_utf8(out, lo + static_cast<char32_t>(rng() % (hi - lo + 1)));
    }
  }
  return out;
}

// 50 pieces over a, b, c, d and the meta marker.
inline tokenizer::SubwordModel toy_model() {
  const std::string m(tokenizer::kMetaSymbolUtf8);
  std::vector<std::string> texts = {m, "a", "b", "c", m + "a", m + "b", m + "c", "ab", "ba",
                                    "bc", "cb", "ca", "ac", "aa", "bb", "cc", "abc", "bca",
                                    "cab", "aba", "bab", "cbc", m + "ab", m + "ba", m + "bc",
                                    m + "ca", m + "abc", m + "aa", "aab", "abb", "bcc", "cca",
                                    "abca", "bcab", "caba", m + "cab", m + "bca", "aaa", "bbb",
                                    "ccc", "acb", "bac", "cba", m + "cb", m + "ac", "dd", "d" + m,
                                    m + "d", "abcd", "ad"};
  std::vector<tokenizer::Piece> pieces;
  std::mt19937_64 rng(50);
  for (const auto& t : texts) {
    pieces.push_back({t, -0.5 - 4.0 * tokenizer::unit_interval(rng())});
  }
  return tokenizer::SubwordModel(pieces, tokenizer::Normalization::kIdentity, 0);
}

}  // namespace mtbench::testutil
