#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mtbench::tokenizer {

// Word-boundary marker (U+2581). Each U+0020 in the input becomes one marker
// and one more is prepended to every non-empty input.
inline constexpr char32_t kMetaSymbol = U'▁';
inline constexpr std::string_view kMetaSymbolUtf8 = "\xE2\x96\x81";
inline constexpr int kNumBytePieces = 256;

enum class Normalization { kIdentity, kNfkc };

std::string_view to_string(Normalization norm);
Normalization parse_normalization(std::string_view text);

struct Piece {
  std::string text;  // UTF-8, meta marker spelled as U+2581
  double log_prob = 0.0;
};

// Unigram segmentation model with byte fallback. Ids 0..255 are the byte
// pieces `<0x00>`..`<0xFF>`; ids from 256 on are `pieces()` in order.
class SubwordModel {
 public:
  // Throws MalformedModel if a log-probability is not finite and <= 0, a
  // piece is empty, duplicated, contains malformed UTF-8, or the meta
  // marker piece is missing.
  SubwordModel(std::vector<Piece> pieces, Normalization normalization, std::uint64_t seed);

  int vocab_size() const { return kNumBytePieces + static_cast<int>(pieces_.size()); }
  const std::vector<Piece>& pieces() const { return pieces_; }
  Normalization normalization() const { return normalization_; }
  std::uint64_t seed() const { return seed_; }
  double byte_log_prob() const { return byte_log_prob_; }

  bool is_byte(int id) const { return id >= 0 && id < kNumBytePieces; }
  std::string piece_text(int id) const;
  double log_prob(int id) const;

  // Maximum log-probability segmentation. Units without a single-character
  // piece are emitted as their UTF-8 bytes.
  std::vector<int> encode(std::string_view text) const;
  std::vector<std::string> encode_as_pieces(std::string_view text) const;

  // Throws UnknownPieceId.
  std::string decode(std::span<const int> ids) const;

  // Sum of piece log-probabilities of a segmentation.
  double score(std::span<const int> ids) const;

  // The unit sequence encode() segments: normalized text, literal U+2581 as
  // raw bytes, spaces as markers and a leading marker.
  std::u32string preprocess(std::string_view text) const;

  // Viterbi over preprocessed units; `excluded` (a piece id) is skipped.
  std::vector<int> viterbi(std::u32string_view units, int excluded = -1) const;

  std::string serialize() const;
  static SubwordModel parse(std::string_view text);
  void save(const std::filesystem::path& path) const;
  static SubwordModel load(const std::filesystem::path& path);

  // 16 hex digits identifying the serialized model.
  std::string fingerprint() const;

 private:
  struct TrieNode {
    std::map<char32_t, int> children;
    int piece_id = -1;
  };

  std::vector<Piece> pieces_;
  Normalization normalization_;
  std::uint64_t seed_;
  double byte_log_prob_ = 0.0;
  std::vector<TrieNode> trie_;
};

}  // namespace mtbench::tokenizer
