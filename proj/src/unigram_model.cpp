#include "mtbench/unigram_model.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <set>

#include "mtbench/error.hpp"
#include "mtbench/io.hpp"
#include "mtbench/unicode.hpp"

namespace mtbench::tokenizer {
namespace {

constexpr std::string_view kMagic = "mtbench-unigram";
constexpr int kFormatVersion = 1;
// Byte pieces score this far below the least likely regular piece.
constexpr double kBytePenalty = 10.0;

std::string escape_piece(std::string_view text) {
  std::string out;
  for (char ch : text) {
    switch (ch) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string unescape_piece(std::string_view text) {
  std::string out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '\\') {
      out += text[i];
      continue;
    }
    if (++i == text.size()) {
      throw Error(ErrorKind::kMalformedModel, "dangling escape in piece");
    }
    switch (text[i]) {
      case '\\': out += '\\'; break;
      case 't': out += '\t'; break;
      case 'n': out += '\n'; break;
      case 'r': out += '\r'; break;
      default: throw Error(ErrorKind::kMalformedModel, "unknown escape in piece");
    }
  }
  return out;
}

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorKind::kMalformedModel, what);
}

}  // namespace

std::string_view to_string(Normalization norm) {
  return norm == Normalization::kNfkc ? "nfkc" : "identity";
}

Normalization parse_normalization(std::string_view text) {
  if (text == "identity") return Normalization::kIdentity;
  if (text == "nfkc") return Normalization::kNfkc;
  throw Error(ErrorKind::kInvalidArgument, "unknown normalization '" + std::string(text) + "'");
}

SubwordModel::SubwordModel(std::vector<Piece> pieces, Normalization normalization,
                           std::uint64_t seed)
    : pieces_(std::move(pieces)), normalization_(normalization), seed_(seed) {
  trie_.emplace_back();
  double min_log_prob = 0.0;
  bool has_meta = false;
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    const Piece& p = pieces_[i];
    if (p.text.empty()) malformed("empty piece at index " + std::to_string(i));
    if (!std::isfinite(p.log_prob) || p.log_prob > 0.0) {
      malformed("piece '" + p.text + "' has log-probability outside (-inf, 0]");
    }
    std::u32string units;
    try {
      units = unicode::decode(p.text);
    } catch (const Error&) {
      malformed("piece at index " + std::to_string(i) + " is not valid UTF-8");
    }
    int node = 0;
    for (char32_t c : units) {
      auto it = trie_[node].children.find(c);
      if (it == trie_[node].children.end()) {
        trie_.emplace_back();
        const int next = static_cast<int>(trie_.size()) - 1;
        trie_[node].children.emplace(c, next);
        node = next;
      } else {
        node = it->second;
      }
    }
    if (trie_[node].piece_id >= 0) malformed("duplicate piece '" + p.text + "'");
    trie_[node].piece_id = kNumBytePieces + static_cast<int>(i);
    min_log_prob = std::min(min_log_prob, p.log_prob);
    has_meta = has_meta || p.text == kMetaSymbolUtf8;
  }
  if (!has_meta) malformed("model lacks the word-boundary marker piece");
  byte_log_prob_ = min_log_prob - kBytePenalty;
}

std::string SubwordModel::piece_text(int id) const {
  if (is_byte(id)) return fmt::format("<0x{:02X}>", id);
  if (id < 0 || id >= vocab_size()) {
    throw Error(ErrorKind::kUnknownPieceId, "unknown piece id " + std::to_string(id));
  }
  return pieces_[static_cast<std::size_t>(id - kNumBytePieces)].text;
}

double SubwordModel::log_prob(int id) const {
  if (is_byte(id)) return byte_log_prob_;
  if (id < 0 || id >= vocab_size()) {
    throw Error(ErrorKind::kUnknownPieceId, "unknown piece id " + std::to_string(id));
  }
  return pieces_[static_cast<std::size_t>(id - kNumBytePieces)].log_prob;
}

std::u32string SubwordModel::preprocess(std::string_view text) const {
  std::u32string units;
  if (text.empty()) return units;
  const std::string normalized =
      normalization_ == Normalization::kNfkc ? unicode::nfkc(text) : std::string(text);
  if (normalized.empty()) return units;
  units.push_back(kMetaSymbol);
  for (char32_t c : unicode::decode_lossless(normalized)) {
    if (c == U' ') {
      units.push_back(kMetaSymbol);
    } else if (c == kMetaSymbol) {
      for (unsigned char b : kMetaSymbolUtf8) units.push_back(unicode::kRawByteBase + b);
    } else {
      units.push_back(c);
    }
  }
  return units;
}

std::vector<int> SubwordModel::viterbi(std::u32string_view units, int excluded) const {
  const std::size_t n = units.size();
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  std::vector<double> best(n + 1, kNegInf);
  // back[i] = (start position, piece id or -1 for byte fallback of one unit)
  std::vector<std::pair<std::size_t, int>> back(n + 1, {0, -1});
  best[0] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (best[i] == kNegInf) continue;
    bool single_unit_piece = false;
    int node = 0;
    for (std::size_t j = i; j < n; ++j) {
      auto it = trie_[node].children.find(units[j]);
      if (it == trie_[node].children.end()) break;
      node = it->second;
      const int id = trie_[node].piece_id;
      if (id < 0 || id == excluded) continue;
      if (j == i) single_unit_piece = true;
      const double cand = best[i] + log_prob(id);
      if (cand > best[j + 1]) {
        best[j + 1] = cand;
        back[j + 1] = {i, id};
      }
    }
    if (!single_unit_piece) {
      std::string bytes;
      unicode::append_utf8(bytes, units[i]);
      const double cand = best[i] + static_cast<double>(bytes.size()) * byte_log_prob_;
      if (cand > best[i + 1]) {
        best[i + 1] = cand;
        back[i + 1] = {i, -1};
      }
    }
  }
  std::vector<int> ids;
  for (std::size_t pos = n; pos > 0;) {
    const auto [start, id] = back[pos];
    if (id >= 0) {
      ids.push_back(id);
    } else {
      std::string bytes;
      unicode::append_utf8(bytes, units[start]);
      for (auto it = bytes.rbegin(); it != bytes.rend(); ++it) {
        ids.push_back(static_cast<unsigned char>(*it));
      }
    }
    pos = start;
  }
  std::reverse(ids.begin(), ids.end());
  return ids;
}

std::vector<int> SubwordModel::encode(std::string_view text) const {
  return viterbi(preprocess(text));
}

std::vector<std::string> SubwordModel::encode_as_pieces(std::string_view text) const {
  std::vector<std::string> out;
  for (int id : encode(text)) out.push_back(piece_text(id));
  return out;
}

std::string SubwordModel::decode(std::span<const int> ids) const {
  std::string out;
  bool first = true;
  for (int id : ids) {
    if (id < 0 || id >= vocab_size()) {
      throw Error(ErrorKind::kUnknownPieceId, "unknown piece id " + std::to_string(id));
    }
    if (is_byte(id)) {
      out.push_back(static_cast<char>(id));
      first = false;
      continue;
    }
    std::string_view text = pieces_[static_cast<std::size_t>(id - kNumBytePieces)].text;
    if (first && text.starts_with(kMetaSymbolUtf8)) {
      text.remove_prefix(kMetaSymbolUtf8.size());
    }
    first = false;
    for (std::size_t pos = 0;;) {
      const std::size_t meta = text.find(kMetaSymbolUtf8, pos);
      if (meta == std::string_view::npos) {
        out.append(text.substr(pos));
        break;
      }
      out.append(text.substr(pos, meta - pos));
      out.push_back(' ');
      pos = meta + kMetaSymbolUtf8.size();
    }
  }
  return out;
}

double SubwordModel::score(std::span<const int> ids) const {
  double total = 0.0;
  for (int id : ids) total += log_prob(id);
  return total;
}

std::string SubwordModel::serialize() const {
  std::string out;
  out += fmt::format("{}\t{}\n", kMagic, kFormatVersion);
  out += fmt::format("vocab_size\t{}\n", vocab_size());
  out += fmt::format("meta_symbol\t{}\n", kMetaSymbolUtf8);
  out += fmt::format("normalization\t{}\n", to_string(normalization_));
  out += fmt::format("seed\t{}\n", seed_);
  out += fmt::format("byte_fallback\t{}\n", kNumBytePieces);
  out += fmt::format("pieces\t{}\n", pieces_.size());
  for (const Piece& p : pieces_) {
    out += fmt::format("{}\t{:.17g}\n", escape_piece(p.text), p.log_prob);
  }
  return out;
}

SubwordModel SubwordModel::parse(std::string_view text) {
  const auto lines = io::split_lines(text);
  std::size_t pos = 0;
  auto header = [&](std::string_view key) -> std::string {
    if (pos >= lines.size()) malformed("truncated header, expected '" + std::string(key) + "'");
    const auto cols = io::split(lines[pos++], '\t');
    if (cols.size() != 2 || cols[0] != key) {
      malformed("expected header field '" + std::string(key) + "'");
    }
    return cols[1];
  };
  auto to_u64 = [](const std::string& s, std::string_view what) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      malformed("bad " + std::string(what) + " '" + s + "'");
    }
    return v;
  };
  if (header(kMagic) != std::to_string(kFormatVersion)) malformed("unsupported model version");
  const auto vocab = to_u64(header("vocab_size"), "vocab_size");
  if (header("meta_symbol") != kMetaSymbolUtf8) malformed("unsupported meta symbol");
  const Normalization norm = parse_normalization(header("normalization"));
  const auto seed = to_u64(header("seed"), "seed");
  if (to_u64(header("byte_fallback"), "byte_fallback") != kNumBytePieces) {
    malformed("unsupported byte fallback size");
  }
  const auto count = to_u64(header("pieces"), "piece count");
  if (lines.size() - pos != count) malformed("piece count does not match table length");
  if (vocab != count + kNumBytePieces) malformed("vocab_size inconsistent with piece table");
  std::vector<Piece> pieces;
  pieces.reserve(count);
  for (; pos < lines.size(); ++pos) {
    const std::size_t tab = lines[pos].rfind('\t');
    if (tab == std::string::npos) malformed("piece row without tab");
    Piece p;
    p.text = unescape_piece(std::string_view(lines[pos]).substr(0, tab));
    const std::string num = lines[pos].substr(tab + 1);
    auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), p.log_prob);
    if (ec != std::errc() || ptr != num.data() + num.size()) {
      malformed("bad log-probability '" + num + "'");
    }
    pieces.push_back(std::move(p));
  }
  return SubwordModel(std::move(pieces), norm, seed);
}

void SubwordModel::save(const std::filesystem::path& path) const {
  io::write_file(path, serialize());
}

SubwordModel SubwordModel::load(const std::filesystem::path& path) {
  return parse(io::read_file(path));
}

std::string SubwordModel::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : serialize()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace mtbench::tokenizer
