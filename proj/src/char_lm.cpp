#include "mtbench/char_lm.hpp"

#include <cmath>
#include <set>

#include "mtbench/error.hpp"
#include "mtbench/unicode.hpp"

namespace mtbench::qa {
namespace {

// Boundary symbols sit outside the scalar and raw-byte ranges.
constexpr char32_t kBos = unicode::kRawByteBase + 0x100;
constexpr char32_t kEos = unicode::kRawByteBase + 0x101;

}  // namespace

std::size_t CharLm::Hash::operator()(const std::u32string& s) const noexcept {
  std::size_t h = 1469598103934665603ULL;
  for (char32_t c : s) {
    h ^= static_cast<std::size_t>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

void CharLm::train(const std::vector<std::string>& sentences) {
  if (sentences.empty()) throw Error(ErrorKind::kEmptyCorpus, "no LM training sentences");
  context_counts_.clear();
  event_counts_.clear();
  std::set<char32_t> alphabet;
  const auto history = static_cast<std::size_t>(order_ - 1);
  for (const auto& s : sentences) {
    std::u32string padded(history, kBos);
    for (char32_t c : unicode::decode_lossless(s)) {
      padded.push_back(c);
      alphabet.insert(c);
    }
    padded.push_back(kEos);
    for (std::size_t i = history; i < padded.size(); ++i) {
      const std::u32string ctx = padded.substr(i - history, history);
      context_counts_[ctx] += 1.0;
      event_counts_[padded.substr(i - history, history + 1)] += 1.0;
    }
  }
  // Alphabet plus end-of-sentence plus one slot for unseen scalars.
  vocab_ = static_cast<double>(alphabet.size()) + 2.0;
  trained_ = true;

  double sum = 0.0;
  double sum_sq = 0.0;
  for (const auto& s : sentences) {
    const double v = nll_per_char(s);
    sum += v;
    sum_sq += v * v;
  }
  const auto n = static_cast<double>(sentences.size());
  mean_ = sum / n;
  stddev_ = std::sqrt(std::max(0.0, sum_sq / n - mean_ * mean_));
}

double CharLm::nll_per_char(std::string_view text) const {
  if (!trained_) throw Error(ErrorKind::kUntrainedModel, "character LM has not been trained");
  const auto history = static_cast<std::size_t>(order_ - 1);
  std::u32string padded(history, kBos);
  padded += unicode::decode_lossless(text);
  padded.push_back(kEos);
  double nll = 0.0;
  for (std::size_t i = history; i < padded.size(); ++i) {
    const std::u32string ctx = padded.substr(i - history, history);
    auto c = context_counts_.find(ctx);
    auto e = event_counts_.find(padded.substr(i - history, history + 1));
    const double ctx_count = c == context_counts_.end() ? 0.0 : c->second;
    const double ev_count = e == event_counts_.end() ? 0.0 : e->second;
    nll -= std::log((ev_count + 1.0) / (ctx_count + vocab_));
  }
  return nll / static_cast<double>(padded.size() - history);
}

}  // namespace mtbench::qa
