#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mtbench/error.hpp"

namespace mtbench::tokenizer {
class SubwordModel;
}

namespace mtbench::metrics {

inline constexpr int kDefaultMaxOrder = 4;

enum class Smoothing { kNone, kAddOne };
enum class Level { kSentence, kCorpus };
enum class Metric { kBleu, kSpBleu, kCharBleu };

std::string_view to_string(Metric metric);
std::string_view to_string(Level level);
Metric parse_metric(std::string_view text);
Level parse_level(std::string_view text);

// Clipped n-gram match and total counts, summed over sentences.
struct NgramStats {
  std::vector<std::size_t> matches;
  std::vector<std::size_t> totals;
  std::size_t hyp_length = 0;
  std::size_t ref_length = 0;

  explicit NgramStats(int max_order = kDefaultMaxOrder)
      : matches(static_cast<std::size_t>(max_order), 0),
        totals(static_cast<std::size_t>(max_order), 0) {}

  NgramStats& operator+=(const NgramStats& other);
  bool operator==(const NgramStats&) const = default;
};

struct BleuScore {
  NgramStats stats;
  double brevity_penalty = 0.0;
  double score = 0.0;
  // Orders with a non-zero n-gram total in the hypothesis side.
  int effective_order = 0;
  std::string signature;

  double precision(int order) const;  // raw matches/totals, 1-based order
  std::size_t hyp_length() const { return stats.hyp_length; }
  std::size_t ref_length() const { return stats.ref_length; }
};

template <typename Token>
NgramStats ngram_stats(std::span<const Token> hyp, std::span<const Token> ref,
                       int max_order = kDefaultMaxOrder) {
  NgramStats stats(max_order);
  stats.hyp_length = hyp.size();
  stats.ref_length = ref.size();
  for (int n = 1; n <= max_order; ++n) {
    const auto order = static_cast<std::size_t>(n);
    std::map<std::vector<Token>, std::size_t> ref_counts;
    for (std::size_t i = 0; i + order <= ref.size(); ++i) {
      ++ref_counts[std::vector<Token>(ref.begin() + i, ref.begin() + i + order)];
    }
    std::map<std::vector<Token>, std::size_t> hyp_counts;
    for (std::size_t i = 0; i + order <= hyp.size(); ++i) {
      ++hyp_counts[std::vector<Token>(hyp.begin() + i, hyp.begin() + i + order)];
    }
    std::size_t matched = 0;
    for (const auto& [gram, count] : hyp_counts) {
      auto it = ref_counts.find(gram);
      if (it != ref_counts.end()) matched += std::min(count, it->second);
    }
    stats.matches[order - 1] = matched;
    stats.totals[order - 1] = hyp.size() >= order ? hyp.size() - order + 1 : 0;
  }
  return stats;
}

// Geometric mean over orders with non-zero totals, times the brevity
// penalty. With kAddOne, orders >= 2 with zero matches count as 1/(t+1).
BleuScore score_from_stats(const NgramStats& stats, Smoothing smoothing, std::string signature);

std::string make_signature(std::string_view tokenization, Smoothing smoothing, int max_order);

template <typename Token>
BleuScore corpus_bleu(const std::vector<std::vector<Token>>& hypotheses,
                      const std::vector<std::vector<Token>>& references,
                      int max_order = kDefaultMaxOrder, std::string_view tokenization = "none") {
  if (hypotheses.size() != references.size()) {
    throw Error(ErrorKind::kLengthMismatch,
                "hypothesis count " + std::to_string(hypotheses.size()) +
                    " differs from reference count " + std::to_string(references.size()));
  }
  if (hypotheses.empty()) throw Error(ErrorKind::kEmptyInput, "no sentences to score");
  NgramStats total(max_order);
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    total += ngram_stats<Token>(hypotheses[i], references[i], max_order);
  }
  return score_from_stats(total, Smoothing::kNone,
                          make_signature(tokenization, Smoothing::kNone, max_order));
}

template <typename Token>
BleuScore sentence_bleu(const std::vector<Token>& hypothesis, const std::vector<Token>& reference,
                        Smoothing smoothing = Smoothing::kAddOne,
                        int max_order = kDefaultMaxOrder, std::string_view tokenization = "none") {
  if (reference.empty()) throw Error(ErrorKind::kEmptyReference, "reference is empty");
  return score_from_stats(ngram_stats<Token>(hypothesis, reference, max_order), smoothing,
                          make_signature(tokenization, smoothing, max_order));
}

// Whitespace split after detaching every punctuation scalar.
std::vector<std::string> word_tokenize(std::string_view text);
// One token per Unicode scalar, whitespace included.
std::u32string char_tokenize(std::string_view text);

BleuScore sp_bleu(const tokenizer::SubwordModel& model, std::string_view hypothesis,
                  std::string_view reference, Level level = Level::kCorpus);
BleuScore char_bleu(std::string_view hypothesis, std::string_view reference,
                    Level level = Level::kCorpus);
BleuScore word_bleu(std::string_view hypothesis, std::string_view reference,
                    Level level = Level::kCorpus);

// Scores parallel hypothesis/reference lists. Corpus level returns one
// score; sentence level returns one per pair. `model` is required for
// spBLEU. Sentence statistics are computed on up to `threads` threads and
// summed in index order.
std::vector<BleuScore> score_lines(Metric metric, Level level,
                                   const tokenizer::SubwordModel* model,
                                   const std::vector<std::string>& hypotheses,
                                   const std::vector<std::string>& references,
                                   unsigned threads = 1);

}  // namespace mtbench::metrics
