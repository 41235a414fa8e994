#include "mtbench/unigram_trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <unordered_map>

#include "mtbench/error.hpp"
#include "mtbench/unicode.hpp"

namespace mtbench::tokenizer {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Expected counts are floored here so unused pieces keep a finite score.
constexpr double kMinExpectedCount = 1e-6;

double log_sum_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

struct U32Hash {
  std::size_t operator()(const std::u32string& s) const noexcept {
    std::size_t h = 1469598103934665603ULL;
    for (char32_t c : s) {
      h ^= static_cast<std::size_t>(c);
      h *= 1099511628211ULL;
    }
    return h;
  }
};

struct Segment {
  std::u32string units;
  double freq = 0.0;
};

struct TrainPiece {
  std::u32string units;
  double log_prob = 0.0;
  bool required = false;
};

// Trie over the current training vocabulary.
class PieceIndex {
 public:
  explicit PieceIndex(const std::vector<TrainPiece>& pieces) : pieces_(pieces) {
    nodes_.emplace_back();
    for (std::size_t id = 0; id < pieces.size(); ++id) {
      int node = 0;
      for (char32_t c : pieces[id].units) {
        auto [it, inserted] = nodes_[node].children.emplace(c, 0);
        if (inserted) {
          it->second = static_cast<int>(nodes_.size());
          nodes_.emplace_back();
        }
        node = it->second;
      }
      nodes_[node].piece = static_cast<int>(id);
    }
  }

  // Calls fn(end, piece_id) for each piece starting at `start`.
  template <typename Fn>
  void for_each_match(std::u32string_view units, std::size_t start, Fn&& fn) const {
    int node = 0;
    for (std::size_t j = start; j < units.size(); ++j) {
      auto it = nodes_[node].children.find(units[j]);
      if (it == nodes_[node].children.end()) return;
      node = it->second;
      if (nodes_[node].piece >= 0) fn(j + 1, nodes_[node].piece);
    }
  }

  // Best segmentation, skipping piece `excluded`. Every unit must be covered
  // by a single-unit piece other than `excluded`.
  std::vector<int> viterbi(std::u32string_view units, int excluded = -1) const {
    const std::size_t n = units.size();
    std::vector<double> best(n + 1, kNegInf);
    std::vector<std::pair<std::size_t, int>> back(n + 1, {0, -1});
    best[0] = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (best[i] == kNegInf) continue;
      for_each_match(units, i, [&](std::size_t end, int id) {
        if (id == excluded) return;
        const double cand = best[i] + pieces_[id].log_prob;
        if (cand > best[end]) {
          best[end] = cand;
          back[end] = {i, id};
        }
      });
    }
    std::vector<int> ids;
    if (best[n] == kNegInf) return ids;
    for (std::size_t pos = n; pos > 0; pos = back[pos].first) ids.push_back(back[pos].second);
    std::reverse(ids.begin(), ids.end());
    return ids;
  }

 private:
  struct Node {
    std::map<char32_t, int> children;
    int piece = -1;
  };
  const std::vector<TrainPiece>& pieces_;
  std::vector<Node> nodes_;
};

void em_step(std::vector<TrainPiece>& pieces, const std::vector<Segment>& segments) {
  const PieceIndex index(pieces);
  std::vector<double> expected(pieces.size(), 0.0);
  struct Edge {
    std::size_t start;
    std::size_t end;
    int id;
  };
  std::vector<Edge> edges;
  std::vector<double> alpha;
  std::vector<double> beta;
  for (const Segment& seg : segments) {
    const std::size_t n = seg.units.size();
    edges.clear();
    for (std::size_t i = 0; i < n; ++i) {
      index.for_each_match(seg.units, i, [&](std::size_t end, int id) {
        edges.push_back({i, end, id});
      });
    }
    alpha.assign(n + 1, kNegInf);
    beta.assign(n + 1, kNegInf);
    alpha[0] = 0.0;
    // Edges are sorted by start, so a forward sweep sees each alpha[start]
    // complete before it is used.
    for (const Edge& e : edges) {
      alpha[e.end] = log_sum_exp(alpha[e.end], alpha[e.start] + pieces[e.id].log_prob);
    }
    beta[n] = 0.0;
    for (auto it = edges.rbegin(); it != edges.rend(); ++it) {
      beta[it->start] = log_sum_exp(beta[it->start], pieces[it->id].log_prob + beta[it->end]);
    }
    const double z = alpha[n];
    if (z == kNegInf) continue;
    for (const Edge& e : edges) {
      const double post = std::exp(alpha[e.start] + pieces[e.id].log_prob + beta[e.end] - z);
      expected[e.id] += seg.freq * post;
    }
  }
  double total = 0.0;
  for (double& c : expected) {
    c = std::max(c, kMinExpectedCount);
    total += c;
  }
  const double log_total = std::log(total);
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    pieces[i].log_prob = std::min(0.0, std::log(expected[i]) - log_total);
  }
}

// Removes the pieces whose deletion costs the least corpus likelihood,
// replacing each by its best alternative segmentation.
void prune(std::vector<TrainPiece>& pieces, const std::vector<Segment>& segments,
           std::size_t new_size) {
  const PieceIndex index(pieces);
  std::vector<double> freq(pieces.size(), 0.0);
  for (const Segment& seg : segments) {
    for (int id : index.viterbi(seg.units)) freq[id] += seg.freq;
  }
  double sum = 0.0;
  for (double f : freq) sum += f;
  const double log_sum = std::log(sum);

  struct Candidate {
    double loss;
    std::size_t id;
  };
  std::vector<Candidate> candidates;
  for (std::size_t id = 0; id < pieces.size(); ++id) {
    if (pieces[id].required) continue;
    if (freq[id] <= 0.0) {
      candidates.push_back({0.0, id});
      continue;
    }
    const auto alt = index.viterbi(pieces[id].units, static_cast<int>(id));
    const double new_sum = sum + freq[id] * (static_cast<double>(alt.size()) - 1.0);
    const double log_new_sum = std::log(new_sum);
    double alt_log_prob = 0.0;
    for (int a : alt) alt_log_prob += std::log(freq[a] + freq[id]) - log_new_sum;
    const double own_log_prob = std::log(freq[id]) - log_sum;
    const double share = freq[id] / sum;
    candidates.push_back({share * (own_log_prob - alt_log_prob), id});
  }
  std::sort(candidates.begin(), candidates.end(), [&](const Candidate& a, const Candidate& b) {
    if (a.loss != b.loss) return a.loss < b.loss;
    return pieces[a.id].units < pieces[b.id].units;
  });
  const std::size_t to_remove = std::min(candidates.size(), pieces.size() - new_size);
  std::vector<bool> drop(pieces.size(), false);
  for (std::size_t i = 0; i < to_remove; ++i) drop[candidates[i].id] = true;
  std::vector<TrainPiece> kept;
  kept.reserve(pieces.size() - to_remove);
  for (std::size_t id = 0; id < pieces.size(); ++id) {
    if (!drop[id]) kept.push_back(std::move(pieces[id]));
  }
  pieces = std::move(kept);
}

}  // namespace

std::vector<std::string> draw_sample(const std::vector<std::vector<std::string>>& corpora,
                                     const SamplingPlan& plan, std::size_t budget,
                                     std::uint64_t seed) {
  if (plan.weights.size() != corpora.size()) {
    throw Error(ErrorKind::kInvalidArgument, "sampling plan does not match corpus count");
  }
  std::vector<double> cumulative;
  double acc = 0.0;
  for (std::size_t i = 0; i < corpora.size(); ++i) {
    acc += corpora[i].empty() ? 0.0 : plan.weights[i];
    cumulative.push_back(acc);
  }
  if (acc <= 0.0) throw Error(ErrorKind::kEmptyCorpus, "no sentences to sample from");
  std::mt19937_64 rng(seed);
  std::vector<std::string> sample;
  sample.reserve(budget);
  for (std::size_t k = 0; k < budget; ++k) {
    const double u = unit_interval(rng()) * acc;
    std::size_t c = static_cast<std::size_t>(
        std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
    c = std::min(c, corpora.size() - 1);
    while (corpora[c].empty()) --c;
    sample.push_back(corpora[c][rng() % corpora[c].size()]);
  }
  return sample;
}

SubwordModel train_unigram(const std::vector<std::vector<std::string>>& corpora,
                           const SamplingPlan& plan, const TrainerOptions& options) {
  std::size_t total_sentences = 0;
  for (const auto& c : corpora) total_sentences += c.size();
  if (corpora.empty() || total_sentences == 0) {
    throw Error(ErrorKind::kEmptyCorpus, "training corpora are empty");
  }
  if (options.vocab_size <= kNumBytePieces) {
    throw Error(ErrorKind::kVocabTooSmall,
                "vocab_size must exceed the 256 byte-fallback pieces");
  }
  const std::size_t budget = options.sample_budget ? options.sample_budget : total_sentences;
  const auto sample = draw_sample(corpora, plan, budget, options.seed);

  // The model object is only used for its preprocessing (normalization and
  // marker insertion), which does not depend on the vocabulary.
  const SubwordModel shaper({Piece{std::string(kMetaSymbolUtf8), 0.0}}, options.normalization,
                            options.seed);

  std::map<std::u32string, double> words;
  for (const auto& sentence : sample) {
    const std::u32string units = shaper.preprocess(sentence);
    std::size_t start = 0;
    for (std::size_t i = 1; i <= units.size(); ++i) {
      if (i == units.size() || units[i] == kMetaSymbol) {
        words[units.substr(start, i - start)] += 1.0;
        start = i;
      }
    }
  }
  if (words.empty()) throw Error(ErrorKind::kEmptyCorpus, "sample contains only empty lines");

  std::map<char32_t, double> char_freq;
  double char_total = 0.0;
  for (const auto& [w, f] : words) {
    for (char32_t c : w) {
      if (unicode::is_raw_byte(c)) continue;
      char_freq[c] += f;
      char_total += f;
    }
  }
  std::vector<std::pair<char32_t, double>> by_freq(char_freq.begin(), char_freq.end());
  std::stable_sort(by_freq.begin(), by_freq.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::map<char32_t, double> required;
  double covered = 0.0;
  for (const auto& [c, f] : by_freq) {
    if (covered >= options.character_coverage * char_total && c != kMetaSymbol) continue;
    required.emplace(c, f);
    covered += f;
  }
  required.emplace(kMetaSymbol, char_freq.count(kMetaSymbol) ? char_freq[kMetaSymbol] : 1.0);

  const std::size_t target = static_cast<std::size_t>(options.vocab_size - kNumBytePieces);
  if (target < required.size()) {
    throw Error(ErrorKind::kVocabTooSmall,
                "vocab_size " + std::to_string(options.vocab_size) + " cannot hold " +
                    std::to_string(required.size()) + " characters plus " +
                    std::to_string(kNumBytePieces) + " byte pieces");
  }

  // Words are cut at characters left to byte fallback; pieces never span them.
  std::map<std::u32string, double> segment_freq;
  for (const auto& [w, f] : words) {
    std::size_t start = 0;
    for (std::size_t i = 0; i <= w.size(); ++i) {
      if (i == w.size() || !required.count(w[i])) {
        if (i > start) segment_freq[w.substr(start, i - start)] += f;
        start = i + 1;
      }
    }
  }
  std::vector<Segment> segments;
  segments.reserve(segment_freq.size());
  for (auto& [units, f] : segment_freq) segments.push_back({units, f});

  std::unordered_map<std::u32string, double, U32Hash> substrings;
  for (const Segment& seg : segments) {
    for (std::size_t i = 0; i < seg.units.size(); ++i) {
      const std::size_t max_len = std::min(options.max_piece_length, seg.units.size() - i);
      for (std::size_t len = 2; len <= max_len; ++len) {
        substrings[seg.units.substr(i, len)] += seg.freq;
      }
    }
  }
  std::vector<std::pair<std::u32string, double>> ranked(substrings.begin(), substrings.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    const double sa = a.second * static_cast<double>(a.first.size());
    const double sb = b.second * static_cast<double>(b.first.size());
    if (sa != sb) return sa > sb;
    return a.first < b.first;
  });
  // Substrings seen at least twice; singletons only fill a shortfall.
  const std::size_t cap = options.seed_vocab_multiplier * target;
  const std::size_t needed = target - required.size();
  std::vector<std::pair<std::u32string, double>> chosen;
  for (const auto& cand : ranked) {
    if (chosen.size() >= cap) break;
    if (cand.second >= 2.0) chosen.push_back(cand);
  }
  if (chosen.size() < needed) {
    for (const auto& cand : ranked) {
      if (chosen.size() >= needed) break;
      if (cand.second < 2.0) chosen.push_back(cand);
    }
  }

  std::vector<TrainPiece> pieces;
  double seed_total = 0.0;
  for (const auto& [c, f] : required) {
    pieces.push_back({std::u32string(1, c), f, true});
    seed_total += f;
  }
  for (const auto& [units, f] : chosen) {
    pieces.push_back({units, f, false});
    seed_total += f;
  }
  for (auto& p : pieces) p.log_prob = std::log(p.log_prob) - std::log(seed_total);

  for (;;) {
    for (int k = 0; k < options.em_subiterations; ++k) em_step(pieces, segments);
    if (pieces.size() <= target) break;
    const auto shrunk = static_cast<std::size_t>(
        std::floor(static_cast<double>(pieces.size()) * options.shrink_factor));
    prune(pieces, segments, std::max(target, std::min(shrunk, pieces.size() - 1)));
  }

  std::vector<Piece> out;
  out.reserve(pieces.size());
  for (const auto& p : pieces) out.push_back({unicode::encode(p.units), p.log_prob});
  std::sort(out.begin(), out.end(), [](const Piece& a, const Piece& b) {
    if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
    return a.text < b.text;
  });
  return SubwordModel(std::move(out), options.normalization, options.seed);
}

}  // namespace mtbench::tokenizer
