#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mtbench/sampling.hpp"
#include "mtbench/unigram_model.hpp"

namespace mtbench::tokenizer {

struct TrainerOptions {
  // Total vocabulary including the 256 byte pieces.
  int vocab_size = 8000;
  std::uint64_t seed = 0;
  // Sentences drawn with replacement; 0 means the sum of corpus sizes.
  std::size_t sample_budget = 0;
  double character_coverage = 0.9995;
  std::size_t max_piece_length = 8;
  std::size_t seed_vocab_multiplier = 20;
  int em_subiterations = 2;
  double shrink_factor = 0.8;
  Normalization normalization = Normalization::kIdentity;
};

// Draws the training sample: corpus i with probability plan.weights[i], then
// a uniform sentence of that corpus. Deterministic in options.seed.
std::vector<std::string> draw_sample(const std::vector<std::vector<std::string>>& corpora,
                                     const SamplingPlan& plan, std::size_t budget,
                                     std::uint64_t seed);

// Unigram LM trained by EM with iterative likelihood-loss pruning.
// Throws EmptyCorpus or VocabTooSmall. The result has exactly
// vocab_size - 256 pieces unless the sample admits fewer distinct
// candidate substrings.
SubwordModel train_unigram(const std::vector<std::vector<std::string>>& corpora,
                           const SamplingPlan& plan, const TrainerOptions& options);

}  // namespace mtbench::tokenizer
