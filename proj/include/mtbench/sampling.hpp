#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace mtbench::tokenizer {

// Per-corpus sampling weights after temperature rescaling of the empirical
// shares: q_i = p_i^(1/T) / sum_j p_j^(1/T), p_i = n_i / sum_j n_j.
struct SamplingPlan {
  std::vector<double> weights;
  double temperature = 1.0;
  std::vector<std::size_t> sizes;
};

SamplingPlan temperature_resample(const std::vector<std::size_t>& sizes, double temperature);

// Portable uniform double in [0, 1) from a 64-bit engine output.
inline double unit_interval(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace mtbench::tokenizer
