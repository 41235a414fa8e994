#pragma once

#include <cstddef>
#include <span>

namespace mtbench::metrics {

// Kendall tau-b. Throws LengthMismatch or TooFew (n < 2). Returns NaN when
// either vector is constant.
double kendall_tau(std::span<const double> a, std::span<const double> b);

// Pearson correlation of average ranks. Same errors and NaN rule as above.
double spearman(std::span<const double> a, std::span<const double> b);

// Argmax with ties resolved to the lowest index.
std::size_t argmax(std::span<const double> values);

// True iff both vectors have the same argmax. Throws LengthMismatch or
// EmptyInput.
bool same_best_model(std::span<const double> a, std::span<const double> b);

struct RankComparison {
  double tau = 0.0;
  double rho = 0.0;
  bool same_best = false;
  std::size_t n_systems = 0;
};

RankComparison compare_rankings(std::span<const double> a, std::span<const double> b);

}  // namespace mtbench::metrics
