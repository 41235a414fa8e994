#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mtbench/analysis.hpp"

namespace mtbench::analysis {

struct ClusterOptions {
  int k = 8;
  std::uint64_t seed = 0;
  int restarts = 50;
  int max_iterations = 300;
};

struct ClusterResult {
  // Per language in the input order. Labels are canonical: cluster 0 holds
  // the first language (by code for matrices, by index for raw affinities),
  // cluster 1 the first language not in cluster 0, and so on.
  std::vector<int> assignment;
  // Language indices sorted by (cluster, original index).
  std::vector<std::size_t> order;
  double inertia = 0.0;

  std::vector<std::size_t> cluster_sizes() const;
};

// Normalized-Laplacian spectral clustering of a symmetric, non-negative
// n x n affinity (row-major). Throws DegenerateMatrix or InvalidArgument.
ClusterResult spectral_cluster_affinity(std::span<const double> affinity, std::size_t n,
                                        const ClusterOptions& options);

// Affinity = (M + M^T) / 2 with each diagonal entry set to its row maximum.
// Throws DegenerateMatrix on absent, negative or non-finite cells.
std::vector<double> matrix_affinity(const EvalMatrix& matrix);

ClusterResult spectral_cluster(const EvalMatrix& matrix, const ClusterOptions& options);

// Rows and columns permuted into cluster order.
EvalMatrix reorder(const EvalMatrix& matrix, const std::vector<std::size_t>& order);

std::string assignment_tsv(const EvalMatrix& matrix, const ClusterResult& result);

// Hubert-Arabie adjusted Rand index. 1.0 when both partitions are trivial
// and identical. Throws LengthMismatch.
double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

}  // namespace mtbench::analysis
