#include "mtbench/spectral.hpp"

#include <Eigen/Dense>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include "mtbench/error.hpp"
#include "mtbench/sampling.hpp"

namespace mtbench::analysis {

namespace {

using Eigen::MatrixXd;

double squared_distance(const MatrixXd& points, Eigen::Index row, const Eigen::VectorXd& c) {
  return (points.row(row).transpose() - c).squaredNorm();
}

struct KMeansRun {
  std::vector<int> labels;
  double inertia = std::numeric_limits<double>::infinity();
};

KMeansRun kmeans_once(const MatrixXd& points, int k, std::mt19937_64& rng, int max_iterations) {
  const Eigen::Index n = points.rows();
  std::vector<Eigen::VectorXd> centers;
  centers.push_back(points.row(static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(n)))
                        .transpose());
  std::vector<double> nearest(static_cast<std::size_t>(n));
  while (static_cast<int>(centers.size()) < k) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : centers) best = std::min(best, squared_distance(points, i, c));
      nearest[static_cast<std::size_t>(i)] = best;
      total += best;
    }
    Eigen::Index pick = 0;
    if (total > 0.0) {
      const double target = tokenizer::unit_interval(rng()) * total;
      double acc = 0.0;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += nearest[static_cast<std::size_t>(i)];
        if (acc > target) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(n));
    }
    centers.push_back(points.row(pick).transpose());
  }

  KMeansRun run;
  run.labels.assign(static_cast<std::size_t>(n), -1);
  for (int iter = 0; iter < max_iterations; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = squared_distance(points, i, centers[static_cast<std::size_t>(c)]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (run.labels[static_cast<std::size_t>(i)] != best) {
        run.labels[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    if (!changed) break;
    std::vector<Eigen::VectorXd> sums(static_cast<std::size_t>(k),
                                      Eigen::VectorXd::Zero(points.cols()));
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(run.labels[static_cast<std::size_t>(i)]);
      sums[c] += points.row(i).transpose();
      ++counts[c];
    }
    for (std::size_t c = 0; c < sums.size(); ++c) {
      if (counts[c] > 0) {
        centers[c] = sums[c] / counts[c];
        continue;
      }
      // Empty cluster: move its center to the point farthest from its own.
      Eigen::Index far = 0;
      double far_d = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double d = squared_distance(
            points, i, centers[static_cast<std::size_t>(run.labels[static_cast<std::size_t>(i)])]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      centers[c] = points.row(far).transpose();
    }
  }
  run.inertia = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    run.inertia += squared_distance(
        points, i, centers[static_cast<std::size_t>(run.labels[static_cast<std::size_t>(i)])]);
  }
  return run;
}

// Relabels so clusters are numbered by first appearance along `rank`.
std::vector<int> canonical_labels(const std::vector<int>& labels,
                                  const std::vector<std::size_t>& rank) {
  std::map<int, int> mapping;
  for (std::size_t i : rank) mapping.try_emplace(labels[i], static_cast<int>(mapping.size()));
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) out[i] = mapping.at(labels[i]);
  return out;
}

std::vector<std::size_t> cluster_order(const std::vector<int>& labels) {
  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return labels[a] < labels[b]; });
  return order;
}

}  // namespace

std::vector<std::size_t> ClusterResult::cluster_sizes() const {
  std::vector<std::size_t> sizes;
  for (int label : assignment) {
    if (static_cast<std::size_t>(label) >= sizes.size()) sizes.resize(label + 1, 0);
    ++sizes[static_cast<std::size_t>(label)];
  }
  return sizes;
}

ClusterResult spectral_cluster_affinity(std::span<const double> affinity, std::size_t n,
                                        const ClusterOptions& options) {
  if (affinity.size() != n * n) {
    throw Error(ErrorKind::kShapeMismatch, "affinity is not n x n");
  }
  if (options.k < 2 || static_cast<std::size_t>(options.k) > n) {
    throw Error(ErrorKind::kInvalidArgument,
                fmt::format("k must be in [2, {}], got {}", n, options.k));
  }
  if (options.restarts < 1) throw Error(ErrorKind::kInvalidArgument, "restarts must be >= 1");
  const auto N = static_cast<Eigen::Index>(n);
  MatrixXd a(N, N);
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index j = 0; j < N; ++j) {
      const double v = affinity[static_cast<std::size_t>(i * N + j)];
      if (!std::isfinite(v) || v < 0.0) {
        throw Error(ErrorKind::kDegenerateMatrix,
                    fmt::format("affinity ({}, {}) = {} is negative or non-finite", i, j, v));
      }
      a(i, j) = v;
    }
  }
  a = (0.5 * (a + a.transpose())).eval();
  Eigen::VectorXd inv_sqrt_degree(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    const double d = a.row(i).sum();
    if (d <= 0.0) {
      throw Error(ErrorKind::kDegenerateMatrix, fmt::format("row {} has zero degree", i));
    }
    inv_sqrt_degree(i) = 1.0 / std::sqrt(d);
  }
  const MatrixXd laplacian = MatrixXd::Identity(N, N) -
                             inv_sqrt_degree.asDiagonal() * a * inv_sqrt_degree.asDiagonal();
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(laplacian);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::kDegenerateMatrix, "eigendecomposition did not converge");
  }
  MatrixXd embedding = solver.eigenvectors().leftCols(options.k);
  for (Eigen::Index i = 0; i < N; ++i) {
    const double norm = embedding.row(i).norm();
    if (norm > 0.0) embedding.row(i) /= norm;
  }

  KMeansRun best;
  for (int r = 0; r < options.restarts; ++r) {
    std::mt19937_64 rng(options.seed + static_cast<std::uint64_t>(r));
    KMeansRun run = kmeans_once(embedding, options.k, rng, options.max_iterations);
    if (run.inertia < best.inertia - 1e-12) best = std::move(run);
  }

  std::vector<std::size_t> rank(n);
  std::iota(rank.begin(), rank.end(), 0);
  ClusterResult result;
  result.assignment = canonical_labels(best.labels, rank);
  result.order = cluster_order(result.assignment);
  result.inertia = best.inertia;
  return result;
}

std::vector<double> matrix_affinity(const EvalMatrix& matrix) {
  const std::size_t n = matrix.size();
  std::vector<double> a(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const auto v = matrix.at(i, j);
      if (!v) {
        throw Error(ErrorKind::kDegenerateMatrix,
                    "direction " + matrix.languages()[i] + "-" + matrix.languages()[j] +
                        " is absent");
      }
      if (!std::isfinite(*v) || *v < 0.0) {
        throw Error(ErrorKind::kDegenerateMatrix,
                    fmt::format("direction {}-{} = {} is negative or non-finite",
                                matrix.languages()[i], matrix.languages()[j], *v));
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) a[i * n + j] = 0.5 * (*matrix.at(i, j) + *matrix.at(j, i));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    double row_max = 0.0;
    for (std::size_t j = 0; j < n; ++j) row_max = std::max(row_max, a[i * n + j]);
    a[i * n + i] = row_max;
  }
  return a;
}

ClusterResult spectral_cluster(const EvalMatrix& matrix, const ClusterOptions& options) {
  const std::size_t n = matrix.size();
  // Cluster in code order so the partition does not depend on input order.
  std::vector<std::size_t> by_code(n);
  std::iota(by_code.begin(), by_code.end(), 0);
  std::sort(by_code.begin(), by_code.end(), [&](std::size_t a, std::size_t b) {
    return matrix.languages()[a] < matrix.languages()[b];
  });
  const std::vector<double> affinity = matrix_affinity(matrix);
  std::vector<double> sorted(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) sorted[i * n + j] = affinity[by_code[i] * n + by_code[j]];
  }
  const ClusterResult inner = spectral_cluster_affinity(sorted, n, options);
  ClusterResult result;
  result.inertia = inner.inertia;
  result.assignment.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) result.assignment[by_code[i]] = inner.assignment[i];
  result.order = cluster_order(result.assignment);
  return result;
}

EvalMatrix reorder(const EvalMatrix& matrix, const std::vector<std::size_t>& order) {
  if (order.size() != matrix.size()) {
    throw Error(ErrorKind::kShapeMismatch, "order length differs from matrix size");
  }
  std::vector<std::string> langs;
  for (std::size_t i : order) langs.push_back(matrix.languages().at(i));
  EvalMatrix out(langs);
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (std::size_t j = 0; j < order.size(); ++j) {
      if (auto v = matrix.at(order[i], order[j])) out.set(i, j, *v);
    }
  }
  return out;
}

std::string assignment_tsv(const EvalMatrix& matrix, const ClusterResult& result) {
  std::string out = "language\tcluster\n";
  for (std::size_t i : result.order) {
    out += fmt::format("{}\t{}\n", matrix.languages()[i], result.assignment[i]);
  }
  return out;
}

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::kLengthMismatch, "partitions have different lengths");
  }
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> rows;
  std::map<int, double> cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++joint[{a[i], b[i]}];
    ++rows[a[i]];
    ++cols[b[i]];
  }
  auto pairs = [](double x) { return x * (x - 1.0) / 2.0; };
  double index = 0.0;
  for (const auto& [key, v] : joint) index += pairs(v);
  double sum_rows = 0.0;
  for (const auto& [key, v] : rows) sum_rows += pairs(v);
  double sum_cols = 0.0;
  for (const auto& [key, v] : cols) sum_cols += pairs(v);
  const double total = pairs(static_cast<double>(a.size()));
  const double expected = total > 0.0 ? sum_rows * sum_cols / total : 0.0;
  const double max_index = 0.5 * (sum_rows + sum_cols);
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

}  // namespace mtbench::analysis
