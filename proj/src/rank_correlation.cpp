#include "mtbench/rank_correlation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "mtbench/error.hpp"

namespace mtbench::metrics {
namespace {

void check_pair(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::kLengthMismatch, "score vectors have lengths " +
                                                std::to_string(a.size()) + " and " +
                                                std::to_string(b.size()));
  }
  if (a.size() < 2) throw Error(ErrorKind::kTooFew, "need at least two systems");
}

// Number of tied pairs among runs of equal values in a sorted sequence.
template <typename It, typename Eq>
std::uint64_t tied_pairs(It first, It last, Eq eq) {
  std::uint64_t pairs = 0;
  while (first != last) {
    It run = first;
    while (run != last && eq(*run, *first)) ++run;
    const auto t = static_cast<std::uint64_t>(run - first);
    pairs += t * (t - 1) / 2;
    first = run;
  }
  return pairs;
}

// Merge sort on b counting inversions (pairs out of order).
std::uint64_t sort_count_swaps(std::vector<double>& v, std::vector<double>& buf, std::size_t lo,
                               std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::uint64_t swaps = sort_count_swaps(v, buf, lo, mid) + sort_count_swaps(v, buf, mid, hi);
  std::size_t i = lo;
  std::size_t j = mid;
  std::size_t k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += mid - i;
      buf[k++] = v[j++];
    } else {
      buf[k++] = v[i++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo),
            buf.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return v[x] < v[y]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && v[order[j]] == v[order[i]]) ++j;
    const double avg = (static_cast<double>(i + j - 1) / 2.0) + 1.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = avg;
    i = j;
  }
  return ranks;
}

}  // namespace

// Knight's O(n log n) tau-b.
double kendall_tau(std::span<const double> a, std::span<const double> b) {
  check_pair(a, b);
  const std::size_t n = a.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto x, auto y) {
    return a[x] != a[y] ? a[x] < a[y] : b[x] < b[y];
  });
  std::vector<double> sa(n);
  std::vector<double> sb(n);
  for (std::size_t i = 0; i < n; ++i) {
    sa[i] = a[order[i]];
    sb[i] = b[order[i]];
  }
  const auto n0 = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  const std::uint64_t ties_a = tied_pairs(sa.begin(), sa.end(), std::equal_to<>());
  std::vector<std::pair<double, double>> joint(n);
  for (std::size_t i = 0; i < n; ++i) joint[i] = {sa[i], sb[i]};
  const std::uint64_t ties_joint = tied_pairs(joint.begin(), joint.end(), std::equal_to<>());

  std::vector<double> buf(n);
  const std::uint64_t swaps = sort_count_swaps(sb, buf, 0, n);
  const std::uint64_t ties_b = tied_pairs(sb.begin(), sb.end(), std::equal_to<>());

  const double denom_a = static_cast<double>(n0 - ties_a);
  const double denom_b = static_cast<double>(n0 - ties_b);
  if (denom_a == 0.0 || denom_b == 0.0) return std::numeric_limits<double>::quiet_NaN();
  // concordant - discordant over pairs untied in both coordinates
  const double numer = static_cast<double>(n0) - static_cast<double>(ties_a) -
                       static_cast<double>(ties_b) + static_cast<double>(ties_joint) -
                       2.0 * static_cast<double>(swaps);
  return numer / std::sqrt(denom_a * denom_b);
}

double spearman(std::span<const double> a, std::span<const double> b) {
  check_pair(a, b);
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  const double mean = (n + 1.0) / 2.0;
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    const double da = ra[i] - mean;
    const double db = rb[i] - mean;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sab / std::sqrt(saa * sbb);
}

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorKind::kEmptyInput, "empty score vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

bool same_best_model(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::kLengthMismatch, "score vectors have different lengths");
  }
  return argmax(a) == argmax(b);
}

RankComparison compare_rankings(std::span<const double> a, std::span<const double> b) {
  RankComparison out;
  out.tau = kendall_tau(a, b);
  out.rho = spearman(a, b);
  out.same_best = same_best_model(a, b);
  out.n_systems = a.size();
  return out;
}

}  // namespace mtbench::metrics
