#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "mtbench/analysis.hpp"
#include "mtbench/bleu.hpp"
#include "mtbench/error.hpp"
#include "mtbench/io.hpp"
#include "mtbench/spectral.hpp"
#include "test_support.hpp"

using namespace mtbench;
using namespace mtbench::analysis;

namespace {

std::vector<std::string> codes(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(fmt::format("l{:03d}", i));
  return out;
}

EvalMatrix planted(std::size_t blocks, std::size_t per_block, std::uint64_t seed,
                   std::vector<int>* truth) {
  const std::size_t n = blocks * per_block;
  EvalMatrix m(codes(n));
  std::mt19937_64 rng(seed);
  truth->clear();
  for (std::size_t i = 0; i < n; ++i) truth->push_back(static_cast<int>(i / per_block));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double noise = 2.0 * tokenizer::unit_interval(rng());
      m.set(i, j, (*truth)[i] == (*truth)[j] ? 30.0 + noise : 1.0 + noise);
    }
  }
  return m;
}

corpus::AlignedCorpus three_language_corpus() {
  std::vector<corpus::LineMeta> metas(4);
  for (std::size_t i = 0; i < 4; ++i) {
    metas[i].split = corpus::Split::kDevtest;
    metas[i].split_line = i;
    metas[i].article_id = "a";
    metas[i].domain = i < 2 ? corpus::Domain::kWikinews : corpus::Domain::kWikivoyage;
  }
  return corpus::AlignedCorpus(
      {"aaa", "bbb", "ccc"},
      {{"aaa", {"abc cab", "bca abc ab", "ca bc", "aa bb cc"}},
       {"bbb", {"bab cbc", "aab abb", "cca acb", "bac cba"}},
       {"ccc", {"dd ad", "abcd d", "bcc ccc", "aaa bbb"}}},
      metas);
}

}  // namespace

TEST(Matrix, TsvRoundTripAndValidation) {
  EvalMatrix m({"eng", "fra", "deu"});
  m.set(0, 1, 12.345);
  m.set(2, 0, 100);
  const std::string tsv = m.to_tsv();
  EXPECT_EQ(tsv, "\teng\tfra\tdeu\neng\t\t12.35\t\nfra\t\t\t\ndeu\t100.00\t\t\n");
  const auto back = EvalMatrix::parse_tsv(tsv);
  EXPECT_EQ(back.languages(), m.languages());
  EXPECT_DOUBLE_EQ(*back.at(0, 1), 12.35);
  EXPECT_FALSE(back.at(1, 0));
  EXPECT_THROW(EvalMatrix::parse_tsv("\ta\tb\na\t1\t2\nb\t\t\n"), Error);  // diagonal value
  EXPECT_THROW(EvalMatrix::parse_tsv("\ta\tb\na\t\tx\nb\t\t\n"), Error);
  EXPECT_THROW(m.set(1, 1, 3.0), Error);
}

TEST(EvaluateMatrix, IdentityHypothesesScoreHundred) {
  const auto c = three_language_corpus();
  const auto model = testutil::toy_model();
  std::map<Direction, std::vector<std::string>> hyps;
  for (const auto& s : c.languages()) {
    for (const auto& t : c.languages()) {
      if (s != t) hyps[{s, t}] = c.texts(t);
    }
  }
  const auto m = evaluate_matrix(c, hyps, model, 3);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      if (i != j) {
        EXPECT_EQ(*m.at(i, j), 100.0);
      }
    }
  }
}

TEST(EvaluateMatrix, CellsEqualStandaloneScoresAndMissingStayAbsent) {
  const auto c = three_language_corpus();
  const auto model = testutil::toy_model();
  std::map<Direction, std::vector<std::string>> hyps = {
      {{"aaa", "bbb"}, {"bab cb", "aab", "cca acb x", "bac"}},
      {{"ccc", "aaa"}, {"abc", "bca abc", "cab", "aa bb cc"}}};
  const auto m = evaluate_matrix(c, hyps, model);
  for (const auto& [dir, lines] : hyps) {
    const double oracle = metrics::score_lines(metrics::Metric::kSpBleu, metrics::Level::kCorpus,
                                               &model, lines, c.texts(dir.second))
                              .front()
                              .score;
    EXPECT_EQ(*m.at(m.index_of(dir.first), m.index_of(dir.second)), oracle);
  }
  EXPECT_FALSE(m.at(m.index_of("bbb"), m.index_of("ccc")));
  hyps[{"aaa", "ccc"}] = {"x"};
  EXPECT_THROW(evaluate_matrix(c, hyps, model), Error);
  hyps.erase({"aaa", "ccc"});
  hyps[{"aaa", "zzz"}] = {"a", "b", "c", "d"};
  EXPECT_THROW(evaluate_matrix(c, hyps, model), Error);
}

TEST(EvaluateSubsets, DomainSubsetMatchesDirectScore) {
  const auto c = three_language_corpus();
  const auto model = testutil::toy_model();
  std::map<Direction, std::vector<std::string>> hyps = {
      {{"aaa", "bbb"}, {"bab cb", "aab", "cca acb x", "bac"}}};
  const auto rows = evaluate_subsets(c, hyps, model, {{"wikinews", {0, 1}}, {"none", {}}});
  ASSERT_EQ(rows.size(), 2u);
  const double oracle =
      metrics::score_lines(metrics::Metric::kSpBleu, metrics::Level::kCorpus, &model,
                           {"bab cb", "aab"}, {"bab cbc", "aab abb"})
          .front()
          .score;
  EXPECT_EQ(*rows[0].avg_score, oracle);
  EXPECT_FALSE(rows[1].avg_score);
}

TEST(ResourceBin, Boundaries) {
  EXPECT_EQ(resource_bin(43'700), ResourceBin::kVeryLow);
  EXPECT_EQ(resource_bin(99'999), ResourceBin::kVeryLow);
  EXPECT_EQ(resource_bin(100'000), ResourceBin::kLow);
  EXPECT_EQ(resource_bin(999'999), ResourceBin::kLow);
  EXPECT_EQ(resource_bin(1'000'000), ResourceBin::kMedium);
  EXPECT_EQ(resource_bin(99'999'999), ResourceBin::kMedium);
  EXPECT_EQ(resource_bin(100'000'000), ResourceBin::kHigh);
  EXPECT_EQ(resource_bin(289'000'000), ResourceBin::kHigh);
}

TEST(Family, ElevenGroups) {
  for (int i = 0; i <= static_cast<int>(Family::kTurkic); ++i) {
    EXPECT_EQ(parse_family(to_string(static_cast<Family>(i))), static_cast<Family>(i));
  }
  EXPECT_EQ(static_cast<int>(Family::kTurkic) + 1, 11);
  const auto meta = parse_language_meta("code\tfamily\tbitext\tmono\nfra\tRomance\t289000000\t1\n");
  EXPECT_EQ(meta[0].family, Family::kRomance);
  EXPECT_THROW(parse_language_meta("code\tfamily\tbitext\tmono\nxx\tklingon\t1\t1\n"), Error);
}

TEST(GroupAverage, ConstantMatrix) {
  EvalMatrix m(codes(5));
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      if (i != j) m.set(i, j, 7.5);
    }
  }
  std::map<std::string, std::string> g;
  for (std::size_t i = 0; i < 5; ++i) g[m.languages()[i]] = i < 3 ? "A" : "B";
  const auto t = group_average(m, g, {"A", "B"});
  for (std::size_t a = 0; a < 2; ++a) {
    for (std::size_t b = 0; b < 2; ++b) EXPECT_DOUBLE_EQ(*t.at(a, b), 7.5);
  }
}

TEST(GroupAverage, HandComputedTwoGroups) {
  EvalMatrix m({"p", "q", "r", "s"});
  const double v[4][4] = {{0, 10, 20, 30}, {40, 0, 50, 60}, {70, 80, 0, 90}, {15, 25, 35, 0}};
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      if (i != j) m.set(i, j, v[i][j]);
    }
  }
  const auto t = group_average(m, {{"p", "G"}, {"q", "G"}, {"r", "H"}, {"s", "H"}}, {"G", "H"});
  EXPECT_DOUBLE_EQ(*t.at(0, 0), 25.0);                   // (10 + 40) / 2
  EXPECT_DOUBLE_EQ(*t.at(0, 1), 40.0);                   // (20 + 30 + 50 + 60) / 4
  EXPECT_DOUBLE_EQ(*t.at(1, 0), 47.5);                   // (70 + 80 + 15 + 25) / 4
  EXPECT_DOUBLE_EQ(*t.at(1, 1), 62.5);                   // (90 + 35) / 2
  EXPECT_DOUBLE_EQ(*t.row_avg[0], 32.5);
  EXPECT_DOUBLE_EQ(*t.col_avg[1], 51.25);
  EXPECT_DOUBLE_EQ(*t.overall, (25.0 + 40.0 + 47.5 + 62.5) / 4);
  EXPECT_THROW(group_average(m, {{"p", "G"}}, {"G"}), Error);
}

TEST(GroupAverage, SingletonGroupWithinCellAbsent) {
  EvalMatrix m({"p", "q"});
  m.set(0, 1, 5);
  m.set(1, 0, 6);
  const auto t = group_average(m, {{"p", "G"}, {"q", "H"}}, {"G", "H"});
  EXPECT_FALSE(t.at(0, 0));
  EXPECT_FALSE(t.at(1, 1));
}

TEST(GroupAverage, IdentityGroupingAndConservation) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 3 + rng() % 8;
    EvalMatrix m(codes(n));
    double sum = 0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j || rng() % 7 == 0) continue;
        const double x = 100.0 * tokenizer::unit_interval(rng());
        m.set(i, j, x);
        sum += x;
        ++count;
      }
    }
    std::map<std::string, std::string> self;
    for (const auto& l : m.languages()) self[l] = l;
    const auto id = group_average(m, self, m.languages());
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        EXPECT_EQ(id.at(i, j), m.at(i, j));
      }
    }
    std::map<std::string, std::string> grouped;
    for (std::size_t i = 0; i < n; ++i) grouped[m.languages()[i]] = std::to_string(i % 3);
    const auto t = group_average(m, grouped, {"0", "1", "2"});
    double weighted = 0;
    std::size_t pairs = 0;
    for (std::size_t c = 0; c < t.cells.size(); ++c) {
      if (t.cells[c]) {
        weighted += *t.cells[c] * static_cast<double>(t.pair_counts[c]);
        pairs += t.pair_counts[c];
      }
    }
    EXPECT_EQ(pairs, count);
    EXPECT_NEAR(weighted / static_cast<double>(pairs), sum / static_cast<double>(count), 1e-9);
  }
}

TEST(GroupAverage, ByMetadata) {
  EvalMatrix m({"asm", "fra", "deu"});
  m.set(0, 1, 2);
  m.set(1, 0, 4);
  m.set(1, 2, 30);
  m.set(2, 1, 32);
  m.set(0, 2, 3);
  m.set(2, 0, 5);
  const auto meta = parse_language_meta(
      "code\tfamily\tbitext\tmono\nasm\tindo-aryan\t43700\t1\nfra\tromance\t289000000\t1\n"
      "deu\tgermanic\t216000000\t1\n");
  const auto bins = group_average(m, meta, Grouping::kResourceBin);
  EXPECT_EQ(bins.groups, (std::vector<std::string>{"very_low", "high"}));
  EXPECT_DOUBLE_EQ(*bins.at(1, 1), 31.0);
  const auto fam = group_average(m, meta, Grouping::kFamily);
  EXPECT_EQ(fam.groups.size(), 3u);
}

TEST(Pivot, Fractions) {
  EvalMatrix a(codes(4));
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      if (i != j) a.set(i, j, 10.0 * static_cast<double>(i + j));
    }
  }
  const auto same = pivot_compare(a, a, "l000");
  EXPECT_EQ(same.compared, 6u);
  EXPECT_EQ(same.fraction_direct_wins, 0.0);
  EvalMatrix b = a;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      if (i != j) b.set(i, j, *a.at(i, j) - 1.0);
    }
  }
  EXPECT_EQ(pivot_compare(a, b, "l000").fraction_direct_wins, 1.0);
  const auto swapped = pivot_compare(b, a, "l000");
  EXPECT_EQ(swapped.fraction_direct_wins, 0.0);
  EXPECT_EQ(swapped.fraction_pivot_wins, 1.0);
  EXPECT_THROW(pivot_compare(a, EvalMatrix(codes(3)), "l000"), Error);
  EXPECT_THROW(pivot_compare(a, b, "eng"), Error);
}

TEST(Pivot, Antisymmetry) {
  std::mt19937_64 rng(4);
  EvalMatrix a(codes(6)), b(codes(6));
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 6; ++j) {
      if (i == j) continue;
      a.set(i, j, static_cast<double>(rng() % 10));
      b.set(i, j, static_cast<double>(rng() % 10));
    }
  }
  const auto ab = pivot_compare(a, b, "l002");
  const auto ba = pivot_compare(b, a, "l002");
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 6; ++j) {
      if (auto d = ab.delta.at(i, j)) {
        EXPECT_EQ(*d, -*ba.delta.at(i, j));
      }
    }
  }
  EXPECT_EQ(ab.fraction_direct_wins, ba.fraction_pivot_wins);
}

TEST(Spectral, TwoPlantedBlocks) {
  std::vector<int> truth;
  const auto m = planted(2, 8, 1, &truth);
  const auto r = spectral_cluster(m, {2, 7});
  EXPECT_EQ(adjusted_rand_index(r.assignment, truth), 1.0);
  EXPECT_EQ(r.cluster_sizes(), (std::vector<std::size_t>{8, 8}));
}

TEST(Spectral, EightPlantedBlocksScalingAndPermutation) {
  std::vector<int> truth;
  const auto m = planted(8, 8, 2, &truth);
  const auto r = spectral_cluster(m, {8, 11});
  EXPECT_GE(adjusted_rand_index(r.assignment, truth), 0.99);
  const auto sizes = r.cluster_sizes();
  EXPECT_EQ(std::accumulate(sizes.begin(), sizes.end(), std::size_t{0}), 64u);

  EvalMatrix scaled(m.languages());
  for (std::size_t i = 0; i < 64; ++i) {
    for (std::size_t j = 0; j < 64; ++j) {
      if (i != j) scaled.set(i, j, *m.at(i, j) * 0.37);
    }
  }
  EXPECT_EQ(spectral_cluster(scaled, {8, 11}).assignment, r.assignment);

  std::vector<std::size_t> perm(64);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(5);
  std::shuffle(perm.begin(), perm.end(), rng);
  const auto permuted = reorder(m, perm);
  const auto rp = spectral_cluster(permuted, {8, 11});
  for (std::size_t i = 0; i < 64; ++i) EXPECT_EQ(rp.assignment[i], r.assignment[perm[i]]);
}

TEST(Spectral, DeterministicOnStructurelessInput) {
  EvalMatrix m(codes(6));
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 6; ++j) {
      if (i != j) m.set(i, j, 20.0);
    }
  }
  const auto a = spectral_cluster(m, {2, 3});
  const auto b = spectral_cluster(m, {2, 3});
  EXPECT_EQ(a.assignment, b.assignment);
  EXPECT_EQ(a.order, b.order);
}

TEST(Spectral, OrderGroupsClustersContiguously) {
  std::vector<int> truth;
  const auto m = planted(3, 4, 9, &truth);
  const auto r = spectral_cluster(m, {3, 1});
  for (std::size_t i = 1; i < r.order.size(); ++i) {
    EXPECT_LE(r.assignment[r.order[i - 1]], r.assignment[r.order[i]]);
  }
  EXPECT_EQ(r.assignment[0], 0);
}

TEST(Spectral, DegenerateInput) {
  EvalMatrix m(codes(4));
  EXPECT_THROW(spectral_cluster(m, {2, 0}), Error);  // absent cells
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      if (i != j) m.set(i, j, 5.0);
    }
  }
  m.set(0, 1, -1.0);
  try {
    spectral_cluster(m, {2, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDegenerateMatrix);
  }
  m.set(0, 1, 5.0);
  EXPECT_THROW(spectral_cluster(m, {1, 0}), Error);
  EXPECT_THROW(spectral_cluster(m, {5, 0}), Error);
}

TEST(AdjustedRand, PairCountingOracle) {
  auto oracle = [](const std::vector<int>& a, const std::vector<int>& b) {
    double agree_same = 0, pairs = 0, same_a = 0, same_b = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (std::size_t j = i + 1; j < a.size(); ++j) {
        ++pairs;
        same_a += a[i] == a[j];
        same_b += b[i] == b[j];
        agree_same += a[i] == a[j] && b[i] == b[j];
      }
    }
    const double expected = same_a * same_b / pairs;
    const double max = (same_a + same_b) / 2;
    return (agree_same - expected) / (max - expected);
  };
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 4 + rng() % 20;
    std::vector<int> a(n), b(n);
    for (auto& x : a) x = static_cast<int>(rng() % 4);
    for (auto& x : b) x = static_cast<int>(rng() % 3);
    const double o = oracle(a, b);
    if (!std::isfinite(o)) continue;
    EXPECT_NEAR(adjusted_rand_index(a, b), o, 1e-12);
  }
  const std::vector<int> x = {0, 0, 1, 1};
  const std::vector<int> relabeled = {5, 5, 2, 2};
  EXPECT_EQ(adjusted_rand_index(x, relabeled), 1.0);
}
