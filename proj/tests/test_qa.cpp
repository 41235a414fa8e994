#include <gtest/gtest.h>

#include <random>

#include "mtbench/char_lm.hpp"
#include "mtbench/error.hpp"
#include "mtbench/langid.hpp"
#include "mtbench/qa_checks.hpp"
#include "mtbench/unicode.hpp"
#include "test_support.hpp"

using namespace mtbench;
using namespace mtbench::qa;

namespace {

std::vector<std::string> sentences(const std::vector<std::string>& vocab, int n,
                                   std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) {
    std::string s;
    for (std::size_t w = 0, k = 6 + rng() % 6; w < k; ++w) {
      s += (w ? " " : "") + vocab[rng() % vocab.size()];
    }
    out.push_back(s);
  }
  return out;
}

const std::vector<std::string> kEnglish = {
    "the", "people", "of", "this", "city", "walked", "along", "river", "during", "summer",
    "evening", "while", "children", "played", "near", "water", "and", "birds", "were", "singing"};
const std::vector<std::string> kRussian = {
    "люди", "этого", "города", "гуляли", "вдоль", "реки", "летним", "вечером", "пока",
    "дети", "играли", "у", "воды", "и", "птицы", "пели"};
const std::vector<std::string> kGerman = {
    "die", "leute", "dieser", "stadt", "gingen", "entlang", "des", "flusses", "am",
    "abend", "während", "kinder", "spielten", "wasser", "und", "vögel", "sangen"};

}  // namespace

TEST(EngineCopy, PublishedRuleIsStrict) {
  const CheckConfig cfg;
  EXPECT_TRUE(engine_copy_rule(60, 30, cfg));
  EXPECT_FALSE(engine_copy_rule(60, 45, cfg));
  EXPECT_FALSE(engine_copy_rule(50.0, std::nullopt, cfg));
  EXPECT_TRUE(engine_copy_rule(50.01, std::nullopt, cfg));
  EXPECT_FALSE(engine_copy_rule(70.0, 50.0, cfg));  // margin exactly 20
  EXPECT_TRUE(engine_copy_rule(70.0, 49.99, cfg));
  EXPECT_FALSE(engine_copy_rule(50.0, 0.0, cfg));
}

TEST(EngineCopy, SymmetricExtension) {
  CheckConfig cfg;
  EXPECT_TRUE(engine_copy_decision(30, 60, cfg));
  cfg.symmetric_engine_check = false;
  EXPECT_FALSE(engine_copy_decision(30, 60, cfg));
}

TEST(EngineCopy, MonotoneInScoreA) {
  const CheckConfig cfg;
  for (double b = 0; b <= 100; b += 2.5) {
    bool flagged = false;
    for (double a = 0; a <= 100; a += 0.25) {
      const bool now = engine_copy_rule(a, b, cfg);
      EXPECT_FALSE(flagged && !now) << a << " " << b;
      flagged = now;
    }
  }
}

TEST(EngineCopy, OnTextUsesSentenceSpBleu) {
  const auto model = testutil::toy_model();
  const CheckConfig cfg;
  const std::string x = "abc cab bca abca";
  const auto r = check_engine_copy(x, x, std::string_view("dd dd dd"), model, cfg);
  EXPECT_TRUE(r.flagged);
  EXPECT_EQ(r.score_a, 100.0);
  EXPECT_THROW(check_engine_copy(x, std::nullopt, std::nullopt, model, cfg), Error);
}

TEST(CorpusGate, FractionBoundary) {
  const CheckConfig cfg;
  EXPECT_EQ(corpus_gate(0, 3001, cfg), Verdict::kPass);
  EXPECT_EQ(corpus_gate(300, 3001, cfg), Verdict::kPass);
  EXPECT_EQ(corpus_gate(301, 3001, cfg), Verdict::kRetranslate);
  EXPECT_EQ(corpus_gate(3001, 3001, cfg), Verdict::kRetranslate);
  EXPECT_EQ(corpus_gate(10, 100, cfg), Verdict::kPass);
  EXPECT_THROW(corpus_gate(std::vector<bool>{}, cfg), Error);
  std::vector<bool> flags(50, false);
  Verdict prev = corpus_gate(flags, cfg);
  for (int i = 0; i < 30; ++i) {
    flags.push_back(true);
    const Verdict v = corpus_gate(flags, cfg);
    EXPECT_FALSE(prev == Verdict::kRetranslate && v == Verdict::kPass);
    prev = v;
  }
}

TEST(SourceCopy, SimilarityBoundary) {
  const CheckConfig cfg;
  EXPECT_TRUE(check_source_copy("Hello there", "Hello there", cfg));
  EXPECT_FALSE(check_source_copy("abcdef", "uvwxyz", cfg));
  // One substitution in ten characters: similarity exactly 0.9.
  EXPECT_DOUBLE_EQ(edit_similarity("abcdefghij", "abcdefghiX"), 0.9);
  EXPECT_TRUE(check_source_copy("abcdefghij", "abcdefghiX", cfg));
  EXPECT_FALSE(check_source_copy("abcdefghij", "abcdefghXY", cfg));
  EXPECT_TRUE(check_source_copy("Hello   There", "hello there", cfg));
}

TEST(LengthRatio, ClosedBounds) {
  const CheckConfig cfg;
  EXPECT_FALSE(check_length_ratio("abcd", "wxyz", cfg));
  EXPECT_TRUE(check_length_ratio(std::string(30, 'a'), std::string(10, 'b'), cfg));
  EXPECT_FALSE(check_length_ratio(std::string(20, 'a'), std::string(10, 'b'), cfg));
  EXPECT_FALSE(check_length_ratio(std::string(10, 'a'), std::string(20, 'b'), cfg));
  EXPECT_TRUE(check_length_ratio(std::string(10, 'a'), std::string(21, 'b'), cfg));
  EXPECT_FALSE(check_length_ratio("日本語です", "にほんご", cfg));  // scalars, not bytes
  EXPECT_THROW(check_length_ratio("", "x", cfg), Error);
}

TEST(Fluency, InDistributionPassesRandomFails) {
  const auto train = sentences(kEnglish, 400, 1);
  CharLm lm;
  EXPECT_THROW(check_fluency(lm, "x", CheckConfig{}), Error);
  lm.train(train);
  const CheckConfig cfg;
  EXPECT_FALSE(check_fluency(lm, train[7], cfg));
  std::mt19937_64 rng(3);
  std::string noise;
  for (int i = 0; i < 100; ++i) unicode::append_utf8(noise, 0x21 + static_cast<char32_t>(rng() % 0x5E));
  EXPECT_GT(lm.nll_per_char(noise),
            lm.calibration_mean() + cfg.fluency_z_max * lm.calibration_stddev());
  EXPECT_TRUE(check_fluency(lm, noise, cfg));
  EXPECT_TRUE(check_fluency(lm, "", cfg));
}

TEST(LanguageId, ProfilesAndSkipRule) {
  LangProfileSet profiles;
  const auto en = sentences(kEnglish, 200, 4);
  profiles.add_language("eng", en);
  profiles.add_language("rus", sentences(kRussian, 200, 5));
  profiles.add_language("deu", sentences(kGerman, 200, 6));
  const CheckConfig cfg;
  EXPECT_FALSE(check_language_id(profiles, en[3], "eng", cfg));
  EXPECT_EQ(profiles.predict(en[3]), "eng");
  EXPECT_TRUE(check_language_id(profiles, "the children played near the river water", "rus", cfg));
  EXPECT_FALSE(check_language_id(profiles, "the", "rus", cfg));
  EXPECT_THROW(check_language_id(profiles, en[0], "fra", cfg), Error);
}

TEST(Histogram, Buckets) {
  EXPECT_EQ(score_histogram({0, 0, 0})[0], 3u);
  const auto h = score_histogram({5, 15, 95, 100});
  ASSERT_EQ(h.size(), 10u);
  EXPECT_EQ(h[0], 1u);
  EXPECT_EQ(h[1], 1u);
  EXPECT_EQ(h[9], 2u);
  EXPECT_THROW(score_histogram({100.5}), Error);
  EXPECT_THROW(score_histogram({-1}), Error);

  std::mt19937_64 rng(8);
  std::vector<double> scores;
  for (int i = 0; i < 1000; ++i) scores.push_back(100.0 * tokenizer::unit_interval(rng()));
  std::vector<std::size_t> oracle(10, 0);
  for (double s : scores) ++oracle[std::min<std::size_t>(9, static_cast<std::size_t>(s / 10))];
  EXPECT_EQ(score_histogram(scores), oracle);
}

TEST(Config, ParseValidate) {
  const auto cfg = CheckConfig::parse("# comment\ncopy_threshold = 40\nsymmetric_engine_check=false\n");
  EXPECT_EQ(cfg.copy_threshold, 40.0);
  EXPECT_FALSE(cfg.symmetric_engine_check);
  EXPECT_THROW(CheckConfig::parse("nonsense = 1"), Error);
  CheckConfig bad;
  bad.corpus_gate_fraction = 1.0;
  EXPECT_THROW(bad.validate(), Error);
  bad = {};
  bad.length_ratio_min = 3.0;
  EXPECT_THROW(bad.validate(), Error);
}

TEST(RunQa, ConcatenationEqualsMergedParts) {
  const auto model = testutil::toy_model();
  std::mt19937_64 rng(10);
  QaInputs all;
  for (int i = 0; i < 40; ++i) {
    const std::string src = testutil::random_text(rng, 20) + "s";
    const std::string eng_a = testutil::random_text(rng, 20) + "a";
    all.sources.push_back(src);
    all.engine_a.push_back(eng_a);
    all.hypotheses.push_back(i % 3 == 0 ? eng_a : testutil::random_text(rng, 20) + "h");
  }
  QaResources res;
  res.model = &model;
  const CheckConfig cfg;
  const auto whole = run_qa(all, res, cfg);
  auto part = [&](std::size_t lo, std::size_t hi) {
    QaInputs in;
    for (std::size_t i = lo; i < hi; ++i) {
      in.sources.push_back(all.sources[i]);
      in.hypotheses.push_back(all.hypotheses[i]);
      in.engine_a.push_back(all.engine_a[i]);
    }
    return run_qa(in, res, cfg);
  };
  const auto merged = merge_reports({part(0, 13), part(13, 40)}, cfg);
  EXPECT_EQ(merged.sentences, whole.sentences);
  EXPECT_EQ(merged.verdict, whole.verdict);
  EXPECT_DOUBLE_EQ(merged.flagged_fraction, whole.flagged_fraction);
  EXPECT_EQ(whole.verdict, Verdict::kRetranslate);
  EXPECT_EQ(whole.engine_copy_count, 14u);
}
