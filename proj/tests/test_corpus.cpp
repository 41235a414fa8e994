#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "mtbench/corpus.hpp"
#include "mtbench/error.hpp"
#include "mtbench/io.hpp"
#include "mtbench/unicode.hpp"
#include "test_support.hpp"

using namespace mtbench;
using corpus::AlignedCorpus;
using corpus::Domain;
using corpus::LineMeta;
using corpus::Split;
using corpus::Topic;

namespace {

template <typename Fn>
ErrorKind kind_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no mtbench::Error thrown";
  return ErrorKind::kIoError;
}

LineMeta meta(Split split, std::size_t line, std::string article, Domain d, Topic t,
              bool links = false, bool image = false) {
  LineMeta m;
  m.split = split;
  m.split_line = line;
  m.article_id = std::move(article);
  m.domain = d;
  m.topic = t;
  m.url = "https://example.org/" + m.article_id;
  m.has_linked_entities = links;
  m.has_image = image;
  return m;
}

// Ten dev lines over four articles with hand-known tallies.
AlignedCorpus ten_line_corpus() {
  std::vector<LineMeta> metas;
  const Domain domains[] = {Domain::kWikinews, Domain::kWikinews, Domain::kWikinews,
                            Domain::kWikijunior, Domain::kWikijunior, Domain::kWikivoyage,
                            Domain::kWikivoyage, Domain::kWikivoyage, Domain::kWikivoyage,
                            Domain::kWikinews};
  const char* articles[] = {"a1", "a1", "a1", "a2", "a2", "a3", "a3", "a3", "a3", "a4"};
  const Topic topics[] = {Topic::kCrime, Topic::kCrime, Topic::kCrime, Topic::kNature,
                          Topic::kNature, Topic::kTravel, Topic::kTravel, Topic::kTravel,
                          Topic::kTravel, Topic::kPolitics};
  for (std::size_t i = 0; i < 10; ++i) {
    const Split split = i < 6 ? Split::kDev : Split::kDevtest;
    const std::size_t line = i < 6 ? i : i - 6;
    metas.push_back(meta(split, line, articles[i], domains[i], topics[i], articles[i][1] == '1',
                         articles[i][1] == '3'));
  }
  std::vector<std::string> eng, fra;
  for (std::size_t i = 0; i < 10; ++i) {
    eng.push_back(std::string(i + 1, 'x') + " w" + std::to_string(i));  // 2 words each
    fra.push_back("phrase " + std::to_string(i));
  }
  return AlignedCorpus({"eng", "fra"}, {{"eng", eng}, {"fra", fra}}, metas);
}

}  // namespace

TEST(Unicode, StrictDecodeRejectsMalformed) {
  EXPECT_EQ(unicode::decode("h\xC3\xA9"), U"hé");
  EXPECT_THROW(unicode::decode("\xC3"), Error);
  EXPECT_THROW(unicode::decode("\xED\xA0\x80"), Error);  // surrogate
}

TEST(Unicode, LosslessDecodeRoundTripsArbitraryBytes) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 2000; ++i) {
    std::string s;
    const auto n = rng() % 20;
    for (std::size_t j = 0; j < n; ++j) s += static_cast<char>(rng() & 0xFF);
    EXPECT_EQ(unicode::encode(unicode::decode_lossless(s)), s);
  }
}

TEST(Unicode, Classes) {
  EXPECT_TRUE(unicode::is_whitespace(U' '));
  EXPECT_TRUE(unicode::is_whitespace(0x3000));
  EXPECT_FALSE(unicode::is_whitespace(U'a'));
  EXPECT_TRUE(unicode::is_punctuation(U','));
  EXPECT_TRUE(unicode::is_punctuation(0x3002));  // ideographic full stop
  EXPECT_FALSE(unicode::is_punctuation(U'z'));
}

TEST(Unicode, NfkcFoldsCompatibilityForms) {
  EXPECT_EQ(unicode::nfkc("\xEF\xAC\x81"), "fi");  // U+FB01
  EXPECT_EQ(unicode::nfkc("e\xCC\x81"), "\xC3\xA9");
}

TEST(Io, SplitLinesKeepsInteriorEmptyLinesAndDropsFinalTerminator) {
  EXPECT_EQ(io::split_lines("a\n\nb\n"), (std::vector<std::string>{"a", "", "b"}));
  EXPECT_EQ(io::split_lines("a\r\nb"), (std::vector<std::string>{"a\r", "b"}));
  EXPECT_TRUE(io::split_lines("").empty());
}

TEST(Io, FormatScoreUsesTwoDecimals) {
  EXPECT_EQ(io::format_score(57.8896), "57.89");
  EXPECT_EQ(io::format_score(100.0), "100.00");
}

TEST(Corpus, EnumsRoundTrip) {
  for (int i = 0; i < 10; ++i) {
    const auto t = static_cast<Topic>(i);
    EXPECT_EQ(corpus::parse_topic(corpus::to_string(t)), t);
  }
  EXPECT_FALSE(corpus::parse_topic("cooking"));
  EXPECT_EQ(corpus::parse_split("devtest"), Split::kDevtest);
}

TEST(Corpus, RejectsMisalignedLanguages) {
  std::vector<LineMeta> metas;
  for (std::size_t i = 0; i < 3; ++i) {
    metas.push_back(meta(Split::kDev, i, "a", Domain::kWikinews, Topic::kCrime));
  }
  try {
    AlignedCorpus c({"aaa", "bbb", "ccc"},
                    {{"aaa", {"1", "2", "3"}}, {"bbb", {"1", "2"}}, {"ccc", {"1", "2", "3"}}},
                    metas);
    FAIL() << "expected MisalignedCorpus";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kMisalignedCorpus);
    EXPECT_NE(std::string(e.what()).find("bbb"), std::string::npos);
  }
}

TEST(Corpus, LoadRequiresLanguagesAndFiles) {
  testutil::TempDir dir;
  EXPECT_EQ(kind_of([&] { corpus::load_corpus(dir.path(), {}); }), ErrorKind::kMissingFile);
  EXPECT_EQ(kind_of([&] { corpus::load_corpus(dir.path(), {"eng"}); }), ErrorKind::kMissingFile);
}

TEST(Corpus, LoaderNamesShortLanguageFile) {
  testutil::TempDir dir;
  const auto c = ten_line_corpus();
  corpus::write_corpus(c, dir.path());
  auto lines = io::read_lines(dir / "dev/fra.dev");
  lines.pop_back();
  io::write_lines(dir / "dev/fra.dev", lines);
  try {
    corpus::load_corpus(dir.path(), {"eng", "fra"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kMisalignedCorpus);
    EXPECT_NE(std::string(e.what()).find("fra"), std::string::npos);
  }
}

TEST(Corpus, MalformedMetadataNamesLine) {
  testutil::TempDir dir;
  corpus::write_corpus(ten_line_corpus(), dir.path());
  auto rows = io::read_lines(dir / "metadata.tsv");
  const auto pos = rows[3].find("crime");
  ASSERT_NE(pos, std::string::npos);
  rows[3].replace(pos, 5, "cooking");
  io::write_lines(dir / "metadata.tsv", rows);
  try {
    corpus::load_corpus(dir.path(), {"eng", "fra"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kMalformedMetadata);
    EXPECT_NE(std::string(e.what()).find("4"), std::string::npos);
  }
}

TEST(Corpus, WriteThenLoadIsByteIdentical) {
  testutil::TempDir dir;
  std::mt19937_64 rng(5);
  std::vector<LineMeta> metas;
  std::vector<std::string> a, b;
  for (std::size_t i = 0; i < 40; ++i) {
    metas.push_back(meta(i < 25 ? Split::kDev : Split::kDevtest, i < 25 ? i : i - 25,
                         "art" + std::to_string(i / 5), Domain::kWikivoyage, Topic::kScience));
    std::string s;
    while (unicode::trim(s).empty()) s = testutil::random_text(rng, 30);
    a.push_back(s);
    b.push_back("line " + std::to_string(i) + " \xE2\x80\x94 \xF0\x9F\x98\x80");
  }
  const AlignedCorpus c({"xxx", "yyy"}, {{"xxx", a}, {"yyy", b}}, metas);
  corpus::write_corpus(c, dir.path());
  const auto back = corpus::load_corpus(dir.path(), {"xxx", "yyy"});
  EXPECT_EQ(back.texts("xxx"), a);
  EXPECT_EQ(back.texts("yyy"), b);
  EXPECT_EQ(back.meta().size(), metas.size());
  for (std::size_t i = 0; i < metas.size(); ++i) {
    EXPECT_EQ(back.meta(i).article_id, metas[i].article_id);
    EXPECT_EQ(back.meta(i).split, metas[i].split);
  }
}

TEST(Corpus, LoadsReleaseLayoutWithPerSplitTables) {
  testutil::TempDir dir;
  const std::string header = "URL\tdomain\ttopic\thas_image\thas_hyperlink";
  io::write_lines(dir / "metedata_dev.tsv",
                  {header, "https://en.wikinews.org/a\twikinews\tcrime\t0\t1",
                   "https://en.wikinews.org/a\twikinews\tcrime\t0\t0",
                   "https://en.wikivoyage.org/b\twikivoyage\tTravel\t1\t0"});
  io::write_lines(dir / "metedata_devtest.tsv",
                  {header, "https://en.wikibooks.org/c\twikijunior\tScience\t0\t0"});
  for (const std::string lang : {"eng", "fra"}) {
    std::filesystem::create_directories(dir / "dev");
    std::filesystem::create_directories(dir / "devtest");
    io::write_lines(dir / "dev" / (lang + ".dev"), {lang + " one", lang + " two", lang + " three"});
    io::write_lines(dir / "devtest" / (lang + ".devtest"), {lang + " four"});
  }
  const auto c = corpus::load_corpus(dir.path(), {"eng", "fra"});
  EXPECT_EQ(c.lines_in_split(Split::kDev).size(), 3u);
  EXPECT_EQ(c.lines_in_split(Split::kDevtest).size(), 1u);
  EXPECT_EQ(c.meta(2).domain, Domain::kWikivoyage);
  EXPECT_EQ(c.meta(2).topic, Topic::kTravel);
  EXPECT_TRUE(c.meta(0).has_linked_entities);
  EXPECT_EQ(c.meta(3).topic, Topic::kScience);
  EXPECT_EQ(c.text("fra", 3), "fra four");

  io::write_lines(dir / "devtest" / "fra.devtest", {"fra four", "fra five"});
  try {
    corpus::load_corpus(dir.path(), {"eng", "fra"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kMisalignedCorpus);
    EXPECT_NE(std::string(e.what()).find("fra"), std::string::npos);
  }
}

TEST(CorpusStats, HandTalliedTenLineCorpus) {
  const auto st = corpus::corpus_stats(ten_line_corpus(), "eng");
  EXPECT_EQ(st.total_sentences, 10u);
  EXPECT_EQ(st.per_split.at(Split::kDev), 6u);
  EXPECT_EQ(st.per_split.at(Split::kDevtest), 4u);
  EXPECT_EQ(st.per_domain.at(Domain::kWikinews), 4u);
  EXPECT_EQ(st.per_domain.at(Domain::kWikijunior), 2u);
  EXPECT_EQ(st.per_domain.at(Domain::kWikivoyage), 4u);
  EXPECT_EQ(st.per_topic.at(Topic::kTravel), 4u);
  EXPECT_EQ(st.article_count, 4u);
  EXPECT_DOUBLE_EQ(st.avg_words_per_sentence, 2.0);
  EXPECT_DOUBLE_EQ(st.pct_articles_with_links, 25.0);
  EXPECT_DOUBLE_EQ(st.pct_articles_with_images, 25.0);
  std::size_t split_sum = 0;
  for (const auto& [s, n] : st.per_split) split_sum += n;
  EXPECT_EQ(split_sum, st.total_sentences);
}

TEST(CorpusStats, SingleSentenceAverageWords) {
  const AlignedCorpus c({"eng"}, {{"eng", {"a b c"}}},
                        {meta(Split::kDev, 0, "x", Domain::kWikinews, Topic::kHealth)});
  EXPECT_DOUBLE_EQ(corpus::corpus_stats(c, "eng").avg_words_per_sentence, 3.0);
  EXPECT_EQ(kind_of([&] { corpus::corpus_stats(c, "deu"); }), ErrorKind::kUnknownLanguage);
}

TEST(CorpusStats, InvariantUnderUniformLineReordering) {
  const auto c = ten_line_corpus();
  std::vector<std::size_t> perm(c.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(3);
  std::shuffle(perm.begin(), perm.end(), rng);
  const auto a = corpus::corpus_stats(c, "eng");
  const auto b = corpus::corpus_stats(c.select(perm), "eng");
  EXPECT_EQ(a.per_split, b.per_split);
  EXPECT_EQ(a.per_domain, b.per_domain);
  EXPECT_EQ(a.per_topic, b.per_topic);
  EXPECT_EQ(a.article_count, b.article_count);
  EXPECT_DOUBLE_EQ(a.avg_words_per_sentence, b.avg_words_per_sentence);
}

TEST(LengthBuckets, BoundarySemantics) {
  const corpus::LengthBoundaries b;
  EXPECT_EQ(corpus::length_bucket(0, b), corpus::LengthBucket::kShort);
  EXPECT_EQ(corpus::length_bucket(15, b), corpus::LengthBucket::kShort);
  EXPECT_EQ(corpus::length_bucket(16, b), corpus::LengthBucket::kMedium);
  EXPECT_EQ(corpus::length_bucket(25, b), corpus::LengthBucket::kMedium);
  EXPECT_EQ(corpus::length_bucket(26, b), corpus::LengthBucket::kLong);
}

TEST(LengthBuckets, PartitionOnPivotWordCounts) {
  auto words = [](std::size_t n) {
    std::string s;
    for (std::size_t i = 0; i < n; ++i) s += (i ? " w" : "w");
    return s;
  };
  std::vector<LineMeta> metas;
  for (std::size_t i = 0; i < 4; ++i) {
    metas.push_back(meta(Split::kDevtest, i, "a", Domain::kWikinews, Topic::kCrime));
  }
  const AlignedCorpus c({"eng", "zho"},
                        {{"eng", {words(15), words(16), words(25), words(26)}},
                         {"zho", {"x", "x", "x", "x"}}},
                        metas);
  const auto p = corpus::bucket_by_length(c, "eng");
  EXPECT_EQ(p.short_ids, (std::vector<std::size_t>{0}));
  EXPECT_EQ(p.medium_ids, (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(p.long_ids, (std::vector<std::size_t>{3}));
  EXPECT_EQ(kind_of([&] { corpus::bucket_by_length(c, "eng", {25, 15}); }),
            ErrorKind::kInvalidBoundaries);
  EXPECT_EQ(kind_of([&] { corpus::bucket_by_length(c, "eng", {0, 15}); }),
            ErrorKind::kInvalidBoundaries);
  EXPECT_EQ(kind_of([&] { corpus::bucket_by_length(c, "fra"); }), ErrorKind::kUnknownLanguage);
}

TEST(LengthBuckets, RandomCorporaArePartitioned) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng() % 60;
    std::vector<LineMeta> metas;
    std::vector<std::string> text;
    for (std::size_t i = 0; i < n; ++i) {
      metas.push_back(meta(Split::kDev, i, "a", Domain::kWikinews, Topic::kCrime));
      std::string s = "w";
      for (std::size_t w = rng() % 40; w > 0; --w) s += " w";
      text.push_back(s);
    }
    const AlignedCorpus c({"eng"}, {{"eng", text}}, metas);
    const auto p = corpus::bucket_by_length(c, "eng");
    std::vector<std::size_t> all;
    for (const auto* part : {&p.short_ids, &p.medium_ids, &p.long_ids}) {
      all.insert(all.end(), part->begin(), part->end());
    }
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> expected(n);
    std::iota(expected.begin(), expected.end(), 0);
    EXPECT_EQ(all, expected);
  }
}
