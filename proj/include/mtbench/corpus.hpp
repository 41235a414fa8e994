#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mtbench::corpus {

enum class Split { kDev, kDevtest, kTest };
enum class Domain { kWikinews, kWikijunior, kWikivoyage };
enum class Topic {
  kCrime,
  kDisasters,
  kEntertainment,
  kGeography,
  kHealth,
  kNature,
  kPolitics,
  kScience,
  kSports,
  kTravel,
};

inline constexpr std::array<Split, 3> kAllSplits = {Split::kDev, Split::kDevtest, Split::kTest};
inline constexpr std::array<Domain, 3> kAllDomains = {Domain::kWikinews, Domain::kWikijunior,
                                                      Domain::kWikivoyage};
inline constexpr std::array<Topic, 10> kAllTopics = {
    Topic::kCrime,   Topic::kDisasters, Topic::kEntertainment, Topic::kGeography,
    Topic::kHealth,  Topic::kNature,    Topic::kPolitics,      Topic::kScience,
    Topic::kSports,  Topic::kTravel};

std::string_view to_string(Split split);
std::string_view to_string(Domain domain);
std::string_view to_string(Topic topic);
std::optional<Split> parse_split(std::string_view text);
std::optional<Domain> parse_domain(std::string_view text);
std::optional<Topic> parse_topic(std::string_view text);

// Metadata shared by every language at one line position.
struct LineMeta {
  Split split = Split::kDev;
  std::size_t split_line = 0;  // 0-based index within the split file
  std::string article_id;
  Domain domain = Domain::kWikinews;
  Topic topic = Topic::kCrime;
  std::string url;
  bool has_linked_entities = false;
  bool has_image = false;

  bool operator==(const LineMeta&) const = default;
};

struct SentenceRecord {
  std::size_t id = 0;
  std::string text;
  LineMeta meta;
};

// Line-aligned multilingual corpus. Immutable once constructed.
class AlignedCorpus {
 public:
  // Throws MisalignedCorpus if any language's line count differs from the
  // metadata count, and InvalidArgument on duplicate language codes.
  AlignedCorpus(std::vector<std::string> languages,
                std::map<std::string, std::vector<std::string>> texts,
                std::vector<LineMeta> meta);

  const std::vector<std::string>& languages() const { return languages_; }
  std::size_t size() const { return meta_.size(); }
  bool has_language(std::string_view lang) const;

  const std::vector<std::string>& texts(std::string_view lang) const;
  const std::string& text(std::string_view lang, std::size_t id) const;
  const LineMeta& meta(std::size_t id) const { return meta_.at(id); }
  const std::vector<LineMeta>& meta() const { return meta_; }
  SentenceRecord record(std::string_view lang, std::size_t id) const;

  // Applies the same line selection to every language; ids are renumbered.
  AlignedCorpus select(const std::vector<std::size_t>& ids) const;
  std::vector<std::size_t> lines_in_split(Split split) const;

 private:
  std::vector<std::string> languages_;
  std::map<std::string, std::vector<std::string>, std::less<>> texts_;
  std::vector<LineMeta> meta_;
};

// Loads `<lang>.<split>` files (either in `root/<split>/` or directly in
// `root/`) and the metadata table. The sidecar `metadata.tsv` is preferred;
// the release's per-split `metedata_<split>.tsv` tables are accepted too.
AlignedCorpus load_corpus(const std::filesystem::path& root,
                          const std::vector<std::string>& languages,
                          const std::vector<Split>& splits = {Split::kDev, Split::kDevtest});

// Writes `root/<split>/<lang>.<split>` plus `root/metadata.tsv`.
void write_corpus(const AlignedCorpus& corpus, const std::filesystem::path& root);

inline constexpr std::string_view kMetadataHeader =
    "split\tline\tarticle_id\tdomain\ttopic\turl\thas_links\thas_image";

// Maximal runs of non-whitespace.
std::size_t count_words(std::string_view text);

struct StatsReport {
  std::size_t total_sentences = 0;
  std::map<Split, std::size_t> per_split;
  std::map<Domain, std::size_t> per_domain;
  std::map<Topic, std::size_t> per_topic;
  std::map<Split, std::size_t> articles_per_split;
  std::size_t article_count = 0;
  double avg_words_per_sentence = 0.0;
  double pct_articles_with_links = 0.0;
  double pct_articles_with_images = 0.0;
};

StatsReport corpus_stats(const AlignedCorpus& corpus, std::string_view pivot_language);

enum class LengthBucket { kShort, kMedium, kLong };

std::string_view to_string(LengthBucket bucket);

struct LengthBoundaries {
  std::size_t short_max = 15;
  std::size_t medium_max = 25;
};

// short: words <= short_max; medium: (short_max, medium_max]; long: > medium_max.
LengthBucket length_bucket(std::size_t words, const LengthBoundaries& bounds);

struct LengthPartition {
  std::vector<std::size_t> short_ids;
  std::vector<std::size_t> medium_ids;
  std::vector<std::size_t> long_ids;
};

LengthPartition bucket_by_length(const AlignedCorpus& corpus, std::string_view pivot_language,
                                 const LengthBoundaries& bounds = {});

}  // namespace mtbench::corpus
