#include "mtbench/corpus.hpp"

#include <algorithm>
#include <set>

#include "mtbench/error.hpp"
#include "mtbench/io.hpp"
#include "mtbench/unicode.hpp"

namespace mtbench::corpus {
namespace fs = std::filesystem;

std::string_view to_string(Split split) {
  switch (split) {
    case Split::kDev: return "dev";
    case Split::kDevtest: return "devtest";
    case Split::kTest: return "test";
  }
  return "?";
}

std::string_view to_string(Domain domain) {
  switch (domain) {
    case Domain::kWikinews: return "wikinews";
    case Domain::kWikijunior: return "wikijunior";
    case Domain::kWikivoyage: return "wikivoyage";
  }
  return "?";
}

std::string_view to_string(Topic topic) {
  switch (topic) {
    case Topic::kCrime: return "crime";
    case Topic::kDisasters: return "disasters";
    case Topic::kEntertainment: return "entertainment";
    case Topic::kGeography: return "geography";
    case Topic::kHealth: return "health";
    case Topic::kNature: return "nature";
    case Topic::kPolitics: return "politics";
    case Topic::kScience: return "science";
    case Topic::kSports: return "sports";
    case Topic::kTravel: return "travel";
  }
  return "?";
}

std::string_view to_string(LengthBucket bucket) {
  switch (bucket) {
    case LengthBucket::kShort: return "short";
    case LengthBucket::kMedium: return "medium";
    case LengthBucket::kLong: return "long";
  }
  return "?";
}

std::optional<Split> parse_split(std::string_view text) {
  for (Split s : kAllSplits) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

std::optional<Domain> parse_domain(std::string_view text) {
  for (Domain d : kAllDomains) {
    if (to_string(d) == text) return d;
  }
  return std::nullopt;
}

std::optional<Topic> parse_topic(std::string_view text) {
  for (Topic t : kAllTopics) {
    if (to_string(t) == text) return t;
  }
  return std::nullopt;
}

AlignedCorpus::AlignedCorpus(std::vector<std::string> languages,
                             std::map<std::string, std::vector<std::string>> texts,
                             std::vector<LineMeta> meta)
    : languages_(std::move(languages)), meta_(std::move(meta)) {
  std::set<std::string> seen;
  for (const auto& lang : languages_) {
    if (!seen.insert(lang).second) {
      throw Error(ErrorKind::kInvalidArgument, "duplicate language code '" + lang + "'");
    }
    auto it = texts.find(lang);
    if (it == texts.end()) {
      throw Error(ErrorKind::kMissingFile, "no text provided for language '" + lang + "'");
    }
    if (it->second.size() != meta_.size()) {
      throw Error(ErrorKind::kMisalignedCorpus,
                  "language '" + lang + "' has " + std::to_string(it->second.size()) +
                      " lines, expected " + std::to_string(meta_.size()));
    }
    texts_.emplace(lang, std::move(it->second));
  }
}

bool AlignedCorpus::has_language(std::string_view lang) const {
  return texts_.find(lang) != texts_.end();
}

const std::vector<std::string>& AlignedCorpus::texts(std::string_view lang) const {
  auto it = texts_.find(lang);
  if (it == texts_.end()) {
    throw Error(ErrorKind::kUnknownLanguage, "language '" + std::string(lang) + "' not in corpus");
  }
  return it->second;
}

const std::string& AlignedCorpus::text(std::string_view lang, std::size_t id) const {
  return texts(lang).at(id);
}

SentenceRecord AlignedCorpus::record(std::string_view lang, std::size_t id) const {
  return SentenceRecord{id, text(lang, id), meta_.at(id)};
}

AlignedCorpus AlignedCorpus::select(const std::vector<std::size_t>& ids) const {
  std::map<std::string, std::vector<std::string>> texts;
  std::vector<LineMeta> meta;
  meta.reserve(ids.size());
  for (std::size_t id : ids) meta.push_back(meta_.at(id));
  for (const auto& lang : languages_) {
    const auto& src = texts_.find(lang)->second;
    auto& dst = texts[lang];
    dst.reserve(ids.size());
    for (std::size_t id : ids) dst.push_back(src.at(id));
  }
  return AlignedCorpus(languages_, std::move(texts), std::move(meta));
}

std::vector<std::size_t> AlignedCorpus::lines_in_split(Split split) const {
  std::vector<std::size_t> ids;
  for (std::size_t i = 0; i < meta_.size(); ++i) {
    if (meta_[i].split == split) ids.push_back(i);
  }
  return ids;
}

namespace {

std::optional<bool> parse_flag(std::string_view text) {
  const std::string lower = unicode::to_lower_ascii(unicode::trim(text));
  if (lower == "1" || lower == "true" || lower == "yes") return true;
  if (lower == "0" || lower == "false" || lower == "no" || lower.empty()) return false;
  return std::nullopt;
}

[[noreturn]] void bad_meta(const fs::path& file, std::size_t row, const std::string& what) {
  throw Error(ErrorKind::kMalformedMetadata,
              file.filename().string() + " line " + std::to_string(row) + ": " + what);
}

using MetaTable = std::map<std::pair<Split, std::size_t>, LineMeta>;

MetaTable parse_sidecar(const fs::path& file) {
  const auto rows = io::read_lines(file);
  if (rows.empty() || rows.front() != kMetadataHeader) {
    bad_meta(file, 1, "expected header '" + std::string(kMetadataHeader) + "'");
  }
  MetaTable table;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].empty()) continue;
    const auto cols = io::split(rows[r], '\t');
    const std::size_t lineno = r + 1;
    if (cols.size() != 8) bad_meta(file, lineno, "expected 8 columns");
    LineMeta m;
    auto split = parse_split(cols[0]);
    if (!split) bad_meta(file, lineno, "bad split '" + cols[0] + "'");
    m.split = *split;
    try {
      std::size_t used = 0;
      m.split_line = std::stoul(cols[1], &used);
      if (used != cols[1].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      bad_meta(file, lineno, "bad line index '" + cols[1] + "'");
    }
    m.article_id = cols[2];
    auto domain = parse_domain(cols[3]);
    if (!domain) bad_meta(file, lineno, "bad domain '" + cols[3] + "'");
    m.domain = *domain;
    auto topic = parse_topic(cols[4]);
    if (!topic) bad_meta(file, lineno, "bad topic '" + cols[4] + "'");
    m.topic = *topic;
    m.url = cols[5];
    auto links = parse_flag(cols[6]);
    auto image = parse_flag(cols[7]);
    if (!links || !image) bad_meta(file, lineno, "bad boolean flag");
    m.has_linked_entities = *links;
    m.has_image = *image;
    if (!table.emplace(std::make_pair(m.split, m.split_line), m).second) {
      bad_meta(file, lineno, "duplicate (split, line) key");
    }
  }
  return table;
}

// The public release's per-split table: URL, domain, topic, has_image,
// has_hyperlink; one row per sentence in file order. Topics are free text
// there, so the first word is matched against the closed topic set.
MetaTable parse_release_table(const fs::path& file, Split split) {
  const auto rows = io::read_lines(file);
  if (rows.empty()) bad_meta(file, 1, "empty metadata table");
  const auto header = io::split(rows.front(), '\t');
  auto column = [&](std::string_view name) -> std::size_t {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (unicode::to_lower_ascii(unicode::trim(header[i])) == name) return i;
    }
    bad_meta(file, 1, "missing column '" + std::string(name) + "'");
  };
  const std::size_t c_url = column("url");
  const std::size_t c_domain = column("domain");
  const std::size_t c_topic = column("topic");
  const std::size_t c_image = column("has_image");
  const std::size_t c_links = column("has_hyperlink");
  MetaTable table;
  std::size_t line = 0;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].empty()) continue;
    const auto cols = io::split(rows[r], '\t');
    const std::size_t lineno = r + 1;
    if (cols.size() < header.size()) bad_meta(file, lineno, "short row");
    LineMeta m;
    m.split = split;
    m.split_line = line++;
    m.url = cols[c_url];
    m.article_id = cols[c_url];
    auto domain = parse_domain(unicode::to_lower_ascii(unicode::trim(cols[c_domain])));
    if (!domain) bad_meta(file, lineno, "bad domain '" + cols[c_domain] + "'");
    m.domain = *domain;
    std::string topic = unicode::to_lower_ascii(unicode::trim(cols[c_topic]));
    topic = topic.substr(0, topic.find_first_not_of("abcdefghijklmnopqrstuvwxyz"));
    std::optional<Topic> parsed;
    for (Topic t : kAllTopics) {
      if (!topic.empty() && to_string(t).starts_with(topic.substr(0, 4))) parsed = t;
    }
    if (!parsed) bad_meta(file, lineno, "bad topic '" + cols[c_topic] + "'");
    m.topic = *parsed;
    auto image = parse_flag(cols[c_image]);
    auto links = parse_flag(cols[c_links]);
    if (!image || !links) bad_meta(file, lineno, "bad boolean flag");
    m.has_image = *image;
    m.has_linked_entities = *links;
    table.emplace(std::make_pair(split, m.split_line), m);
  }
  return table;
}

fs::path sentence_file(const fs::path& root, const std::string& lang, Split split) {
  const std::string name = lang + "." + std::string(to_string(split));
  const fs::path nested = root / std::string(to_string(split)) / name;
  if (fs::exists(nested)) return nested;
  const fs::path flat = root / name;
  if (fs::exists(flat)) return flat;
  throw Error(ErrorKind::kMissingFile,
              "missing sentence file for language '" + lang + "', split '" +
                  std::string(to_string(split)) + "' under " + root.string());
}

}  // namespace

AlignedCorpus load_corpus(const fs::path& root, const std::vector<std::string>& languages,
                          const std::vector<Split>& splits) {
  if (languages.empty()) {
    throw Error(ErrorKind::kMissingFile, "no languages requested");
  }
  if (splits.empty()) {
    throw Error(ErrorKind::kMissingFile, "no splits requested");
  }

  MetaTable table;
  const fs::path sidecar = root / "metadata.tsv";
  if (fs::exists(sidecar)) {
    table = parse_sidecar(sidecar);
  } else {
    for (Split split : splits) {
      const std::string s(to_string(split));
      fs::path file;
      for (const auto& candidate : {root / ("metedata_" + s + ".tsv"),
                                    root / ("metadata_" + s + ".tsv")}) {
        if (fs::exists(candidate)) file = candidate;
      }
      if (file.empty()) {
        throw Error(ErrorKind::kMissingFile, "no metadata table for split '" + s + "' under " +
                                                 root.string());
      }
      table.merge(parse_release_table(file, split));
    }
  }

  std::map<std::string, std::vector<std::string>> texts;
  std::vector<LineMeta> meta;
  for (Split split : splits) {
    std::optional<std::size_t> expected;
    std::string first_lang;
    for (const auto& lang : languages) {
      auto lines = io::read_lines(sentence_file(root, lang, split));
      if (!expected) {
        expected = lines.size();
        first_lang = lang;
      } else if (lines.size() != *expected) {
        throw Error(ErrorKind::kMisalignedCorpus,
                    "language '" + lang + "' has " + std::to_string(lines.size()) +
                        " lines in split '" + std::string(to_string(split)) + "' but '" +
                        first_lang + "' has " + std::to_string(*expected));
      }
      for (std::size_t i = 0; i < lines.size(); ++i) {
        if (unicode::trim(lines[i]).empty()) {
          throw Error(ErrorKind::kMisalignedCorpus,
                      "blank line " + std::to_string(i + 1) + " in " + lang + "." +
                          std::string(to_string(split)));
        }
      }
      auto& dst = texts[lang];
      dst.insert(dst.end(), std::make_move_iterator(lines.begin()),
                 std::make_move_iterator(lines.end()));
    }
    for (std::size_t i = 0; i < *expected; ++i) {
      auto it = table.find({split, i});
      if (it == table.end()) {
        throw Error(ErrorKind::kMalformedMetadata,
                    "no metadata for split '" + std::string(to_string(split)) + "' line " +
                        std::to_string(i));
      }
      meta.push_back(it->second);
    }
    const auto extra = std::count_if(table.begin(), table.end(), [&](const auto& kv) {
      return kv.first.first == split && kv.first.second >= *expected;
    });
    if (extra > 0) {
      throw Error(ErrorKind::kMisalignedCorpus,
                  "metadata has " + std::to_string(extra) + " rows beyond the " +
                      std::to_string(*expected) + " lines of split '" +
                      std::string(to_string(split)) + "'");
    }
  }
  return AlignedCorpus(languages, std::move(texts), std::move(meta));
}

void write_corpus(const AlignedCorpus& corpus, const fs::path& root) {
  std::set<Split> splits;
  for (const auto& m : corpus.meta()) splits.insert(m.split);
  for (Split split : splits) {
    const fs::path dir = root / std::string(to_string(split));
    fs::create_directories(dir);
    const auto ids = corpus.lines_in_split(split);
    for (const auto& lang : corpus.languages()) {
      std::vector<std::string> lines;
      lines.reserve(ids.size());
      for (std::size_t id : ids) lines.push_back(corpus.text(lang, id));
      io::write_lines(dir / (lang + "." + std::string(to_string(split))), lines);
    }
  }
  std::vector<std::string> rows{std::string(kMetadataHeader)};
  for (const auto& m : corpus.meta()) {
    rows.push_back(io::join({std::string(to_string(m.split)), std::to_string(m.split_line),
                             m.article_id, std::string(to_string(m.domain)),
                             std::string(to_string(m.topic)), m.url,
                             m.has_linked_entities ? "1" : "0", m.has_image ? "1" : "0"},
                            "\t"));
  }
  fs::create_directories(root);
  io::write_lines(root / "metadata.tsv", rows);
}

std::size_t count_words(std::string_view text) {
  std::size_t words = 0;
  bool in_word = false;
  for (char32_t c : unicode::decode_lossless(text)) {
    const bool ws = unicode::is_whitespace(c);
    if (!ws && !in_word) ++words;
    in_word = !ws;
  }
  return words;
}

StatsReport corpus_stats(const AlignedCorpus& corpus, std::string_view pivot_language) {
  const auto& pivot = corpus.texts(pivot_language);
  StatsReport report;
  report.total_sentences = corpus.size();
  for (Split s : kAllSplits) report.per_split[s] = 0;
  for (Domain d : kAllDomains) report.per_domain[d] = 0;
  for (Topic t : kAllTopics) report.per_topic[t] = 0;

  struct ArticleFlags {
    bool links = false;
    bool image = false;
  };
  std::map<std::string, ArticleFlags> articles;
  std::map<Split, std::set<std::string>> split_articles;
  std::size_t words = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& m = corpus.meta(i);
    ++report.per_split[m.split];
    ++report.per_domain[m.domain];
    ++report.per_topic[m.topic];
    auto& flags = articles[m.article_id];
    flags.links = flags.links || m.has_linked_entities;
    flags.image = flags.image || m.has_image;
    split_articles[m.split].insert(m.article_id);
    words += count_words(pivot[i]);
  }
  for (Split s : kAllSplits) report.articles_per_split[s] = split_articles[s].size();
  report.article_count = articles.size();
  if (report.total_sentences > 0) {
    report.avg_words_per_sentence =
        static_cast<double>(words) / static_cast<double>(report.total_sentences);
  }
  if (!articles.empty()) {
    std::size_t links = 0;
    std::size_t images = 0;
    for (const auto& [id, flags] : articles) {
      links += flags.links;
      images += flags.image;
    }
    const auto n = static_cast<double>(articles.size());
    report.pct_articles_with_links = 100.0 * static_cast<double>(links) / n;
    report.pct_articles_with_images = 100.0 * static_cast<double>(images) / n;
  }
  return report;
}

LengthBucket length_bucket(std::size_t words, const LengthBoundaries& bounds) {
  if (words <= bounds.short_max) return LengthBucket::kShort;
  if (words <= bounds.medium_max) return LengthBucket::kMedium;
  return LengthBucket::kLong;
}

LengthPartition bucket_by_length(const AlignedCorpus& corpus, std::string_view pivot_language,
                                 const LengthBoundaries& bounds) {
  if (bounds.short_max == 0 || bounds.medium_max <= bounds.short_max) {
    throw Error(ErrorKind::kInvalidBoundaries,
                "length boundaries must be strictly increasing positive integers");
  }
  const auto& pivot = corpus.texts(pivot_language);
  LengthPartition out;
  for (std::size_t i = 0; i < pivot.size(); ++i) {
    switch (length_bucket(count_words(pivot[i]), bounds)) {
      case LengthBucket::kShort: out.short_ids.push_back(i); break;
      case LengthBucket::kMedium: out.medium_ids.push_back(i); break;
      case LengthBucket::kLong: out.long_ids.push_back(i); break;
    }
  }
  return out;
}

}  // namespace mtbench::corpus
