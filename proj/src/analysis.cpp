#include "mtbench/analysis.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <thread>

#include "mtbench/bleu.hpp"
#include "mtbench/error.hpp"
#include "mtbench/io.hpp"
#include "mtbench/unicode.hpp"
#include "mtbench/unigram_model.hpp"

namespace mtbench::analysis {

LanguageMatrix::LanguageMatrix(std::vector<std::string> languages)
    : languages_(std::move(languages)), cells_(languages_.size() * languages_.size()) {
  std::set<std::string> seen;
  for (const auto& l : languages_) {
    if (!seen.insert(l).second) {
      throw Error(ErrorKind::kInvalidArgument, "duplicate language code '" + l + "'");
    }
  }
}

std::size_t LanguageMatrix::index_of(std::string_view code) const {
  auto it = std::find(languages_.begin(), languages_.end(), code);
  if (it == languages_.end()) {
    throw Error(ErrorKind::kUnknownLanguage, "language '" + std::string(code) + "' not in matrix");
  }
  return static_cast<std::size_t>(it - languages_.begin());
}

std::optional<double> LanguageMatrix::at(std::size_t src, std::size_t tgt) const {
  return cells_.at(src * size() + tgt);
}

void LanguageMatrix::set(std::size_t src, std::size_t tgt, double value) {
  if (src == tgt) throw Error(ErrorKind::kInvalidArgument, "diagonal cells are undefined");
  if (!std::isfinite(value)) throw Error(ErrorKind::kInvalidArgument, "non-finite cell value");
  cells_.at(src * size() + tgt) = value;
}

void LanguageMatrix::clear(std::size_t src, std::size_t tgt) {
  cells_.at(src * size() + tgt).reset();
}

bool LanguageMatrix::fully_defined() const {
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t j = 0; j < size(); ++j) {
      if (i != j && !at(i, j)) return false;
    }
  }
  return true;
}

std::string LanguageMatrix::to_tsv() const {
  std::string out;
  for (const auto& l : languages_) out += "\t" + l;
  out += "\n";
  for (std::size_t i = 0; i < size(); ++i) {
    out += languages_[i];
    for (std::size_t j = 0; j < size(); ++j) {
      out += "\t";
      if (auto v = at(i, j)) out += io::format_score(*v);
    }
    out += "\n";
  }
  return out;
}

LanguageMatrix LanguageMatrix::parse_tsv(std::string_view text) {
  const auto lines = io::split_lines(text);
  if (lines.empty()) throw Error(ErrorKind::kMalformedMatrix, "empty matrix file");
  auto header = io::split(lines[0], '\t');
  if (header.empty() || !header[0].empty()) {
    throw Error(ErrorKind::kMalformedMatrix, "header must start with an empty cell");
  }
  header.erase(header.begin());
  LanguageMatrix m(header);
  std::size_t row = 0;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (lines[li].empty()) continue;
    const auto cols = io::split(lines[li], '\t');
    const std::string where = "matrix line " + std::to_string(li + 1);
    if (row >= m.size()) throw Error(ErrorKind::kMalformedMatrix, where + ": too many rows");
    if (cols.size() != m.size() + 1 || cols[0] != header[row]) {
      throw Error(ErrorKind::kMalformedMatrix, where + ": expected row for '" + header[row] +
                                                   "' with " + std::to_string(m.size()) +
                                                   " cells");
    }
    for (std::size_t j = 0; j < m.size(); ++j) {
      const std::string& cell = cols[j + 1];
      if (cell.empty()) continue;
      if (j == row) {
        throw Error(ErrorKind::kMalformedMatrix, where + ": diagonal cell must be empty");
      }
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
        throw Error(ErrorKind::kMalformedMatrix, where + ": bad number '" + cell + "'");
      }
      m.set(row, j, v);
    }
    ++row;
  }
  if (row != m.size()) throw Error(ErrorKind::kMalformedMatrix, "matrix has missing rows");
  return m;
}

void check_score_range(const EvalMatrix& matrix) {
  for (std::size_t i = 0; i < matrix.size(); ++i) {
    for (std::size_t j = 0; j < matrix.size(); ++j) {
      if (auto v = matrix.at(i, j); v && (*v < 0.0 || *v > 100.0)) {
        throw Error(ErrorKind::kOutOfRange,
                    fmt::format("cell {}->{} = {} outside [0, 100]", matrix.languages()[i],
                                matrix.languages()[j], *v));
      }
    }
  }
}

namespace {

void check_directions(const corpus::AlignedCorpus& corpus,
                      const std::map<Direction, std::vector<std::string>>& hypotheses) {
  for (const auto& [dir, lines] : hypotheses) {
    if (!corpus.has_language(dir.first) || !corpus.has_language(dir.second) ||
        dir.first == dir.second) {
      throw Error(ErrorKind::kUnknownDirection,
                  "direction " + dir.first + "-" + dir.second + " is not in the corpus");
    }
    if (lines.size() != corpus.size()) {
      throw Error(ErrorKind::kMisalignedHypothesis,
                  fmt::format("hypotheses for {}-{} have {} lines, corpus has {}", dir.first,
                              dir.second, lines.size(), corpus.size()));
    }
  }
}

// Runs fn(k) for k in [0, n) on up to `threads` threads; rethrows the first
// failure by index.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  const unsigned workers =
      std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  std::vector<std::exception_ptr> failures(n);
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t k = w; k < n; k += workers) {
          try {
            fn(k);
          } catch (...) {
            failures[k] = std::current_exception();
          }
        }
      });
    }
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
}

}  // namespace

EvalMatrix evaluate_matrix(const corpus::AlignedCorpus& corpus,
                           const std::map<Direction, std::vector<std::string>>& hypotheses,
                           const tokenizer::SubwordModel& model, unsigned threads) {
  check_directions(corpus, hypotheses);
  EvalMatrix m(corpus.languages());
  std::vector<const std::pair<const Direction, std::vector<std::string>>*> jobs;
  for (const auto& entry : hypotheses) jobs.push_back(&entry);
  std::vector<double> scores(jobs.size());
  parallel_for(jobs.size(), threads, [&](std::size_t k) {
    const auto& [dir, lines] = *jobs[k];
    scores[k] = metrics::score_lines(metrics::Metric::kSpBleu, metrics::Level::kCorpus, &model,
                                     lines, corpus.texts(dir.second))
                    .front()
                    .score;
  });
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    const auto& dir = jobs[k]->first;
    m.set(m.index_of(dir.first), m.index_of(dir.second), scores[k]);
  }
  return m;
}

std::map<Direction, std::vector<std::string>> load_hypotheses(
    const corpus::AlignedCorpus& corpus, const std::filesystem::path& dir) {
  std::map<Direction, std::vector<std::string>> out;
  for (const auto& src : corpus.languages()) {
    for (const auto& tgt : corpus.languages()) {
      if (src == tgt) continue;
      const auto file = dir / (src + "-" + tgt + ".txt");
      if (std::filesystem::exists(file)) out[{src, tgt}] = io::read_lines(file);
    }
  }
  return out;
}

std::vector<SubsetRow> evaluate_subsets(
    const corpus::AlignedCorpus& corpus,
    const std::map<Direction, std::vector<std::string>>& hypotheses,
    const tokenizer::SubwordModel& model,
    const std::vector<std::pair<std::string, std::vector<std::size_t>>>& subsets,
    unsigned threads) {
  check_directions(corpus, hypotheses);
  std::vector<SubsetRow> rows;
  for (const auto& [label, ids] : subsets) {
    SubsetRow row;
    row.label = label;
    row.num_sentences = ids.size();
    if (!ids.empty() && !hypotheses.empty()) {
      std::map<Direction, std::vector<std::string>> picked;
      for (const auto& [dir, lines] : hypotheses) {
        auto& dst = picked[dir];
        for (std::size_t id : ids) dst.push_back(lines.at(id));
      }
      const EvalMatrix m = evaluate_matrix(corpus.select(ids), picked, model, threads);
      double sum = 0.0;
      for (const auto& [dir, lines] : picked) {
        sum += *m.at(m.index_of(dir.first), m.index_of(dir.second));
      }
      row.directions = picked.size();
      row.avg_score = sum / static_cast<double>(picked.size());
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string subsets_tsv(const std::vector<SubsetRow>& rows) {
  std::string out = "subset\tnum_sentences\tdirections\tavg_spbleu\n";
  for (const auto& r : rows) {
    out += fmt::format("{}\t{}\t{}\t{}\n", r.label, r.num_sentences, r.directions,
                       r.avg_score ? io::format_score(*r.avg_score) : "");
  }
  return out;
}

std::string_view to_string(ResourceBin bin) {
  switch (bin) {
    case ResourceBin::kVeryLow: return "very_low";
    case ResourceBin::kLow: return "low";
    case ResourceBin::kMedium: return "medium";
    case ResourceBin::kHigh: return "high";
  }
  return "?";
}

ResourceBin resource_bin(std::uint64_t bitext_count) {
  if (bitext_count < 100'000) return ResourceBin::kVeryLow;
  if (bitext_count < 1'000'000) return ResourceBin::kLow;
  if (bitext_count < 100'000'000) return ResourceBin::kMedium;
  return ResourceBin::kHigh;
}

std::string_view to_string(Family family) {
  switch (family) {
    case Family::kAfroAsiatic: return "afro-asiatic";
    case Family::kAustronesian: return "austronesian";
    case Family::kBaltoSlavic: return "balto-slavic";
    case Family::kBantu: return "bantu";
    case Family::kDravidian: return "dravidian";
    case Family::kGermanic: return "germanic";
    case Family::kIndoAryan: return "indo-aryan";
    case Family::kNiloticOtherAc: return "nilotic+other-ac";
    case Family::kRomance: return "romance";
    case Family::kSinoTibetanKraDai: return "sino-tibetan+kra-dai";
    case Family::kTurkic: return "turkic";
  }
  return "?";
}

std::optional<Family> parse_family(std::string_view text) {
  const std::string lower = unicode::to_lower_ascii(unicode::trim(text));
  for (int i = 0; i <= static_cast<int>(Family::kTurkic); ++i) {
    const auto f = static_cast<Family>(i);
    if (to_string(f) == lower) return f;
  }
  return std::nullopt;
}

std::vector<LanguageMeta> parse_language_meta(std::string_view text) {
  const auto lines = io::split_lines(text);
  if (lines.empty() || lines[0] != "code\tfamily\tbitext\tmono") {
    throw Error(ErrorKind::kMalformedMetadata, "expected header 'code\tfamily\tbitext\tmono'");
  }
  auto number = [](const std::string& s, std::size_t lineno) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw Error(ErrorKind::kMalformedMetadata,
                  "line " + std::to_string(lineno) + ": bad count '" + s + "'");
    }
    return v;
  };
  std::vector<LanguageMeta> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto cols = io::split(lines[i], '\t');
    if (cols.size() != 4) {
      throw Error(ErrorKind::kMalformedMetadata, "line " + std::to_string(i + 1) +
                                                     ": expected 4 columns");
    }
    auto family = parse_family(cols[1]);
    if (!family) {
      throw Error(ErrorKind::kMalformedMetadata,
                  "line " + std::to_string(i + 1) + ": unknown family '" + cols[1] + "'");
    }
    out.push_back({cols[0], *family, number(cols[2], i + 1), number(cols[3], i + 1)});
  }
  return out;
}

namespace {

std::optional<double> mean_of(const std::vector<std::optional<double>>& values) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& v : values) {
    if (v) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

}  // namespace

GroupTable group_average(const EvalMatrix& matrix,
                         const std::map<std::string, std::string>& group_of,
                         const std::vector<std::string>& group_order) {
  std::map<std::string, std::size_t> group_index;
  for (std::size_t g = 0; g < group_order.size(); ++g) group_index[group_order[g]] = g;
  std::vector<std::size_t> lang_group(matrix.size());
  for (std::size_t i = 0; i < matrix.size(); ++i) {
    auto it = group_of.find(matrix.languages()[i]);
    if (it == group_of.end()) {
      throw Error(ErrorKind::kMissingMeta,
                  "no group for language '" + matrix.languages()[i] + "'");
    }
    auto g = group_index.find(it->second);
    if (g == group_index.end()) {
      throw Error(ErrorKind::kMissingMeta, "group '" + it->second + "' is not in the group order");
    }
    lang_group[i] = g->second;
  }

  const std::size_t G = group_order.size();
  GroupTable t;
  t.groups = group_order;
  std::vector<double> sums(G * G, 0.0);
  t.pair_counts.assign(G * G, 0);
  for (std::size_t i = 0; i < matrix.size(); ++i) {
    for (std::size_t j = 0; j < matrix.size(); ++j) {
      if (auto v = matrix.at(i, j)) {
        const std::size_t cell = lang_group[i] * G + lang_group[j];
        sums[cell] += *v;
        ++t.pair_counts[cell];
      }
    }
  }
  t.cells.resize(G * G);
  for (std::size_t c = 0; c < G * G; ++c) {
    if (t.pair_counts[c] > 0) t.cells[c] = sums[c] / static_cast<double>(t.pair_counts[c]);
  }
  for (std::size_t g = 0; g < G; ++g) {
    std::vector<std::optional<double>> row(t.cells.begin() + static_cast<std::ptrdiff_t>(g * G),
                                           t.cells.begin() + static_cast<std::ptrdiff_t>(g * G + G));
    std::vector<std::optional<double>> col;
    for (std::size_t h = 0; h < G; ++h) col.push_back(t.cells[h * G + g]);
    t.row_avg.push_back(mean_of(row));
    t.col_avg.push_back(mean_of(col));
  }
  t.overall = mean_of(t.cells);
  return t;
}

GroupTable group_average(const EvalMatrix& matrix, const std::vector<LanguageMeta>& meta,
                         Grouping grouping) {
  std::map<std::string, std::string> group_of;
  std::set<int> present;
  for (const auto& m : meta) {
    const int key = grouping == Grouping::kResourceBin ? static_cast<int>(m.resource_bin())
                                                       : static_cast<int>(m.family);
    group_of[m.code] = grouping == Grouping::kResourceBin
                           ? std::string(to_string(m.resource_bin()))
                           : std::string(to_string(m.family));
    if (std::find(matrix.languages().begin(), matrix.languages().end(), m.code) !=
        matrix.languages().end()) {
      present.insert(key);
    }
  }
  std::vector<std::string> order;
  for (int key : present) {
    order.emplace_back(grouping == Grouping::kResourceBin
                           ? to_string(static_cast<ResourceBin>(key))
                           : to_string(static_cast<Family>(key)));
  }
  return group_average(matrix, group_of, order);
}

std::string GroupTable::to_tsv() const {
  auto cell = [](const std::optional<double>& v) { return v ? io::format_score(*v) : ""; };
  std::string out = "source\\target";
  for (const auto& g : groups) out += "\t" + g;
  out += "\tavg\n";
  for (std::size_t g = 0; g < groups.size(); ++g) {
    out += groups[g];
    for (std::size_t h = 0; h < groups.size(); ++h) out += "\t" + cell(at(g, h));
    out += "\t" + cell(row_avg[g]) + "\n";
  }
  out += "avg";
  for (const auto& v : col_avg) out += "\t" + cell(v);
  out += "\t" + cell(overall) + "\n";
  return out;
}

PivotComparison pivot_compare(const EvalMatrix& direct, const EvalMatrix& via_pivot,
                              std::string_view pivot) {
  const std::set<std::string> a(direct.languages().begin(), direct.languages().end());
  const std::set<std::string> b(via_pivot.languages().begin(), via_pivot.languages().end());
  if (a != b) {
    throw Error(ErrorKind::kShapeMismatch, "direct and pivot matrices cover different languages");
  }
  const std::size_t p = direct.index_of(pivot);
  PivotComparison out;
  out.delta = LanguageMatrix(direct.languages());
  for (std::size_t i = 0; i < direct.size(); ++i) {
    for (std::size_t j = 0; j < direct.size(); ++j) {
      if (i == j || i == p || j == p) continue;
      const auto d = direct.at(i, j);
      const auto v = via_pivot.at(via_pivot.index_of(direct.languages()[i]),
                                  via_pivot.index_of(direct.languages()[j]));
      if (!d || !v) continue;
      const double delta = *d - *v;
      out.delta.set(i, j, delta);
      ++out.compared;
      if (delta > 0.0) ++out.direct_wins;
      if (delta < 0.0) ++out.pivot_wins;
    }
  }
  if (out.compared > 0) {
    out.fraction_direct_wins =
        static_cast<double>(out.direct_wins) / static_cast<double>(out.compared);
    out.fraction_pivot_wins =
        static_cast<double>(out.pivot_wins) / static_cast<double>(out.compared);
  }
  return out;
}

}  // namespace mtbench::analysis
