#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mtbench/corpus.hpp"

namespace mtbench::tokenizer {
class SubwordModel;
}

namespace mtbench::analysis {

// Square language-by-language table; row = source, column = target.
// Cells may be absent; the diagonal is always absent.
class LanguageMatrix {
 public:
  LanguageMatrix() = default;
  explicit LanguageMatrix(std::vector<std::string> languages);

  std::size_t size() const { return languages_.size(); }
  const std::vector<std::string>& languages() const { return languages_; }
  // Throws UnknownLanguage.
  std::size_t index_of(std::string_view code) const;

  std::optional<double> at(std::size_t src, std::size_t tgt) const;
  // Throws InvalidArgument on the diagonal or a non-finite value.
  void set(std::size_t src, std::size_t tgt, double value);
  void clear(std::size_t src, std::size_t tgt);
  bool fully_defined() const;

  // Header row and first column carry the codes; absent cells are empty.
  std::string to_tsv() const;
  // Throws MalformedMatrix.
  static LanguageMatrix parse_tsv(std::string_view text);

 private:
  std::vector<std::string> languages_;
  std::vector<std::optional<double>> cells_;
};

// spBLEU per direction; every defined cell lies in [0, 100].
using EvalMatrix = LanguageMatrix;

// Throws OutOfRange if a defined cell is outside [0, 100].
void check_score_range(const EvalMatrix& matrix);

using Direction = std::pair<std::string, std::string>;

// Corpus spBLEU of each provided hypothesis list against the target side.
// Missing directions stay absent. Throws UnknownDirection or
// MisalignedHypothesis. Directions are scored on up to `threads` threads.
EvalMatrix evaluate_matrix(const corpus::AlignedCorpus& corpus,
                           const std::map<Direction, std::vector<std::string>>& hypotheses,
                           const tokenizer::SubwordModel& model, unsigned threads = 1);

// Reads `<dir>/<src>-<tgt>.txt` for every ordered pair of corpus languages
// whose file exists.
std::map<Direction, std::vector<std::string>> load_hypotheses(
    const corpus::AlignedCorpus& corpus, const std::filesystem::path& dir);

// Mean corpus spBLEU over all provided directions, per line subset.
struct SubsetRow {
  std::string label;
  std::size_t num_sentences = 0;
  std::optional<double> avg_score;
  std::size_t directions = 0;
};

std::vector<SubsetRow> evaluate_subsets(
    const corpus::AlignedCorpus& corpus,
    const std::map<Direction, std::vector<std::string>>& hypotheses,
    const tokenizer::SubwordModel& model,
    const std::vector<std::pair<std::string, std::vector<std::size_t>>>& subsets,
    unsigned threads = 1);

std::string subsets_tsv(const std::vector<SubsetRow>& rows);

enum class ResourceBin { kVeryLow, kLow, kMedium, kHigh };

std::string_view to_string(ResourceBin bin);

// very_low < 100K <= low < 1M <= medium < 100M <= high.
ResourceBin resource_bin(std::uint64_t bitext_count);

enum class Family {
  kAfroAsiatic,
  kAustronesian,
  kBaltoSlavic,
  kBantu,
  kDravidian,
  kGermanic,
  kIndoAryan,
  kNiloticOtherAc,
  kRomance,
  kSinoTibetanKraDai,
  kTurkic,
};

std::string_view to_string(Family family);
std::optional<Family> parse_family(std::string_view text);

struct LanguageMeta {
  std::string code;
  Family family = Family::kGermanic;
  std::uint64_t bitext_with_english = 0;
  std::uint64_t mono_sentences = 0;

  ResourceBin resource_bin() const { return analysis::resource_bin(bitext_with_english); }
};

// TSV with header `code	family	bitext	mono`. Throws MalformedMetadata.
std::vector<LanguageMeta> parse_language_meta(std::string_view text);

struct GroupTable {
  std::vector<std::string> groups;
  // groups x groups, row-major; absent when no defined direction falls in it.
  std::vector<std::optional<double>> cells;
  std::vector<std::size_t> pair_counts;
  std::vector<std::optional<double>> row_avg;
  std::vector<std::optional<double>> col_avg;
  std::optional<double> overall;

  std::optional<double> at(std::size_t g, std::size_t h) const {
    return cells[g * groups.size() + h];
  }
  std::string to_tsv() const;
};

// Cell (G, H) averages defined off-diagonal directions with source in G and
// target in H. Margins average the defined group cells. Throws MissingMeta.
GroupTable group_average(const EvalMatrix& matrix,
                         const std::map<std::string, std::string>& group_of,
                         const std::vector<std::string>& group_order);

enum class Grouping { kResourceBin, kFamily };

GroupTable group_average(const EvalMatrix& matrix, const std::vector<LanguageMeta>& meta,
                         Grouping grouping);

struct PivotComparison {
  LanguageMatrix delta;  // direct - via pivot
  std::size_t compared = 0;
  std::size_t direct_wins = 0;
  std::size_t pivot_wins = 0;
  double fraction_direct_wins = 0.0;
  double fraction_pivot_wins = 0.0;
};

// Compares directions defined in both matrices that do not involve the
// pivot. Throws ShapeMismatch or UnknownLanguage.
PivotComparison pivot_compare(const EvalMatrix& direct, const EvalMatrix& via_pivot,
                              std::string_view pivot);

}  // namespace mtbench::analysis
