#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mtbench/char_lm.hpp"
#include "mtbench/langid.hpp"

namespace mtbench::tokenizer {
class SubwordModel;
}

namespace mtbench::qa {

struct CheckConfig {
  // Engine-copy rule: spBLEU(x, y_A) > copy_threshold, and when engine B
  // exists also spBLEU(x, y_A) - spBLEU(x, y_B) > margin_threshold.
  double copy_threshold = 50.0;
  double margin_threshold = 20.0;
  // A batch is sent back when the engine-copy share exceeds this.
  double corpus_gate_fraction = 0.10;
  double length_ratio_min = 0.5;
  double length_ratio_max = 2.0;
  double source_copy_similarity = 0.9;
  double fluency_z_max = 3.0;
  double langid_margin = 0.05;
  std::size_t langid_min_chars = 20;
  // Also apply the rule with engines A and B swapped.
  bool symmetric_engine_check = true;

  // Throws InvalidArgument on a violated invariant.
  void validate() const;
  // `key = value` lines; `#` starts a comment. Unknown keys are rejected.
  static CheckConfig parse(std::string_view text);
};

enum class Verdict { kPass, kRetranslate };
std::string_view to_string(Verdict verdict);

// The published rule in one direction, strict inequalities.
bool engine_copy_rule(double score_a, std::optional<double> score_b, const CheckConfig& cfg);

// engine_copy_rule, plus the swapped direction when configured and B exists.
bool engine_copy_decision(double score_a, std::optional<double> score_b, const CheckConfig& cfg);

struct EngineCopyResult {
  bool flagged = false;
  double score_a = 0.0;
  std::optional<double> score_b;
};

// Sentence-level spBLEU of x against each engine output. Throws
// MissingEngineOutput when y_a is absent.
EngineCopyResult check_engine_copy(std::string_view x, std::optional<std::string_view> y_a,
                                   std::optional<std::string_view> y_b,
                                   const tokenizer::SubwordModel& model, const CheckConfig& cfg);

// Throws EmptyInput.
Verdict corpus_gate(const std::vector<bool>& flags, const CheckConfig& cfg);
Verdict corpus_gate(std::size_t flagged, std::size_t total, const CheckConfig& cfg);

// 1 - levenshtein / max length over scalars; 1 for two empty strings.
double edit_similarity(std::string_view a, std::string_view b);
// NFKC, ASCII lowercase, whitespace runs collapsed and trimmed.
std::string normalize_for_copy(std::string_view text);

bool check_source_copy(std::string_view source, std::string_view hypothesis,
                       const CheckConfig& cfg);

// Throws EmptySource.
bool check_length_ratio(std::string_view source, std::string_view hypothesis,
                        const CheckConfig& cfg);

// Empty hypotheses are flagged. Throws UntrainedModel.
bool check_fluency(const CharLm& lm, std::string_view hypothesis, const CheckConfig& cfg);

// Skipped (false) below cfg.langid_min_chars. Throws UnknownLanguage.
bool check_language_id(const LangProfileSet& profiles, std::string_view hypothesis,
                       std::string_view expected, const CheckConfig& cfg);

// Counts per [0,w), [w,2w), ..., with 100 in the last bucket. Throws
// OutOfRange for values outside [0, 100].
std::vector<std::size_t> score_histogram(const std::vector<double>& scores,
                                         double bucket_width = 10.0);

struct SentenceFlags {
  bool langid_fail = false;
  bool source_copy = false;
  bool length_outlier = false;
  bool disfluent = false;
  bool engine_copy = false;
  std::optional<double> score_a;
  std::optional<double> score_b;

  bool operator==(const SentenceFlags&) const = default;
};

struct QaInputs {
  std::vector<std::string> sources;
  std::vector<std::string> hypotheses;
  std::vector<std::string> engine_a;
  std::optional<std::vector<std::string>> engine_b;
};

// Checks whose resource is null are skipped.
struct QaResources {
  const tokenizer::SubwordModel* model = nullptr;
  const CharLm* lm = nullptr;
  const LangProfileSet* profiles = nullptr;
  std::string expected_language;
};

struct QaReport {
  std::vector<SentenceFlags> sentences;
  Verdict verdict = Verdict::kPass;
  std::size_t engine_copy_count = 0;
  double flagged_fraction = 0.0;
};

QaReport run_qa(const QaInputs& inputs, const QaResources& resources, const CheckConfig& cfg);

// Concatenates per-sentence results and recomputes the gate.
QaReport merge_reports(const std::vector<QaReport>& parts, const CheckConfig& cfg);

// Header plus one row per sentence.
std::string report_tsv(const QaReport& report);
std::string report_json(const QaReport& report, const CheckConfig& cfg);
std::string histogram_tsv(const std::vector<std::size_t>& counts, double bucket_width = 10.0);

}  // namespace mtbench::qa
