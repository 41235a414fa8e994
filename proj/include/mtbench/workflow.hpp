#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mtbench::workflow {

enum class Category {
  kGrammar,
  kPunctuation,
  kSpelling,
  kCapitalization,
  kAdditionOmission,
  kMistranslation,
  kUnnaturalTranslation,
  kUntranslatedText,
  kRegister,
};

enum class Severity { kMinor, kMajor, kCritical };

std::string_view to_string(Category category);
std::string_view to_string(Severity severity);
std::optional<Category> parse_category(std::string_view text);
std::optional<Severity> parse_severity(std::string_view text);

struct ErrorAnnotation {
  Category category = Category::kGrammar;
  Severity severity = Severity::kMinor;
  std::size_t sentence_id = 0;
  std::string note;
};

struct SeverityWeights {
  double minor = 1.0;
  double major = 5.0;
  double critical = 25.0;

  double operator()(Severity s) const;
};

struct QualityScore {
  double value = 100.0;
  double penalty_points = 0.0;
  std::int64_t word_count = 0;
};

// value = max(0, 100 * (1 - penalty_points / word_count)). Throws EmptyBatch
// when word_count <= 0.
QualityScore quality_score(const std::vector<ErrorAnnotation>& annotations,
                           std::int64_t word_count, const SeverityWeights& weights = {});

enum class State {
  kSourced,
  kTranslated,
  kAutoChecking,
  kAutoFailed,
  kInHumanEval,
  kRetranslating,
  kAccepted,
};

enum class EventType { kTranslated, kAutoPass, kAutoFail, kEvalScored, kRetranslationDone };

std::string_view to_string(State state);
std::string_view to_string(EventType event);
std::optional<EventType> parse_event(std::string_view text);

struct Event {
  EventType type = EventType::kTranslated;
  double score = 0.0;  // eval_scored only
  std::int64_t timestamp = 0;
};

struct Policy {
  double acceptance_threshold = 90.0;
  // A human score below this forces a second passing evaluation after the
  // re-translation before acceptance.
  double re_eval_threshold = 80.0;
};

struct Transition {
  State from = State::kSourced;
  State to = State::kSourced;
  EventType event = EventType::kTranslated;
  std::int64_t timestamp = 0;
};

struct WorkItem {
  std::string id;
  std::string language;
  std::string provider;
  State state = State::kSourced;
  int round = 0;
  std::vector<double> score_history;
  std::optional<bool> last_auto_pass;
  bool needs_confirmation = false;
  std::int64_t created_at = 0;
  std::vector<Transition> transitions;
};

WorkItem make_item(std::string id, std::string language, std::string provider,
                   std::int64_t created_at);

// Pure transition function. Throws IllegalTransition naming state and event.
WorkItem advance(const WorkItem& item, const Event& event, const Policy& policy = {});

bool is_legal(State state, EventType event);

// One JSON object per line: {"item", "event", "payload", "timestamp"}.
// The first record of an item has event "sourced" with payload
// {"language", "provider"}.
struct LogRecord {
  std::string item;
  std::string event;
  std::string language;  // sourced only
  std::string provider;  // sourced only
  std::optional<double> score;  // eval_scored only
  std::int64_t timestamp = 0;
};

std::string format_record(const LogRecord& record);
LogRecord parse_record(std::string_view line);

// Rebuilds every item from the log. Throws MalformedLog or IllegalTransition
// (with the offending line number).
std::map<std::string, WorkItem> replay(const std::vector<std::string>& log_lines,
                                       const Policy& policy = {});

struct Stats {
  std::size_t items = 0;
  std::size_t accepted = 0;
  std::size_t in_flight = 0;
  std::size_t requiring_retranslation = 0;
  double avg_retranslations = 0.0;  // over items with at least one
  int max_retranslations = 0;
  double avg_days_to_translate = 0.0;
  double avg_days_to_retranslate = 0.0;
  double avg_days_total = 0.0;  // accepted items, sourced -> accepted
  double min_days_total = 0.0;
  double max_days_total = 0.0;
};

Stats workflow_stats(const std::vector<WorkItem>& items);

std::string stats_tsv(const Stats& stats);
std::string items_tsv(const std::map<std::string, WorkItem>& items);

// "YYYY-MM-DDTHH:MM:SSZ" <-> seconds since the Unix epoch.
std::int64_t parse_timestamp(std::string_view text);
std::string format_timestamp(std::int64_t seconds);

}  // namespace mtbench::workflow
