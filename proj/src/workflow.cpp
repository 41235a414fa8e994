#include "mtbench/workflow.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <json.hpp>

#include "mtbench/error.hpp"
#include "mtbench/io.hpp"

namespace mtbench::workflow {

std::string_view to_string(Category category) {
  switch (category) {
    case Category::kGrammar: return "grammar";
    case Category::kPunctuation: return "punctuation";
    case Category::kSpelling: return "spelling";
    case Category::kCapitalization: return "capitalization";
    case Category::kAdditionOmission: return "addition_omission";
    case Category::kMistranslation: return "mistranslation";
    case Category::kUnnaturalTranslation: return "unnatural_translation";
    case Category::kUntranslatedText: return "untranslated_text";
    case Category::kRegister: return "register";
  }
  return "?";
}

std::string_view to_string(Severity severity) {
  switch (severity) {
    case Severity::kMinor: return "minor";
    case Severity::kMajor: return "major";
    case Severity::kCritical: return "critical";
  }
  return "?";
}

std::optional<Category> parse_category(std::string_view text) {
  for (int i = 0; i <= static_cast<int>(Category::kRegister); ++i) {
    const auto c = static_cast<Category>(i);
    if (to_string(c) == text) return c;
  }
  return std::nullopt;
}

std::optional<Severity> parse_severity(std::string_view text) {
  for (Severity s : {Severity::kMinor, Severity::kMajor, Severity::kCritical}) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

double SeverityWeights::operator()(Severity s) const {
  switch (s) {
    case Severity::kMinor: return minor;
    case Severity::kMajor: return major;
    case Severity::kCritical: return critical;
  }
  return 0.0;
}

QualityScore quality_score(const std::vector<ErrorAnnotation>& annotations,
                           std::int64_t word_count, const SeverityWeights& weights) {
  if (word_count <= 0) {
    throw Error(ErrorKind::kEmptyBatch, "word count must be positive");
  }
  QualityScore q;
  q.word_count = word_count;
  for (const auto& a : annotations) q.penalty_points += weights(a.severity);
  q.value = std::max(0.0, 100.0 * (1.0 - q.penalty_points / static_cast<double>(word_count)));
  return q;
}

std::string_view to_string(State state) {
  switch (state) {
    case State::kSourced: return "sourced";
    case State::kTranslated: return "translated";
    case State::kAutoChecking: return "auto_checking";
    case State::kAutoFailed: return "auto_failed";
    case State::kInHumanEval: return "in_human_eval";
    case State::kRetranslating: return "retranslating";
    case State::kAccepted: return "accepted";
  }
  return "?";
}

std::string_view to_string(EventType event) {
  switch (event) {
    case EventType::kTranslated: return "translated";
    case EventType::kAutoPass: return "auto_pass";
    case EventType::kAutoFail: return "auto_fail";
    case EventType::kEvalScored: return "eval_scored";
    case EventType::kRetranslationDone: return "retranslation_done";
  }
  return "?";
}

std::optional<EventType> parse_event(std::string_view text) {
  for (EventType e : {EventType::kTranslated, EventType::kAutoPass, EventType::kAutoFail,
                      EventType::kEvalScored, EventType::kRetranslationDone}) {
    if (to_string(e) == text) return e;
  }
  return std::nullopt;
}

WorkItem make_item(std::string id, std::string language, std::string provider,
                   std::int64_t created_at) {
  WorkItem item;
  item.id = std::move(id);
  item.language = std::move(language);
  item.provider = std::move(provider);
  item.created_at = created_at;
  return item;
}

bool is_legal(State state, EventType event) {
  switch (event) {
    case EventType::kTranslated:
      return state == State::kSourced;
    case EventType::kAutoPass:
    case EventType::kAutoFail:
      return state == State::kTranslated || state == State::kAutoChecking;
    case EventType::kEvalScored:
      return state == State::kInHumanEval;
    case EventType::kRetranslationDone:
      return state == State::kAutoFailed || state == State::kRetranslating;
  }
  return false;
}

WorkItem advance(const WorkItem& item, const Event& event, const Policy& policy) {
  if (!is_legal(item.state, event.type)) {
    throw Error(ErrorKind::kIllegalTransition,
                fmt::format("event '{}' is not allowed in state '{}' (item '{}')",
                            to_string(event.type), to_string(item.state), item.id));
  }
  WorkItem next = item;
  auto move_to = [&](State to) {
    next.transitions.push_back({next.state, to, event.type, event.timestamp});
    next.state = to;
  };
  switch (event.type) {
    case EventType::kTranslated:
      move_to(State::kTranslated);
      break;
    case EventType::kAutoPass:
    case EventType::kAutoFail:
      if (next.state == State::kTranslated) move_to(State::kAutoChecking);
      next.last_auto_pass = event.type == EventType::kAutoPass;
      move_to(event.type == EventType::kAutoPass ? State::kInHumanEval : State::kAutoFailed);
      break;
    case EventType::kEvalScored:
      if (!(event.score >= 0.0 && event.score <= 100.0)) {
        throw Error(ErrorKind::kOutOfRange,
                    fmt::format("quality score {} outside [0, 100]", event.score));
      }
      next.score_history.push_back(event.score);
      if (event.score >= policy.acceptance_threshold) {
        if (next.needs_confirmation) {
          next.needs_confirmation = false;
          move_to(State::kInHumanEval);
        } else {
          move_to(State::kAccepted);
        }
      } else {
        next.needs_confirmation = event.score < policy.re_eval_threshold;
        move_to(State::kRetranslating);
      }
      break;
    case EventType::kRetranslationDone:
      if (next.state == State::kAutoFailed) move_to(State::kRetranslating);
      ++next.round;
      move_to(State::kAutoChecking);
      break;
  }
  return next;
}

std::int64_t parse_timestamp(std::string_view text) {
  int y = 0;
  unsigned mo = 0;
  unsigned d = 0;
  int h = 0;
  int mi = 0;
  int s = 0;
  char tail = 0;
  const std::string buf(text);
  if (std::sscanf(buf.c_str(), "%4d-%2u-%2uT%2d:%2d:%2d%c", &y, &mo, &d, &h, &mi, &s, &tail) != 7 ||
      tail != 'Z' || buf.size() != 20) {
    throw Error(ErrorKind::kMalformedLog, "bad timestamp '" + buf + "'");
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{mo},
                                        std::chrono::day{d}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 60) {
    throw Error(ErrorKind::kMalformedLog, "bad timestamp '" + buf + "'");
  }
  const auto days = std::chrono::sys_days(ymd).time_since_epoch().count();
  return static_cast<std::int64_t>(days) * 86400 + h * 3600 + mi * 60 + s;
}

std::string format_timestamp(std::int64_t seconds) {
  std::int64_t days = seconds / 86400;
  std::int64_t rem = seconds % 86400;
  if (rem < 0) {
    rem += 86400;
    --days;
  }
  const std::chrono::year_month_day ymd{
      std::chrono::sys_days{std::chrono::days{static_cast<int>(days)}}};
  return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}Z", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                     rem / 3600, (rem % 3600) / 60, rem % 60);
}

std::string format_record(const LogRecord& record) {
  nlohmann::ordered_json j;
  j["item"] = record.item;
  j["event"] = record.event;
  nlohmann::ordered_json payload = nlohmann::ordered_json::object();
  if (!record.language.empty()) payload["language"] = record.language;
  if (!record.provider.empty()) payload["provider"] = record.provider;
  if (record.score) payload["score"] = *record.score;
  j["payload"] = payload;
  j["timestamp"] = format_timestamp(record.timestamp);
  return j.dump();
}

LogRecord parse_record(std::string_view line) {
  const auto j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorKind::kMalformedLog, "log record is not a JSON object");
  }
  auto str = [&](const nlohmann::json& obj, const char* key) -> std::string {
    if (!obj.contains(key) || !obj[key].is_string()) {
      throw Error(ErrorKind::kMalformedLog, std::string("missing string field '") + key + "'");
    }
    return obj[key].get<std::string>();
  };
  LogRecord r;
  r.item = str(j, "item");
  r.event = str(j, "event");
  r.timestamp = parse_timestamp(str(j, "timestamp"));
  if (j.contains("payload")) {
    const auto& p = j["payload"];
    if (!p.is_object()) throw Error(ErrorKind::kMalformedLog, "payload must be an object");
    if (p.contains("language")) r.language = str(p, "language");
    if (p.contains("provider")) r.provider = str(p, "provider");
    if (p.contains("score")) {
      if (!p["score"].is_number()) throw Error(ErrorKind::kMalformedLog, "score must be a number");
      r.score = p["score"].get<double>();
    }
  }
  return r;
}

std::map<std::string, WorkItem> replay(const std::vector<std::string>& log_lines,
                                       const Policy& policy) {
  std::map<std::string, WorkItem> items;
  for (std::size_t i = 0; i < log_lines.size(); ++i) {
    if (log_lines[i].empty()) continue;
    const std::string where = "log line " + std::to_string(i + 1) + ": ";
    try {
      const LogRecord r = parse_record(log_lines[i]);
      if (r.event == "sourced") {
        if (items.count(r.item)) {
          throw Error(ErrorKind::kMalformedLog, "item '" + r.item + "' sourced twice");
        }
        items.emplace(r.item, make_item(r.item, r.language.empty() ? r.item : r.language,
                                        r.provider, r.timestamp));
        continue;
      }
      const auto type = parse_event(r.event);
      if (!type) throw Error(ErrorKind::kMalformedLog, "unknown event '" + r.event + "'");
      auto it = items.find(r.item);
      if (it == items.end()) {
        throw Error(ErrorKind::kMalformedLog, "event for unknown item '" + r.item + "'");
      }
      if (*type == EventType::kEvalScored && !r.score) {
        throw Error(ErrorKind::kMalformedLog, "eval_scored without payload score");
      }
      it->second = advance(it->second, Event{*type, r.score.value_or(0.0), r.timestamp}, policy);
    } catch (const Error& e) {
      throw Error(e.kind(), where + e.what());
    }
  }
  return items;
}

namespace {

constexpr double kSecondsPerDay = 86400.0;

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

Stats workflow_stats(const std::vector<WorkItem>& items) {
  Stats st;
  st.items = items.size();
  std::vector<double> rounds;
  std::vector<double> translate_days;
  std::vector<double> retranslate_days;
  std::vector<double> total_days;
  for (const auto& item : items) {
    if (item.state == State::kAccepted) {
      ++st.accepted;
    } else {
      ++st.in_flight;
    }
    if (item.round > 0) {
      rounds.push_back(item.round);
      st.max_retranslations = std::max(st.max_retranslations, item.round);
    }
    std::int64_t retranslate_start = 0;
    bool retranslate_open = false;
    double retranslating = 0.0;
    bool translated_seen = false;
    for (const auto& t : item.transitions) {
      if (t.to == State::kTranslated && !translated_seen) {
        translated_seen = true;
        translate_days.push_back(static_cast<double>(t.timestamp - item.created_at) /
                                 kSecondsPerDay);
      }
      if ((t.to == State::kAutoFailed || t.to == State::kRetranslating) && !retranslate_open) {
        retranslate_start = t.timestamp;
        retranslate_open = true;
      }
      if (t.event == EventType::kRetranslationDone && t.to == State::kAutoChecking &&
          retranslate_open) {
        retranslating += static_cast<double>(t.timestamp - retranslate_start) / kSecondsPerDay;
        retranslate_open = false;
      }
      if (t.to == State::kAccepted) {
        total_days.push_back(static_cast<double>(t.timestamp - item.created_at) / kSecondsPerDay);
      }
    }
    if (item.round > 0) retranslate_days.push_back(retranslating);
  }
  st.requiring_retranslation = rounds.size();
  st.avg_retranslations = mean(rounds);
  st.avg_days_to_translate = mean(translate_days);
  st.avg_days_to_retranslate = mean(retranslate_days);
  st.avg_days_total = mean(total_days);
  if (!total_days.empty()) {
    st.min_days_total = *std::min_element(total_days.begin(), total_days.end());
    st.max_days_total = *std::max_element(total_days.begin(), total_days.end());
  }
  return st;
}

std::string stats_tsv(const Stats& st) {
  std::string out = "statistic\tvalue\n";
  out += fmt::format("items\t{}\n", st.items);
  out += fmt::format("accepted\t{}\n", st.accepted);
  out += fmt::format("in_flight\t{}\n", st.in_flight);
  out += fmt::format("languages_requiring_retranslation\t{}\n", st.requiring_retranslation);
  out += fmt::format("avg_retranslations\t{:.2f}\n", st.avg_retranslations);
  out += fmt::format("max_retranslations\t{}\n", st.max_retranslations);
  out += fmt::format("avg_days_to_translate\t{:.2f}\n", st.avg_days_to_translate);
  out += fmt::format("avg_days_to_retranslate\t{:.2f}\n", st.avg_days_to_retranslate);
  out += fmt::format("avg_days_per_language\t{:.2f}\n", st.avg_days_total);
  out += fmt::format("shortest_turnaround_days\t{:.2f}\n", st.min_days_total);
  out += fmt::format("longest_turnaround_days\t{:.2f}\n", st.max_days_total);
  return out;
}

std::string items_tsv(const std::map<std::string, WorkItem>& items) {
  std::string out = "item\tlanguage\tprovider\tstate\tround\tlast_auto_check\tscores\n";
  for (const auto& [id, item] : items) {
    std::vector<std::string> scores;
    for (double s : item.score_history) scores.push_back(fmt::format("{:g}", s));
    const char* autocheck =
        !item.last_auto_pass ? "" : (*item.last_auto_pass ? "pass" : "fail");
    out += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\n", id, item.language, item.provider,
                       to_string(item.state), item.round, autocheck, io::join(scores, ","));
  }
  return out;
}

}  // namespace mtbench::workflow
