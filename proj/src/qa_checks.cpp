#include "mtbench/qa_checks.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <json.hpp>

#include "mtbench/bleu.hpp"
#include "mtbench/error.hpp"
#include "mtbench/io.hpp"
#include "mtbench/unicode.hpp"
#include "mtbench/unigram_model.hpp"

namespace mtbench::qa {

void CheckConfig::validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorKind::kInvalidArgument, what); };
  if (!(copy_threshold > 0.0)) bad("copy_threshold must be > 0");
  if (!(corpus_gate_fraction > 0.0 && corpus_gate_fraction < 1.0)) {
    bad("corpus_gate_fraction must lie in (0, 1)");
  }
  if (!(length_ratio_min < length_ratio_max)) bad("length ratio bounds must be ordered");
  if (!(source_copy_similarity >= 0.0 && source_copy_similarity <= 1.0)) {
    bad("source_copy_similarity must lie in [0, 1]");
  }
}

CheckConfig CheckConfig::parse(std::string_view text) {
  CheckConfig cfg;
  std::size_t lineno = 0;
  for (const auto& raw : io::split_lines(text)) {
    ++lineno;
    std::string_view line = raw;
    line = line.substr(0, line.find('#'));
    line = unicode::trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorKind::kInvalidArgument,
                  "config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key(unicode::trim(line.substr(0, eq)));
    const std::string value(unicode::trim(line.substr(eq + 1)));
    auto number = [&]() {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
      if (ec != std::errc() || ptr != value.data() + value.size()) {
        throw Error(ErrorKind::kInvalidArgument,
                    "config line " + std::to_string(lineno) + ": '" + value + "' is not a number");
      }
      return v;
    };
    if (key == "copy_threshold") cfg.copy_threshold = number();
    else if (key == "margin_threshold") cfg.margin_threshold = number();
    else if (key == "corpus_gate_fraction") cfg.corpus_gate_fraction = number();
    else if (key == "length_ratio_min") cfg.length_ratio_min = number();
    else if (key == "length_ratio_max") cfg.length_ratio_max = number();
    else if (key == "source_copy_similarity") cfg.source_copy_similarity = number();
    else if (key == "fluency_z_max") cfg.fluency_z_max = number();
    else if (key == "langid_margin") cfg.langid_margin = number();
    else if (key == "langid_min_chars") cfg.langid_min_chars = static_cast<std::size_t>(number());
    else if (key == "symmetric_engine_check") {
      if (value != "true" && value != "false") {
        throw Error(ErrorKind::kInvalidArgument,
                    "config line " + std::to_string(lineno) + ": expected true or false");
      }
      cfg.symmetric_engine_check = value == "true";
    } else {
      throw Error(ErrorKind::kInvalidArgument, "config line " + std::to_string(lineno) +
                                                   ": unknown key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

std::string_view to_string(Verdict verdict) {
  return verdict == Verdict::kPass ? "pass" : "retranslate";
}

bool engine_copy_rule(double score_a, std::optional<double> score_b, const CheckConfig& cfg) {
  if (!(score_a > cfg.copy_threshold)) return false;
  if (!score_b) return true;
  return score_a - *score_b > cfg.margin_threshold;
}

bool engine_copy_decision(double score_a, std::optional<double> score_b, const CheckConfig& cfg) {
  if (engine_copy_rule(score_a, score_b, cfg)) return true;
  return cfg.symmetric_engine_check && score_b && engine_copy_rule(*score_b, score_a, cfg);
}

EngineCopyResult check_engine_copy(std::string_view x, std::optional<std::string_view> y_a,
                                   std::optional<std::string_view> y_b,
                                   const tokenizer::SubwordModel& model, const CheckConfig& cfg) {
  if (!y_a) {
    throw Error(ErrorKind::kMissingEngineOutput, "engine A output is required");
  }
  EngineCopyResult out;
  out.score_a = metrics::sp_bleu(model, x, *y_a, metrics::Level::kSentence).score;
  if (y_b) out.score_b = metrics::sp_bleu(model, x, *y_b, metrics::Level::kSentence).score;
  out.flagged = engine_copy_decision(out.score_a, out.score_b, cfg);
  return out;
}

Verdict corpus_gate(std::size_t flagged, std::size_t total, const CheckConfig& cfg) {
  if (total == 0) throw Error(ErrorKind::kEmptyInput, "no sentences to gate");
  const double fraction = static_cast<double>(flagged) / static_cast<double>(total);
  return fraction > cfg.corpus_gate_fraction ? Verdict::kRetranslate : Verdict::kPass;
}

Verdict corpus_gate(const std::vector<bool>& flags, const CheckConfig& cfg) {
  return corpus_gate(static_cast<std::size_t>(std::count(flags.begin(), flags.end(), true)),
                     flags.size(), cfg);
}

double edit_similarity(std::string_view a, std::string_view b) {
  const std::u32string s = unicode::decode_lossless(a);
  const std::u32string t = unicode::decode_lossless(b);
  const std::size_t longest = std::max(s.size(), t.size());
  if (longest == 0) return 1.0;
  std::vector<std::size_t> prev(t.size() + 1);
  std::vector<std::size_t> cur(t.size() + 1);
  for (std::size_t j = 0; j <= t.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= s.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= t.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (s[i - 1] == t[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return 1.0 - static_cast<double>(prev[t.size()]) / static_cast<double>(longest);
}

std::string normalize_for_copy(std::string_view text) {
  const std::string lowered = unicode::to_lower_ascii(unicode::nfkc(text));
  std::string out;
  bool pending_space = false;
  for (char32_t c : unicode::decode_lossless(lowered)) {
    if (unicode::is_whitespace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    unicode::append_utf8(out, c);
  }
  return out;
}

bool check_source_copy(std::string_view source, std::string_view hypothesis,
                       const CheckConfig& cfg) {
  constexpr double kTolerance = 1e-12;
  return edit_similarity(normalize_for_copy(source), normalize_for_copy(hypothesis)) >=
         cfg.source_copy_similarity - kTolerance;
}

bool check_length_ratio(std::string_view source, std::string_view hypothesis,
                        const CheckConfig& cfg) {
  const std::size_t src = unicode::length(source);
  if (src == 0) throw Error(ErrorKind::kEmptySource, "source sentence is empty");
  const double ratio = static_cast<double>(unicode::length(hypothesis)) / static_cast<double>(src);
  return ratio < cfg.length_ratio_min || ratio > cfg.length_ratio_max;
}

bool check_fluency(const CharLm& lm, std::string_view hypothesis, const CheckConfig& cfg) {
  if (!lm.trained()) throw Error(ErrorKind::kUntrainedModel, "character LM has not been trained");
  if (unicode::trim(hypothesis).empty()) return true;
  return lm.nll_per_char(hypothesis) >
         lm.calibration_mean() + cfg.fluency_z_max * lm.calibration_stddev();
}

bool check_language_id(const LangProfileSet& profiles, std::string_view hypothesis,
                       std::string_view expected, const CheckConfig& cfg) {
  if (!profiles.has_language(expected)) {
    throw Error(ErrorKind::kUnknownLanguage,
                "no language profile for '" + std::string(expected) + "'");
  }
  if (unicode::length(unicode::trim(hypothesis)) < cfg.langid_min_chars) return false;
  const auto sims = profiles.similarities(hypothesis);
  const std::string predicted = profiles.predict(hypothesis);
  if (predicted == expected) return false;
  return sims.at(predicted) - sims.at(std::string(expected)) > cfg.langid_margin;
}

std::vector<std::size_t> score_histogram(const std::vector<double>& scores, double bucket_width) {
  if (!(bucket_width > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "bucket width must be positive");
  }
  const auto buckets = static_cast<std::size_t>(std::ceil(100.0 / bucket_width));
  std::vector<std::size_t> counts(buckets, 0);
  for (double s : scores) {
    if (!(s >= 0.0 && s <= 100.0)) {
      throw Error(ErrorKind::kOutOfRange, fmt::format("score {} outside [0, 100]", s));
    }
    const auto idx = static_cast<std::size_t>(std::floor(s / bucket_width));
    ++counts[std::min(idx, buckets - 1)];
  }
  return counts;
}

QaReport run_qa(const QaInputs& in, const QaResources& res, const CheckConfig& cfg) {
  const std::size_t n = in.hypotheses.size();
  auto same_length = [&](std::size_t m, std::string_view what) {
    if (m != n) {
      throw Error(ErrorKind::kLengthMismatch, std::string(what) + " has " + std::to_string(m) +
                                                  " lines, hypotheses have " + std::to_string(n));
    }
  };
  same_length(in.sources.size(), "source");
  if (res.model != nullptr) {
    if (in.engine_a.empty() && n > 0) {
      throw Error(ErrorKind::kMissingEngineOutput, "engine A output is required");
    }
    same_length(in.engine_a.size(), "engine A output");
  }
  if (in.engine_b) same_length(in.engine_b->size(), "engine B output");

  QaReport report;
  report.sentences.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    SentenceFlags& f = report.sentences[i];
    const std::string& hyp = in.hypotheses[i];
    const std::string& src = in.sources[i];
    if (res.profiles != nullptr) {
      f.langid_fail = check_language_id(*res.profiles, hyp, res.expected_language, cfg);
    }
    f.source_copy = check_source_copy(src, hyp, cfg);
    f.length_outlier = check_length_ratio(src, hyp, cfg);
    if (res.lm != nullptr) f.disfluent = check_fluency(*res.lm, hyp, cfg);
    if (res.model != nullptr) {
      std::optional<std::string_view> y_b;
      if (in.engine_b) y_b = (*in.engine_b)[i];
      const auto copy = check_engine_copy(hyp, in.engine_a[i], y_b, *res.model, cfg);
      f.engine_copy = copy.flagged;
      f.score_a = copy.score_a;
      f.score_b = copy.score_b;
    }
  }
  return merge_reports({report}, cfg);
}

QaReport merge_reports(const std::vector<QaReport>& parts, const CheckConfig& cfg) {
  QaReport out;
  for (const auto& p : parts) {
    out.sentences.insert(out.sentences.end(), p.sentences.begin(), p.sentences.end());
  }
  out.engine_copy_count = static_cast<std::size_t>(std::count_if(
      out.sentences.begin(), out.sentences.end(), [](const auto& f) { return f.engine_copy; }));
  if (!out.sentences.empty()) {
    out.flagged_fraction =
        static_cast<double>(out.engine_copy_count) / static_cast<double>(out.sentences.size());
    out.verdict = corpus_gate(out.engine_copy_count, out.sentences.size(), cfg);
  }
  return out;
}

std::string report_tsv(const QaReport& report) {
  auto opt = [](const std::optional<double>& v) { return v ? io::format_score(*v) : ""; };
  std::string out =
      "line\tlangid_fail\tsource_copy\tlength_outlier\tdisfluent\tengine_copy\tspbleu_a\tspbleu_b\n";
  for (std::size_t i = 0; i < report.sentences.size(); ++i) {
    const auto& f = report.sentences[i];
    out += fmt::format("{}\t{:d}\t{:d}\t{:d}\t{:d}\t{:d}\t{}\t{}\n", i + 1, f.langid_fail,
                       f.source_copy, f.length_outlier, f.disfluent, f.engine_copy,
                       opt(f.score_a), opt(f.score_b));
  }
  return out;
}

std::string report_json(const QaReport& report, const CheckConfig& cfg) {
  auto count = [&](bool SentenceFlags::*member) {
    return std::count_if(report.sentences.begin(), report.sentences.end(),
                         [&](const auto& f) { return f.*member; });
  };
  nlohmann::ordered_json j;
  j["sentences"] = report.sentences.size();
  j["verdict"] = std::string(to_string(report.verdict));
  j["engine_copy_count"] = report.engine_copy_count;
  j["flagged_fraction"] = report.flagged_fraction;
  j["corpus_gate_fraction"] = cfg.corpus_gate_fraction;
  j["counts"] = {{"langid_fail", count(&SentenceFlags::langid_fail)},
                 {"source_copy", count(&SentenceFlags::source_copy)},
                 {"length_outlier", count(&SentenceFlags::length_outlier)},
                 {"disfluent", count(&SentenceFlags::disfluent)},
                 {"engine_copy", count(&SentenceFlags::engine_copy)}};
  j["thresholds"] = {{"copy_threshold", cfg.copy_threshold},
                     {"margin_threshold", cfg.margin_threshold},
                     {"symmetric_engine_check", cfg.symmetric_engine_check}};
  return j.dump();
}

std::string histogram_tsv(const std::vector<std::size_t>& counts, double bucket_width) {
  std::string out = "bucket_low\tbucket_high\tcount\n";
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double lo = static_cast<double>(i) * bucket_width;
    const double hi = std::min(100.0, lo + bucket_width);
    out += fmt::format("{:g}\t{:g}\t{}\n", lo, hi, counts[i]);
  }
  return out;
}

}  // namespace mtbench::qa
