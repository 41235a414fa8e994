#include "mtbench/bleu.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <thread>

#include "mtbench/unicode.hpp"
#include "mtbench/unigram_model.hpp"

namespace mtbench::metrics {

std::string_view to_string(Metric metric) {
  switch (metric) {
    case Metric::kBleu: return "bleu";
    case Metric::kSpBleu: return "spbleu";
    case Metric::kCharBleu: return "chrbleu";
  }
  return "?";
}

std::string_view to_string(Level level) {
  return level == Level::kSentence ? "sentence" : "corpus";
}

Metric parse_metric(std::string_view text) {
  if (text == "bleu") return Metric::kBleu;
  if (text == "spbleu") return Metric::kSpBleu;
  if (text == "chrbleu") return Metric::kCharBleu;
  throw Error(ErrorKind::kInvalidArgument, "unknown metric '" + std::string(text) + "'");
}

Level parse_level(std::string_view text) {
  if (text == "sentence") return Level::kSentence;
  if (text == "corpus") return Level::kCorpus;
  throw Error(ErrorKind::kInvalidArgument, "unknown level '" + std::string(text) + "'");
}

NgramStats& NgramStats::operator+=(const NgramStats& other) {
  for (std::size_t i = 0; i < matches.size() && i < other.matches.size(); ++i) {
    matches[i] += other.matches[i];
    totals[i] += other.totals[i];
  }
  hyp_length += other.hyp_length;
  ref_length += other.ref_length;
  return *this;
}

double BleuScore::precision(int order) const {
  const auto i = static_cast<std::size_t>(order - 1);
  if (stats.totals.at(i) == 0) return 0.0;
  return static_cast<double>(stats.matches[i]) / static_cast<double>(stats.totals[i]);
}

std::string make_signature(std::string_view tokenization, Smoothing smoothing, int max_order) {
  return fmt::format("nrefs:1|tok:{}|smooth:{}|order:{}|eff:yes|version:mtbench-1", tokenization,
                     smoothing == Smoothing::kAddOne ? "add1" : "none", max_order);
}

BleuScore score_from_stats(const NgramStats& stats, Smoothing smoothing, std::string signature) {
  BleuScore out;
  out.stats = stats;
  out.signature = std::move(signature);
  if (stats.hyp_length == 0) return out;

  out.brevity_penalty =
      stats.hyp_length > stats.ref_length
          ? 1.0
          : std::exp(1.0 - static_cast<double>(stats.ref_length) /
                               static_cast<double>(stats.hyp_length));
  out.effective_order = static_cast<int>(std::count_if(
      stats.totals.begin(), stats.totals.end(), [](std::size_t v) { return v > 0; }));
  double log_sum = 0.0;
  for (std::size_t i = 0; i < stats.totals.size(); ++i) {
    if (stats.totals[i] == 0) continue;
    double m = static_cast<double>(stats.matches[i]);
    double t = static_cast<double>(stats.totals[i]);
    if (smoothing == Smoothing::kAddOne && i >= 1 && stats.matches[i] == 0) {
      m += 1.0;
      t += 1.0;
    }
    if (m == 0.0) return out;
    log_sum += std::log(m / t);
  }
  out.score = std::clamp(100.0 * out.brevity_penalty * std::exp(log_sum / out.effective_order), 0.0, 100.0);
  return out;
}

std::vector<std::string> word_tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  for (char32_t c : unicode::decode_lossless(text)) {
    if (unicode::is_whitespace(c)) {
      flush();
    } else if (unicode::is_punctuation(c)) {
      flush();
      unicode::append_utf8(current, c);
      flush();
    } else {
      unicode::append_utf8(current, c);
    }
  }
  flush();
  return tokens;
}

std::u32string char_tokenize(std::string_view text) { return unicode::decode_lossless(text); }

namespace {

std::vector<char32_t> as_vector(const std::u32string& s) { return {s.begin(), s.end()}; }

std::string sp_tokenization(const tokenizer::SubwordModel& model) {
  return "spm-" + model.fingerprint();
}

NgramStats pair_stats(Metric metric, const tokenizer::SubwordModel* model, std::string_view hyp,
                      std::string_view ref) {
  switch (metric) {
    case Metric::kBleu: {
      const auto h = word_tokenize(hyp);
      const auto r = word_tokenize(ref);
      return ngram_stats<std::string>(h, r);
    }
    case Metric::kCharBleu: {
      const auto h = as_vector(char_tokenize(hyp));
      const auto r = as_vector(char_tokenize(ref));
      return ngram_stats<char32_t>(h, r);
    }
    case Metric::kSpBleu: {
      if (model == nullptr) {
        throw Error(ErrorKind::kInvalidArgument, "spBLEU requires a subword model");
      }
      const auto h = model->encode(hyp);
      const auto r = model->encode(ref);
      return ngram_stats<int>(h, r);
    }
  }
  return NgramStats{};
}

std::string tokenization_name(Metric metric, const tokenizer::SubwordModel* model) {
  switch (metric) {
    case Metric::kBleu: return "word";
    case Metric::kCharBleu: return "char";
    case Metric::kSpBleu: return sp_tokenization(*model);
  }
  return "?";
}

}  // namespace

BleuScore sp_bleu(const tokenizer::SubwordModel& model, std::string_view hypothesis,
                  std::string_view reference, Level level) {
  const auto h = model.encode(hypothesis);
  const auto r = model.encode(reference);
  if (level == Level::kSentence) {
    return sentence_bleu<int>(h, r, Smoothing::kAddOne, kDefaultMaxOrder, sp_tokenization(model));
  }
  return corpus_bleu<int>({h}, {r}, kDefaultMaxOrder, sp_tokenization(model));
}

BleuScore char_bleu(std::string_view hypothesis, std::string_view reference, Level level) {
  const auto h = as_vector(char_tokenize(hypothesis));
  const auto r = as_vector(char_tokenize(reference));
  if (r.empty()) throw Error(ErrorKind::kEmptyReference, "reference is empty");
  if (level == Level::kSentence) {
    return sentence_bleu<char32_t>(h, r, Smoothing::kAddOne, kDefaultMaxOrder, "char");
  }
  return corpus_bleu<char32_t>({h}, {r}, kDefaultMaxOrder, "char");
}

BleuScore word_bleu(std::string_view hypothesis, std::string_view reference, Level level) {
  const auto h = word_tokenize(hypothesis);
  const auto r = word_tokenize(reference);
  if (level == Level::kSentence) {
    return sentence_bleu<std::string>(h, r, Smoothing::kAddOne, kDefaultMaxOrder, "word");
  }
  return corpus_bleu<std::string>({h}, {r}, kDefaultMaxOrder, "word");
}

std::vector<BleuScore> score_lines(Metric metric, Level level,
                                   const tokenizer::SubwordModel* model,
                                   const std::vector<std::string>& hypotheses,
                                   const std::vector<std::string>& references, unsigned threads) {
  if (metric == Metric::kSpBleu && model == nullptr) {
    throw Error(ErrorKind::kInvalidArgument, "spBLEU requires a subword model");
  }
  if (hypotheses.size() != references.size()) {
    throw Error(ErrorKind::kLengthMismatch,
                "hypothesis count " + std::to_string(hypotheses.size()) +
                    " differs from reference count " + std::to_string(references.size()));
  }
  if (hypotheses.empty()) throw Error(ErrorKind::kEmptyInput, "no sentences to score");

  const std::size_t n = hypotheses.size();
  std::vector<NgramStats> per_pair(n);
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  std::vector<std::exception_ptr> failures(workers);
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < n; i += workers) {
            per_pair[i] = pair_stats(metric, model, hypotheses[i], references[i]);
          }
        } catch (...) {
          failures[w] = std::current_exception();
        }
      });
    }
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  const std::string tok = tokenization_name(metric, model);
  std::vector<BleuScore> out;
  if (level == Level::kCorpus) {
    NgramStats total;
    for (const auto& s : per_pair) total += s;
    out.push_back(
        score_from_stats(total, Smoothing::kNone, make_signature(tok, Smoothing::kNone,
                                                                 kDefaultMaxOrder)));
    return out;
  }
  const std::string sig = make_signature(tok, Smoothing::kAddOne, kDefaultMaxOrder);
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (per_pair[i].ref_length == 0) {
      throw Error(ErrorKind::kEmptyReference,
                  "reference line " + std::to_string(i + 1) + " is empty");
    }
    out.push_back(score_from_stats(per_pair[i], Smoothing::kAddOne, sig));
  }
  return out;
}

}  // namespace mtbench::metrics
