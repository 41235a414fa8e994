#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <thread>

#include "mtbench/analysis.hpp"
#include "mtbench/bleu.hpp"
#include "mtbench/char_lm.hpp"
#include "mtbench/corpus.hpp"
#include "mtbench/error.hpp"
#include "mtbench/eval_service.hpp"
#include "mtbench/io.hpp"
#include "mtbench/langid.hpp"
#include "mtbench/qa_checks.hpp"
#include "mtbench/sampling.hpp"
#include "mtbench/spectral.hpp"
#include "mtbench/svg.hpp"
#include "mtbench/unigram_model.hpp"
#include "mtbench/unigram_trainer.hpp"
#include "mtbench/workflow.hpp"

namespace fs = std::filesystem;
using namespace mtbench;

namespace {

unsigned g_threads = std::max(1u, std::thread::hardware_concurrency());

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    io::write_file(path, text);
  }
}

std::vector<std::string> read_input(const std::string& path) {
  if (path.empty() || path == "-") {
    std::string content{std::istreambuf_iterator<char>(std::cin), {}};
    return io::split_lines(content);
  }
  return io::read_lines(path);
}

std::vector<corpus::Split> parse_splits(const std::vector<std::string>& names) {
  std::vector<corpus::Split> out;
  for (const auto& n : names) {
    auto s = corpus::parse_split(n);
    if (!s) throw Error(ErrorKind::kInvalidArgument, "unknown split '" + n + "'");
    out.push_back(*s);
  }
  return out;
}

// ---- tokenizer -------------------------------------------------------------

struct TrainArgs {
  std::vector<std::string> inputs;
  std::string model;
  int vocab_size = 8000;
  std::uint64_t seed = 0;
  double temperature = 5.0;
  std::size_t sample_budget = 0;
  double coverage = 0.9995;
  std::string normalization = "identity";
};

void run_train(const TrainArgs& a) {
  std::vector<std::vector<std::string>> corpora;
  std::vector<std::size_t> sizes;
  for (const auto& path : a.inputs) {
    corpora.push_back(io::read_lines(path));
    sizes.push_back(corpora.back().size());
  }
  tokenizer::TrainerOptions opts;
  opts.vocab_size = a.vocab_size;
  opts.seed = a.seed;
  opts.sample_budget = a.sample_budget;
  opts.character_coverage = a.coverage;
  opts.normalization = tokenizer::parse_normalization(a.normalization);
  const auto plan = tokenizer::temperature_resample(sizes, a.temperature);
  const auto model = tokenizer::train_unigram(corpora, plan, opts);
  model.save(a.model);
  std::cout << fmt::format("vocab_size\t{}\nfingerprint\t{}\n", model.vocab_size(),
                           model.fingerprint());
}

struct CodecArgs {
  std::string model;
  std::string input;
  std::string output;
  bool pieces = false;
};

void run_encode(const CodecArgs& a) {
  const auto model = tokenizer::SubwordModel::load(a.model);
  std::string out;
  for (const auto& line : read_input(a.input)) {
    if (a.pieces) {
      out += io::join(model.encode_as_pieces(line), " ");
    } else {
      std::vector<std::string> ids;
      for (int id : model.encode(line)) ids.push_back(std::to_string(id));
      out += io::join(ids, " ");
    }
    out += '\n';
  }
  emit(out, a.output);
}

void run_decode(const CodecArgs& a) {
  const auto model = tokenizer::SubwordModel::load(a.model);
  std::string out;
  std::size_t lineno = 0;
  for (const auto& line : read_input(a.input)) {
    ++lineno;
    std::vector<int> ids;
    for (const auto& tok : io::split(line, ' ')) {
      if (tok.empty()) continue;
      try {
        std::size_t used = 0;
        ids.push_back(std::stoi(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::logic_error&) {
        throw Error(ErrorKind::kUnknownPieceId,
                    fmt::format("line {}: '{}' is not a piece id", lineno, tok));
      }
    }
    out += model.decode(ids);
    out += '\n';
  }
  emit(out, a.output);
}

// ---- score -----------------------------------------------------------------

struct ScoreArgs {
  std::string metric = "spbleu";
  std::string level = "corpus";
  std::string hyp;
  std::string ref;
  std::string model;
  std::string report;
};

void run_score(const ScoreArgs& a) {
  const auto metric = metrics::parse_metric(a.metric);
  const auto level = metrics::parse_level(a.level);
  std::optional<tokenizer::SubwordModel> model;
  if (metric == metrics::Metric::kSpBleu) {
    if (a.model.empty()) throw Error(ErrorKind::kInvalidArgument, "spbleu requires --model");
    model = tokenizer::SubwordModel::load(a.model);
  }
  const auto hyps = io::read_lines(a.hyp);
  const auto refs = io::read_lines(a.ref);
  const auto scores =
      metrics::score_lines(metric, level, model ? &*model : nullptr, hyps, refs, g_threads);

  std::string tsv;
  nlohmann::ordered_json report;
  report["metric"] = std::string(metrics::to_string(metric));
  report["level"] = std::string(metrics::to_string(level));
  report["signature"] = scores.front().signature;
  auto describe = [](const metrics::BleuScore& s) {
    nlohmann::ordered_json j;
    j["score"] = s.score;
    j["brevity_penalty"] = s.brevity_penalty;
    j["hyp_length"] = s.hyp_length();
    j["ref_length"] = s.ref_length();
    j["effective_order"] = s.effective_order;
    j["matches"] = s.stats.matches;
    j["totals"] = s.stats.totals;
    return j;
  };
  if (level == metrics::Level::kCorpus) {
    const auto& s = scores.front();
    tsv = fmt::format("{}\t{}\t{}\n", metrics::to_string(metric), io::format_score(s.score),
                      s.signature);
    report.update(describe(s));
  } else {
    report["sentences"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < scores.size(); ++i) {
      tsv += fmt::format("{}\t{}\n", i + 1, io::format_score(scores[i].score));
      report["sentences"].push_back(describe(scores[i]));
    }
  }
  std::cout << tsv;
  if (!a.report.empty()) io::write_file(a.report, report.dump(2) + "\n");
}

// ---- qa --------------------------------------------------------------------

struct QaArgs {
  std::string src;
  std::string hyp;
  std::string engine_a;
  std::string engine_b;
  std::string config;
  std::string model;
  std::string fluency_train;
  std::string langid_dir;
  std::string lang;
  std::string report;
  std::string histogram;
  std::string histogram_svg;
  std::string workflow_log;
  std::string item;
  std::string timestamp;
};

void run_qa(const QaArgs& a) {
  qa::CheckConfig cfg;
  if (!a.config.empty()) cfg = qa::CheckConfig::parse(io::read_file(a.config));
  cfg.validate();

  qa::QaInputs in;
  in.sources = io::read_lines(a.src);
  in.hypotheses = io::read_lines(a.hyp);
  in.engine_a = io::read_lines(a.engine_a);
  if (!a.engine_b.empty()) in.engine_b = io::read_lines(a.engine_b);

  const auto model = tokenizer::SubwordModel::load(a.model);
  qa::QaResources res;
  res.model = &model;
  std::optional<qa::CharLm> lm;
  if (!a.fluency_train.empty()) {
    lm.emplace();
    lm->train(io::read_lines(a.fluency_train));
    res.lm = &*lm;
  }
  qa::LangProfileSet profiles;
  if (!a.langid_dir.empty()) {
    if (a.lang.empty()) throw Error(ErrorKind::kInvalidArgument, "--langid-dir needs --lang");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(a.langid_dir)) {
      if (e.is_regular_file() && e.path().extension() == ".txt") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) profiles.add_language(f.stem().string(), io::read_lines(f));
    res.profiles = &profiles;
    res.expected_language = a.lang;
  }

  const qa::QaReport report = qa::run_qa(in, res, cfg);
  std::cout << qa::report_tsv(report);
  if (!a.report.empty()) io::write_file(a.report, qa::report_json(report, cfg));
  if (!a.histogram.empty() || !a.histogram_svg.empty()) {
    std::vector<double> scores;
    for (const auto& f : report.sentences) {
      if (f.score_a) scores.push_back(*f.score_a);
    }
    const auto counts = qa::score_histogram(scores);
    if (!a.histogram.empty()) io::write_file(a.histogram, qa::histogram_tsv(counts));
    if (!a.histogram_svg.empty()) {
      std::vector<std::string> labels;
      for (std::size_t b = 0; b < counts.size(); ++b) labels.push_back(std::to_string(b * 10));
      io::write_file(a.histogram_svg,
                     svg::bar_chart(labels, counts, "sentence spBLEU against engine A"));
    }
  }
  if (!a.workflow_log.empty()) {
    if (a.item.empty() || a.timestamp.empty()) {
      throw Error(ErrorKind::kInvalidArgument, "--workflow-log needs --item and --timestamp");
    }
    workflow::LogRecord rec;
    rec.item = a.item;
    rec.event = report.verdict == qa::Verdict::kPass ? "auto_pass" : "auto_fail";
    rec.timestamp = workflow::parse_timestamp(a.timestamp);
    std::ofstream out(a.workflow_log, std::ios::binary | std::ios::app);
    out << workflow::format_record(rec) << '\n';
    if (!out) throw Error(ErrorKind::kIoError, "cannot append to " + a.workflow_log);
  }
}

// ---- workflow --------------------------------------------------------------

struct WorkflowArgs {
  std::string log;
  std::string item;
  std::string event;
  std::optional<double> score;
  std::string timestamp;
  std::string language;
  std::string provider;
  std::string output;
};

std::vector<std::string> read_log(const std::string& path) {
  if (!fs::exists(path)) return {};
  return io::read_lines(path);
}

void run_replay(const WorkflowArgs& a) {
  emit(workflow::items_tsv(workflow::replay(read_log(a.log))), a.output);
}

void run_workflow_stats(const WorkflowArgs& a) {
  const auto items = workflow::replay(read_log(a.log));
  std::vector<workflow::WorkItem> list;
  for (const auto& [id, item] : items) list.push_back(item);
  emit(workflow::stats_tsv(workflow::workflow_stats(list)), a.output);
}

void run_advance(const WorkflowArgs& a) {
  auto lines = read_log(a.log);
  workflow::LogRecord rec;
  rec.item = a.item;
  rec.event = a.event;
  rec.timestamp = workflow::parse_timestamp(a.timestamp);
  rec.score = a.score;
  rec.language = a.language;
  rec.provider = a.provider;
  const std::string line = workflow::format_record(rec);
  lines.push_back(line);
  // Replaying the extended log validates the event before it is persisted.
  const auto items = workflow::replay(lines);
  {
    std::ofstream out(a.log, std::ios::binary | std::ios::app);
    out << line << '\n';
    if (!out) throw Error(ErrorKind::kIoError, "cannot append to " + a.log);
  }
  const auto& item = items.at(a.item);
  std::cout << fmt::format("{}\t{}\t{}\n", item.id, workflow::to_string(item.state), item.round);
}

// ---- analyze ---------------------------------------------------------------

struct CorpusArgs {
  std::string root;
  std::vector<std::string> langs;
  std::vector<std::string> splits{"devtest"};
};

corpus::AlignedCorpus load(const CorpusArgs& c) {
  return corpus::load_corpus(c.root, c.langs, parse_splits(c.splits));
}

struct AnalyzeArgs {
  CorpusArgs corpus;
  std::string hyp_dir;
  std::string model;
  std::string matrix;
  std::string meta;
  std::string output;
  std::string svg;
  int k = 8;
  std::uint64_t seed = 0;
  std::string pivot = "eng";
  std::string direct;
  std::string via;
  std::string delta;
  std::size_t short_max = 15;
  std::size_t medium_max = 25;
};

analysis::EvalMatrix read_matrix(const std::string& path) {
  return analysis::EvalMatrix::parse_tsv(io::read_file(path));
}

void run_matrix(const AnalyzeArgs& a) {
  const auto c = load(a.corpus);
  const auto model = tokenizer::SubwordModel::load(a.model);
  const auto m =
      analysis::evaluate_matrix(c, analysis::load_hypotheses(c, a.hyp_dir), model, g_threads);
  emit(m.to_tsv(), a.output);
}

void run_cluster(const AnalyzeArgs& a) {
  const auto m = read_matrix(a.matrix);
  analysis::ClusterOptions opts;
  opts.k = a.k;
  opts.seed = a.seed;
  const auto result = analysis::spectral_cluster(m, opts);
  emit(analysis::assignment_tsv(m, result), a.output);
  if (!a.svg.empty()) {
    std::vector<int> sorted_labels;
    for (std::size_t i : result.order) sorted_labels.push_back(result.assignment[i]);
    io::write_file(a.svg, svg::heatmap(analysis::reorder(m, result.order), sorted_labels,
                                       fmt::format("spectral clusters, k={}", a.k)));
  }
}

void run_grouping(const AnalyzeArgs& a, analysis::Grouping grouping) {
  const auto m = read_matrix(a.matrix);
  const auto meta = analysis::parse_language_meta(io::read_file(a.meta));
  emit(analysis::group_average(m, meta, grouping).to_tsv(), a.output);
}

void run_subsets(const AnalyzeArgs& a, bool by_length) {
  const auto c = load(a.corpus);
  const auto model = tokenizer::SubwordModel::load(a.model);
  std::vector<std::pair<std::string, std::vector<std::size_t>>> subsets;
  if (by_length) {
    const auto part = corpus::bucket_by_length(c, a.pivot, {a.short_max, a.medium_max});
    subsets = {{"short", part.short_ids}, {"medium", part.medium_ids}, {"long", part.long_ids}};
  } else {
    std::map<corpus::Domain, std::vector<std::size_t>> by_domain;
    for (std::size_t i = 0; i < c.size(); ++i) by_domain[c.meta(i).domain].push_back(i);
    for (auto& [domain, ids] : by_domain) {
      subsets.emplace_back(std::string(corpus::to_string(domain)), std::move(ids));
    }
  }
  const auto rows = analysis::evaluate_subsets(c, analysis::load_hypotheses(c, a.hyp_dir), model,
                                               subsets, g_threads);
  emit(analysis::subsets_tsv(rows), a.output);
}

void run_pivot(const AnalyzeArgs& a) {
  const auto result = analysis::pivot_compare(read_matrix(a.direct), read_matrix(a.via), a.pivot);
  emit(fmt::format("pivot\tcompared\tdirect_wins\tpivot_wins\tfraction_direct_wins\n"
                   "{}\t{}\t{}\t{}\t{:.4f}\n",
                   a.pivot, result.compared, result.direct_wins, result.pivot_wins,
                   result.fraction_direct_wins),
       a.output);
  if (!a.delta.empty()) io::write_file(a.delta, result.delta.to_tsv());
}

// ---- stats -----------------------------------------------------------------

struct StatsArgs {
  CorpusArgs corpus;
  std::string pivot = "eng";
  std::string output;
};

void run_stats(const StatsArgs& a) {
  const auto c = load(a.corpus);
  const auto st = corpus::corpus_stats(c, a.pivot);
  std::string out = "key\tvalue\n";
  out += fmt::format("languages\t{}\n", c.languages().size());
  out += fmt::format("sentences\t{}\n", st.total_sentences);
  out += fmt::format("articles\t{}\n", st.article_count);
  for (const auto& [split, n] : st.per_split) {
    out += fmt::format("sentences.{}\t{}\n", corpus::to_string(split), n);
  }
  for (const auto& [split, n] : st.articles_per_split) {
    out += fmt::format("articles.{}\t{}\n", corpus::to_string(split), n);
  }
  for (const auto& [domain, n] : st.per_domain) {
    out += fmt::format("domain.{}\t{}\n", corpus::to_string(domain), n);
  }
  for (const auto& [topic, n] : st.per_topic) {
    out += fmt::format("topic.{}\t{}\n", corpus::to_string(topic), n);
  }
  out += fmt::format("avg_words_per_sentence\t{:.2f}\n", st.avg_words_per_sentence);
  out += fmt::format("pct_articles_with_links\t{:.2f}\n", st.pct_articles_with_links);
  out += fmt::format("pct_articles_with_images\t{:.2f}\n", st.pct_articles_with_images);
  const auto part = corpus::bucket_by_length(c, a.pivot);
  out += fmt::format("length.short\t{}\nlength.medium\t{}\nlength.long\t{}\n",
                     part.short_ids.size(), part.medium_ids.size(), part.long_ids.size());
  emit(out, a.output);
}

// ---- serve -----------------------------------------------------------------

struct ServeArgs {
  std::string references;
  std::string split = "test";
  std::string model;
  std::string data = "mtbench-data";
  std::string host = "127.0.0.1";
  int port = 8080;
};

server::HttpServer* g_server = nullptr;

void run_serve(const ServeArgs& a) {
  server::ServiceConfig cfg;
  cfg.references_dir = a.references;
  cfg.split = a.split;
  cfg.model_path = a.model;
  cfg.data_dir = a.data;
  cfg.threads = g_threads;
  server::EvalService service(cfg);
  server::HttpServer http(service);
  const int port = http.bind(a.host, a.port);
  std::cerr << fmt::format("listening on {}:{} ({} languages, {} submissions)\n", a.host, port,
                           service.languages().size(), service.submission_count());
  g_server = &http;
  std::signal(SIGINT, [](int) {
    if (g_server) g_server->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_server) g_server->stop();
  });
  http.run();
  g_server = nullptr;
}

void add_corpus_options(CLI::App* cmd, CorpusArgs& c) {
  cmd->add_option("--corpus", c.root, "Corpus root directory")->required();
  cmd->add_option("--langs", c.langs, "Language codes")->required()->delimiter(',');
  cmd->add_option("--splits", c.splits, "Splits to load")->delimiter(',')->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multilingual MT evaluation and translation QA toolkit"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_option("--threads", g_threads, "Worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_flag("--verbose", verbose, "Print the resolved configuration to stderr");

  std::function<void()> action;

  auto* tok = app.add_subcommand("tokenizer", "Train and apply subword models");
  tok->require_subcommand(1);
  TrainArgs train;
  auto* train_cmd = tok->add_subcommand("train", "Train a unigram subword model");
  train_cmd->add_option("--input", train.inputs, "One text file per language")->required();
  train_cmd->add_option("--model", train.model, "Output model file")->required();
  train_cmd->add_option("--vocab,--vocab-size", train.vocab_size)->capture_default_str();
  train_cmd->add_option("--seed", train.seed)->capture_default_str();
  train_cmd->add_option("--temperature", train.temperature)->capture_default_str();
  train_cmd->add_option("--sample-budget", train.sample_budget)->capture_default_str();
  train_cmd->add_option("--character-coverage", train.coverage)->capture_default_str();
  train_cmd->add_option("--normalization", train.normalization)
      ->check(CLI::IsMember({"identity", "nfkc"}))
      ->capture_default_str();
  train_cmd->callback([&] { action = [&] { run_train(train); }; });

  CodecArgs codec;
  for (const char* name : {"encode", "decode"}) {
    auto* cmd = tok->add_subcommand(name, std::string(name) == "encode"
                                              ? "Segment text into piece ids"
                                              : "Turn piece ids back into text");
    cmd->add_option("--model", codec.model)->required();
    cmd->add_option("--input", codec.input, "Input file (default stdin)");
    cmd->add_option("--output", codec.output, "Output file (default stdout)");
    if (std::string(name) == "encode") {
      cmd->add_flag("--pieces", codec.pieces, "Emit piece strings instead of ids");
      cmd->callback([&] { action = [&] { run_encode(codec); }; });
    } else {
      cmd->callback([&] { action = [&] { run_decode(codec); }; });
    }
  }

  ScoreArgs score;
  auto* score_cmd = app.add_subcommand("score", "Score hypotheses against references");
  score_cmd->add_option("--metric", score.metric)
      ->check(CLI::IsMember({"bleu", "spbleu", "chrbleu"}))
      ->capture_default_str();
  score_cmd->add_option("--level", score.level)
      ->check(CLI::IsMember({"corpus", "sentence"}))
      ->capture_default_str();
  score_cmd->add_option("--hyp", score.hyp)->required();
  score_cmd->add_option("--ref", score.ref)->required();
  score_cmd->add_option("--model", score.model, "Subword model (spbleu)");
  score_cmd->add_option("--report", score.report, "JSON report file");
  score_cmd->callback([&] { action = [&] { run_score(score); }; });

  auto* qa_cmd = app.add_subcommand("qa", "Automatic translation checks");
  qa_cmd->require_subcommand(1);
  QaArgs qa_args;
  auto* qa_run = qa_cmd->add_subcommand("run", "Run all checks over one batch");
  qa_run->add_option("--src", qa_args.src)->required();
  qa_run->add_option("--hyp", qa_args.hyp)->required();
  qa_run->add_option("--engine-a", qa_args.engine_a)->required();
  qa_run->add_option("--engine-b", qa_args.engine_b);
  qa_run->add_option("--config", qa_args.config, "key=value overrides");
  qa_run->add_option("--model", qa_args.model, "Subword model for spBLEU")->required();
  qa_run->add_option("--fluency-train", qa_args.fluency_train,
                     "Target-language text for the fluency model");
  qa_run->add_option("--langid-dir", qa_args.langid_dir, "Directory of <code>.txt samples");
  qa_run->add_option("--lang", qa_args.lang, "Expected target language");
  qa_run->add_option("--report", qa_args.report, "JSON verdict file");
  qa_run->add_option("--histogram", qa_args.histogram, "Score histogram TSV");
  qa_run->add_option("--histogram-svg", qa_args.histogram_svg, "Score histogram SVG");
  qa_run->add_option("--workflow-log", qa_args.workflow_log,
                     "Append the verdict as an auto_pass/auto_fail event");
  qa_run->add_option("--item", qa_args.item, "Work item id for --workflow-log");
  qa_run->add_option("--timestamp", qa_args.timestamp, "Event time, YYYY-MM-DDTHH:MM:SSZ");
  qa_run->callback([&] { action = [&] { run_qa(qa_args); }; });

  auto* wf = app.add_subcommand("workflow", "Translation workflow event log");
  wf->require_subcommand(1);
  WorkflowArgs wf_args;
  auto* replay_cmd = wf->add_subcommand("replay", "Rebuild item states from the log");
  auto* stats_cmd = wf->add_subcommand("stats", "Summarize rounds and turnaround");
  for (auto* cmd : {replay_cmd, stats_cmd}) {
    cmd->add_option("--log", wf_args.log)->required();
    cmd->add_option("--output", wf_args.output);
  }
  replay_cmd->callback([&] { action = [&] { run_replay(wf_args); }; });
  stats_cmd->callback([&] { action = [&] { run_workflow_stats(wf_args); }; });
  auto* advance_cmd = wf->add_subcommand("advance", "Validate and append one event");
  advance_cmd->add_option("--log", wf_args.log)->required();
  advance_cmd->add_option("--item", wf_args.item)->required();
  advance_cmd->add_option("--event", wf_args.event)
      ->required()
      ->check(CLI::IsMember(
          {"sourced", "translated", "auto_pass", "auto_fail", "eval_scored", "retranslation_done"}));
  advance_cmd->add_option("--score", wf_args.score, "Human quality score (eval_scored)");
  advance_cmd->add_option("--timestamp", wf_args.timestamp)->required();
  advance_cmd->add_option("--language", wf_args.language, "Target language (sourced)");
  advance_cmd->add_option("--provider", wf_args.provider, "Translation provider (sourced)");
  advance_cmd->callback([&] { action = [&] { run_advance(wf_args); }; });

  auto* an = app.add_subcommand("analyze", "Direction matrices and aggregate analyses");
  an->require_subcommand(1);
  AnalyzeArgs an_args;
  auto* matrix_cmd = an->add_subcommand("matrix", "Evaluate all hypothesis directions");
  add_corpus_options(matrix_cmd, an_args.corpus);
  matrix_cmd->add_option("--hyp-dir", an_args.hyp_dir, "Holds <src>-<tgt>.txt")->required();
  matrix_cmd->add_option("--model", an_args.model)->required();
  matrix_cmd->add_option("--output", an_args.output);
  matrix_cmd->callback([&] { action = [&] { run_matrix(an_args); }; });

  auto* cluster_cmd = an->add_subcommand("cluster", "Spectral clustering of a score matrix");
  cluster_cmd->add_option("--matrix", an_args.matrix)->required();
  cluster_cmd->add_option("--k", an_args.k)->capture_default_str();
  cluster_cmd->add_option("--seed", an_args.seed)->capture_default_str();
  cluster_cmd->add_option("--output", an_args.output, "Assignment TSV");
  cluster_cmd->add_option("--svg", an_args.svg, "Cluster-sorted heatmap");
  cluster_cmd->callback([&] { action = [&] { run_cluster(an_args); }; });

  auto* bins_cmd = an->add_subcommand("bins", "Average by resource bin");
  auto* family_cmd = an->add_subcommand("family", "Average by language family");
  for (auto* cmd : {bins_cmd, family_cmd}) {
    cmd->add_option("--matrix", an_args.matrix)->required();
    cmd->add_option("--meta", an_args.meta, "code/family/bitext/mono TSV")->required();
    cmd->add_option("--output", an_args.output);
  }
  bins_cmd->callback(
      [&] { action = [&] { run_grouping(an_args, analysis::Grouping::kResourceBin); }; });
  family_cmd->callback(
      [&] { action = [&] { run_grouping(an_args, analysis::Grouping::kFamily); }; });

  auto* length_cmd = an->add_subcommand("length", "Average by source sentence length");
  auto* domain_cmd = an->add_subcommand("domain", "Average by domain");
  for (auto* cmd : {length_cmd, domain_cmd}) {
    add_corpus_options(cmd, an_args.corpus);
    cmd->add_option("--hyp-dir", an_args.hyp_dir)->required();
    cmd->add_option("--model", an_args.model)->required();
    cmd->add_option("--output", an_args.output);
  }
  length_cmd->add_option("--pivot", an_args.pivot, "Language whose lengths define buckets")
      ->capture_default_str();
  length_cmd->add_option("--short-max", an_args.short_max)->capture_default_str();
  length_cmd->add_option("--medium-max", an_args.medium_max)->capture_default_str();
  length_cmd->callback([&] { action = [&] { run_subsets(an_args, true); }; });
  domain_cmd->callback([&] { action = [&] { run_subsets(an_args, false); }; });

  auto* pivot_cmd = an->add_subcommand("pivot", "Direct versus pivot translation");
  pivot_cmd->add_option("--direct", an_args.direct)->required();
  pivot_cmd->add_option("--via", an_args.via)->required();
  pivot_cmd->add_option("--pivot", an_args.pivot)->capture_default_str();
  pivot_cmd->add_option("--output", an_args.output);
  pivot_cmd->add_option("--delta", an_args.delta, "Delta matrix TSV");
  pivot_cmd->callback([&] { action = [&] { run_pivot(an_args); }; });

  StatsArgs stats_args;
  auto* corpus_stats_cmd = app.add_subcommand("stats", "Corpus statistics");
  add_corpus_options(corpus_stats_cmd, stats_args.corpus);
  corpus_stats_cmd->add_option("--pivot", stats_args.pivot)->capture_default_str();
  corpus_stats_cmd->add_option("--output", stats_args.output);
  corpus_stats_cmd->callback([&] { action = [&] { run_stats(stats_args); }; });

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "Hidden-reference evaluation server");
  serve_cmd->add_option("--references", serve.references)->envname("MTBENCH_REFERENCES")->required();
  serve_cmd->add_option("--split", serve.split)->capture_default_str();
  serve_cmd->add_option("--model", serve.model)->envname("MTBENCH_MODEL")->required();
  serve_cmd->add_option("--data", serve.data)->envname("MTBENCH_DATA")->capture_default_str();
  serve_cmd->add_option("--host", serve.host)->envname("MTBENCH_HOST")->capture_default_str();
  serve_cmd->add_option("--port", serve.port)->envname("MTBENCH_PORT")->capture_default_str();
  serve_cmd->callback([&] { action = [&] { run_serve(serve); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (verbose) {
    std::string path;
    const CLI::App* leaf = &app;
    while (!leaf->get_subcommands().empty()) {
      leaf = leaf->get_subcommands().front();
      path += (path.empty() ? "" : " ") + leaf->get_name();
    }
    std::cerr << fmt::format("command=\"{}\"\nthreads={}\n", path, g_threads);
    for (const CLI::Option* opt : leaf->get_options()) {
      if (opt->get_name() == "--help") continue;
      std::cerr << fmt::format("{}={}\n", opt->get_name().substr(2),
                               opt->count() > 0 ? io::join(opt->results(), ",")
                                                : opt->get_default_str());
    }
  }
  try {
    action();
  } catch (const Error& e) {
    nlohmann::ordered_json j;
    j["error"] = std::string(error_kind_name(e.kind()));
    j["message"] = e.what();
    std::cerr << j.dump() << '\n';
    return 1;
  } catch (const std::exception& e) {
    nlohmann::ordered_json j;
    j["error"] = "Internal";
    j["message"] = e.what();
    std::cerr << j.dump() << '\n';
    return 1;
  }
  return 0;
}
