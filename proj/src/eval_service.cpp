#include "mtbench/eval_service.hpp"

#include <fmt/format.h>
#include <httplib.h>
#include <openssl/sha.h>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <json.hpp>

#include "mtbench/bleu.hpp"
#include "mtbench/error.hpp"
#include "mtbench/io.hpp"
#include "mtbench/workflow.hpp"

namespace mtbench::server {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::int64_t system_clock_seconds() {
  return std::chrono::duration_cast<std::chrono::seconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[SHA256_DIGEST_LENGTH];
  SHA256(reinterpret_cast<const unsigned char*>(data.data()), data.size(), digest);
  std::string out;
  for (unsigned char b : digest) out += fmt::format("{:02x}", b);
  return out;
}

namespace {

constexpr std::string_view kLogName = "submissions.jsonl";

bool ranks_before(const SubmissionSummary& a, const SubmissionSummary& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.submitted_at != b.submitted_at) return a.submitted_at < b.submitted_at;
  return a.sequence < b.sequence;
}

}  // namespace

EvalService::EvalService(ServiceConfig config, Clock clock)
    : config_(std::move(config)),
      clock_(std::move(clock)),
      model_(tokenizer::SubwordModel::load(config_.model_path)) {
  const std::string suffix = "." + config_.split;
  if (!fs::is_directory(config_.references_dir)) {
    throw Error(ErrorKind::kMissingFile,
                "references directory " + config_.references_dir.string() + " not found");
  }
  for (const auto& entry : fs::directory_iterator(config_.references_dir)) {
    const std::string name = entry.path().filename().string();
    if (!entry.is_regular_file() || name.size() <= suffix.size() ||
        name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0) {
      continue;
    }
    references_[name.substr(0, name.size() - suffix.size())] = io::read_lines(entry.path());
  }
  if (references_.size() < 2) {
    throw Error(ErrorKind::kMissingFile, "need references for at least two languages in " +
                                             config_.references_dir.string());
  }
  signature_ = metrics::make_signature("spm-" + model_.fingerprint(), metrics::Smoothing::kNone,
                                       metrics::kDefaultMaxOrder);
  fs::create_directories(config_.data_dir / "blobs");
  replay_log();
}

std::vector<std::string> EvalService::languages() const {
  std::vector<std::string> out;
  for (const auto& [lang, lines] : references_) out.push_back(lang);
  return out;
}

bool EvalService::supports(const std::string& src, const std::string& tgt) const {
  return src != tgt && references_.count(src) > 0 && references_.count(tgt) > 0;
}

std::size_t EvalService::submission_count() const {
  std::shared_lock lock(board_mutex_);
  return next_sequence_;
}

void EvalService::insert(const Direction& dir, SubmissionSummary summary) {
  auto& board = boards_[dir];
  board.insert(std::upper_bound(board.begin(), board.end(), summary, ranks_before),
               std::move(summary));
}

void EvalService::replay_log() {
  const fs::path log = config_.data_dir / kLogName;
  if (!fs::exists(log)) return;
  const auto lines = io::read_lines(log);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    try {
      const json j = json::parse(lines[i]);
      SubmissionSummary s;
      s.id = j.at("id").get<std::string>();
      s.score = j.at("score").get<double>();
      s.submitted_at = j.at("submitted_at").get<std::int64_t>();
      s.sequence = j.at("sequence").get<std::uint64_t>();
      insert({j.at("src").get<std::string>(), j.at("tgt").get<std::string>()}, s);
      next_sequence_ = std::max(next_sequence_, s.sequence + 1);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::kMalformedLog,
                  fmt::format("{} line {}: {}", log.string(), i + 1, e.what()));
    }
  }
}

SubmitResult EvalService::submit(const std::string& src, const std::string& tgt,
                                 const std::vector<std::string>& hypotheses) {
  if (!supports(src, tgt)) {
    throw Error(ErrorKind::kUnsupportedDirection,
                "direction " + src + "-" + tgt + " is not supported");
  }
  std::string blob;
  for (const auto& line : hypotheses) {
    blob += line;
    blob += '\n';
  }
  if (blob.size() > config_.max_payload_bytes) {
    throw Error(ErrorKind::kPayloadTooLarge,
                fmt::format("submission of {} bytes exceeds the {} byte limit", blob.size(),
                            config_.max_payload_bytes));
  }
  const auto& refs = references_.at(tgt);
  if (hypotheses.size() != refs.size()) {
    throw Error(ErrorKind::kLineCountMismatch,
                fmt::format("expected {} lines, got {}", refs.size(), hypotheses.size()));
  }
  const metrics::BleuScore score =
      metrics::score_lines(metrics::Metric::kSpBleu, metrics::Level::kCorpus, &model_,
                           hypotheses, refs, config_.threads)
          .front();

  const std::string digest = sha256_hex(blob);
  std::lock_guard append(append_mutex_);
  SubmissionSummary summary;
  {
    std::shared_lock lock(board_mutex_);
    summary.sequence = next_sequence_;
  }
  summary.score = score.score;
  summary.submitted_at = clock_();
  summary.id = fmt::format("sub-{:06d}-{}", summary.sequence, digest.substr(0, 12));

  const fs::path blob_path = config_.data_dir / "blobs" / digest;
  if (!fs::exists(blob_path)) io::write_file(blob_path, blob);
  json record;
  record["id"] = summary.id;
  record["sequence"] = summary.sequence;
  record["src"] = src;
  record["tgt"] = tgt;
  record["blob"] = digest;
  record["score"] = summary.score;
  record["signature"] = score.signature;
  record["submitted_at"] = summary.submitted_at;
  {
    std::ofstream out(config_.data_dir / kLogName, std::ios::binary | std::ios::app);
    out << record.dump() << '\n';
    out.flush();
    if (!out) throw Error(ErrorKind::kIoError, "cannot append to the submission log");
  }
  {
    std::unique_lock lock(board_mutex_);
    insert({src, tgt}, summary);
    next_sequence_ = summary.sequence + 1;
  }
  return {summary.id, summary.score, score.signature};
}

std::vector<SubmissionSummary> EvalService::leaderboard(const std::string& src,
                                                        const std::string& tgt) const {
  if (!supports(src, tgt)) {
    throw Error(ErrorKind::kUnsupportedDirection,
                "direction " + src + "-" + tgt + " is not supported");
  }
  std::shared_lock lock(board_mutex_);
  auto it = boards_.find({src, tgt});
  if (it == boards_.end()) return {};
  return it->second;
}

namespace {

int status_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUnsupportedDirection: return 404;
    case ErrorKind::kLineCountMismatch: return 422;
    case ErrorKind::kPayloadTooLarge: return 413;
    case ErrorKind::kMalformedRequest: return 400;
    default: return 500;
  }
}

HttpReply error_reply(const Error& e) {
  json j;
  j["error"] = std::string(error_kind_name(e.kind()));
  j["message"] = e.what();
  return {status_for(e.kind()), j.dump()};
}

}  // namespace

HttpReply handle_submit(EvalService& service, const std::string& body) {
  try {
    if (body.size() > kMaxPayloadBytes) {
      throw Error(ErrorKind::kPayloadTooLarge, "request body exceeds the payload limit");
    }
    std::string src;
    std::string tgt;
    std::vector<std::string> lines;
    try {
      const json req = json::parse(body);
      src = req.at("src").get<std::string>();
      tgt = req.at("tgt").get<std::string>();
      lines = req.at("hypotheses").get<std::vector<std::string>>();
    } catch (const json::exception&) {
      throw Error(ErrorKind::kMalformedRequest,
                  "expected a JSON object with string fields src, tgt and a string array "
                  "hypotheses");
    }
    const SubmitResult r = service.submit(src, tgt, lines);
    json j;
    j["id"] = r.id;
    j["score"] = r.score;
    j["signature"] = r.signature;
    return {200, j.dump()};
  } catch (const Error& e) {
    return error_reply(e);
  }
}

HttpReply handle_leaderboard(const EvalService& service, const std::string& src,
                             const std::string& tgt) {
  try {
    json entries = json::array();
    for (const auto& s : service.leaderboard(src, tgt)) {
      json e;
      e["id"] = s.id;
      e["score"] = s.score;
      e["timestamp"] = workflow::format_timestamp(s.submitted_at);
      entries.push_back(std::move(e));
    }
    json j;
    j["src"] = src;
    j["tgt"] = tgt;
    j["signature"] = service.signature();
    j["entries"] = std::move(entries);
    return {200, j.dump()};
  } catch (const Error& e) {
    return error_reply(e);
  }
}

struct HttpServer::Impl {
  EvalService& service;
  httplib::Server http;

  explicit Impl(EvalService& s) : service(s) {
    http.set_payload_max_length(kMaxPayloadBytes + 1);
    http.Post("/v1/submissions", [this](const httplib::Request& req, httplib::Response& res) {
      const HttpReply r = handle_submit(service, req.body);
      res.status = r.status;
      res.set_content(r.body, "application/json");
    });
    http.Get("/v1/leaderboard", [this](const httplib::Request& req, httplib::Response& res) {
      const HttpReply r = handle_leaderboard(service, req.get_param_value("src"),
                                             req.get_param_value("tgt"));
      res.status = r.status;
      res.set_content(r.body, "application/json");
    });
  }
};

HttpServer::HttpServer(EvalService& service) : impl_(std::make_unique<Impl>(service)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->http.bind_to_any_port(host);
    if (bound < 0) throw Error(ErrorKind::kIoError, "cannot bind " + host);
    return bound;
  }
  if (!impl_->http.bind_to_port(host, port)) {
    throw Error(ErrorKind::kIoError, fmt::format("cannot bind {}:{}", host, port));
  }
  return port;
}

void HttpServer::run() { impl_->http.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_ && impl_->http.is_running()) impl_->http.stop();
}

}  // namespace mtbench::server
