#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <utility>
#include <vector>

#include "mtbench/unigram_model.hpp"

namespace mtbench::server {

inline constexpr std::size_t kMaxPayloadBytes = 8u << 20;

struct ServiceConfig {
  std::filesystem::path references_dir;  // holds <lang>.<split>
  std::string split = "test";
  std::filesystem::path model_path;
  std::filesystem::path data_dir;  // submissions.jsonl and blobs/
  std::size_t max_payload_bytes = kMaxPayloadBytes;
  unsigned threads = 1;
};

// Seconds since the Unix epoch.
using Clock = std::function<std::int64_t()>;

std::int64_t system_clock_seconds();

struct SubmitResult {
  std::string id;
  double score = 0.0;
  std::string signature;
};

struct SubmissionSummary {
  std::string id;
  double score = 0.0;
  std::int64_t submitted_at = 0;
  std::uint64_t sequence = 0;
};

class EvalService {
 public:
  // Loads references and model, then replays the submission log.
  explicit EvalService(ServiceConfig config, Clock clock = system_clock_seconds);
  EvalService(const EvalService&) = delete;
  EvalService& operator=(const EvalService&) = delete;

  // Throws UnsupportedDirection, LineCountMismatch or PayloadTooLarge.
  SubmitResult submit(const std::string& src, const std::string& tgt,
                      const std::vector<std::string>& hypotheses);

  // Score descending, then earlier submission. Throws UnsupportedDirection.
  std::vector<SubmissionSummary> leaderboard(const std::string& src,
                                             const std::string& tgt) const;

  std::vector<std::string> languages() const;
  bool supports(const std::string& src, const std::string& tgt) const;
  const std::string& signature() const { return signature_; }
  std::size_t submission_count() const;

 private:
  using Direction = std::pair<std::string, std::string>;

  void replay_log();
  void insert(const Direction& dir, SubmissionSummary summary);

  ServiceConfig config_;
  Clock clock_;
  tokenizer::SubwordModel model_;
  std::string signature_;
  std::map<std::string, std::vector<std::string>> references_;

  mutable std::shared_mutex board_mutex_;
  std::map<Direction, std::vector<SubmissionSummary>> boards_;
  std::uint64_t next_sequence_ = 0;

  std::mutex append_mutex_;
};

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

struct HttpReply {
  int status = 200;
  std::string body;  // JSON
};

// Transport-independent request handlers.
HttpReply handle_submit(EvalService& service, const std::string& body);
HttpReply handle_leaderboard(const EvalService& service, const std::string& src,
                             const std::string& tgt);

// POST /v1/submissions, GET /v1/leaderboard?src=&tgt=.
class HttpServer {
 public:
  explicit HttpServer(EvalService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Returns the bound port; port 0 picks a free one. Throws IoError.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace mtbench::server
