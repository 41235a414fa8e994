#include <gtest/gtest.h>

#include <json.hpp>
#include <httplib.h>

#include <random>
#include <thread>

#include "mtbench/bleu.hpp"
#include "mtbench/error.hpp"
#include "mtbench/eval_service.hpp"
#include "mtbench/io.hpp"
#include "test_support.hpp"

using namespace mtbench;
using namespace mtbench::server;
using json = nlohmann::json;

namespace {

std::vector<std::string> synthetic_lines(std::uint64_t seed, std::size_t n) {
  static const std::vector<std::string> words = {"abc", "cab", "bca", "aab", "bcc", "dd",
                                                 "abcd", "ccc", "bac", "ad"};
  std::mt19937_64 rng(seed);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::string s;
    for (std::size_t w = 0, k = 4 + rng() % 8; w < k; ++w) s += (w ? " " : "") + words[rng() % words.size()];
    out.push_back(s);
  }
  return out;
}

struct Fixture {
  testutil::TempDir dir;
  std::map<std::string, std::vector<std::string>> refs;
  std::int64_t now = 1'700'000'000;

  Fixture() {
    std::filesystem::create_directories(dir / "refs");
    std::uint64_t seed = 1;
    for (const std::string lang : {"eng", "fra", "deu"}) {
      refs[lang] = synthetic_lines(seed++, 25);
      io::write_lines(dir / "refs" / (lang + ".test"), refs[lang]);
    }
    testutil::toy_model().save(dir / "model.txt");
  }

  ServiceConfig config() const {
    ServiceConfig c;
    c.references_dir = dir / "refs";
    c.model_path = dir / "model.txt";
    c.data_dir = dir / "data";
    return c;
  }

  Clock clock() {
    return [this] { return now; };
  }
};

}  // namespace

TEST(EvalService, IdenticalHypothesesScoreHundredAndMatchOffline) {
  Fixture f;
  EvalService service(f.config(), f.clock());
  EXPECT_EQ(service.languages(), (std::vector<std::string>{"deu", "eng", "fra"}));
  const auto r = service.submit("eng", "fra", f.refs["fra"]);
  EXPECT_EQ(r.score, 100.0);
  EXPECT_EQ(r.id.rfind("sub-000000-", 0), 0u);

  const auto model = testutil::toy_model();
  const auto hyps = synthetic_lines(99, 25);
  const auto offline = metrics::score_lines(metrics::Metric::kSpBleu, metrics::Level::kCorpus,
                                            &model, hyps, f.refs["deu"])
                           .front();
  const auto online = service.submit("eng", "deu", hyps);
  EXPECT_EQ(online.score, offline.score);
  EXPECT_EQ(online.signature, offline.signature);
  EXPECT_EQ(service.signature(), offline.signature);
}

TEST(EvalService, Rejections) {
  Fixture f;
  EvalService service(f.config(), f.clock());
  auto kind_of = [&](const std::string& s, const std::string& t, const std::vector<std::string>& h) {
    try {
      service.submit(s, t, h);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::kInvalidArgument;
  };
  EXPECT_EQ(kind_of("eng", "fra", synthetic_lines(3, 24)), ErrorKind::kLineCountMismatch);
  EXPECT_EQ(kind_of("eng", "xho", synthetic_lines(3, 25)), ErrorKind::kUnsupportedDirection);
  EXPECT_EQ(kind_of("eng", "eng", synthetic_lines(3, 25)), ErrorKind::kUnsupportedDirection);
  std::vector<std::string> huge(25, std::string(kMaxPayloadBytes / 20, 'a'));
  EXPECT_EQ(kind_of("eng", "fra", huge), ErrorKind::kPayloadTooLarge);
  EXPECT_EQ(service.submission_count(), 0u);
  EXPECT_THROW(service.leaderboard("eng", "xho"), Error);
}

TEST(EvalService, LeaderboardOrderAndTies) {
  Fixture f;
  EvalService service(f.config(), f.clock());
  const auto low = synthetic_lines(7, 25);
  const auto a = service.submit("fra", "eng", low);
  f.now += 10;
  const auto best = service.submit("fra", "eng", f.refs["eng"]);
  f.now += 10;
  const auto tie = service.submit("fra", "eng", low);
  const auto board = service.leaderboard("fra", "eng");
  ASSERT_EQ(board.size(), 3u);
  EXPECT_EQ(board[0].id, best.id);
  EXPECT_EQ(board[1].id, a.id);
  EXPECT_EQ(board[2].id, tie.id);
  EXPECT_EQ(board[1].score, board[2].score);
  EXPECT_TRUE(service.leaderboard("eng", "fra").empty());
}

TEST(EvalService, DeterministicAndReplayedAfterRestart) {
  Fixture f;
  std::vector<SubmissionSummary> before;
  const auto hyps = synthetic_lines(11, 25);
  double first = 0;
  {
    EvalService service(f.config(), f.clock());
    first = service.submit("deu", "fra", hyps).score;
    EXPECT_EQ(service.submit("deu", "fra", hyps).score, first);
    service.submit("deu", "fra", synthetic_lines(12, 25));
    before = service.leaderboard("deu", "fra");
  }
  EvalService restarted(f.config(), f.clock());
  const auto after = restarted.leaderboard("deu", "fra");
  ASSERT_EQ(after.size(), before.size());
  for (std::size_t i = 0; i < after.size(); ++i) {
    EXPECT_EQ(after[i].id, before[i].id);
    EXPECT_EQ(after[i].score, before[i].score);
    EXPECT_EQ(after[i].submitted_at, before[i].submitted_at);
  }
  EXPECT_EQ(restarted.submission_count(), 3u);
  EXPECT_EQ(restarted.submit("deu", "fra", hyps).id.rfind("sub-000003-", 0), 0u);
}

TEST(EvalService, MalformedLogRejected) {
  Fixture f;
  std::filesystem::create_directories(f.dir / "data");
  io::write_lines(f.dir / "data" / "submissions.jsonl", {"{\"id\": 3"});
  try {
    EvalService service(f.config(), f.clock());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kMalformedLog);
  }
}

TEST(HttpHandlers, StatusCodesAndNoReferenceLeak) {
  Fixture f;
  EvalService service(f.config(), f.clock());
  std::vector<HttpReply> replies;
  auto body = [](const std::string& s, const std::string& t, const std::vector<std::string>& h) {
    return json{{"src", s}, {"tgt", t}, {"hypotheses", h}}.dump();
  };
  replies.push_back(handle_submit(service, body("eng", "fra", f.refs["fra"])));
  EXPECT_EQ(replies.back().status, 200);
  replies.push_back(handle_submit(service, body("eng", "fra", synthetic_lines(5, 20))));
  EXPECT_EQ(replies.back().status, 422);
  EXPECT_EQ(json::parse(replies.back().body)["error"], "LineCountMismatch");
  replies.push_back(handle_submit(service, body("eng", "zul", f.refs["fra"])));
  EXPECT_EQ(replies.back().status, 404);
  replies.push_back(handle_submit(service, "{\"src\": 1}"));
  EXPECT_EQ(replies.back().status, 400);
  replies.push_back(handle_submit(service, std::string(kMaxPayloadBytes + 1, ' ')));
  EXPECT_EQ(replies.back().status, 413);
  replies.push_back(handle_leaderboard(service, "eng", "fra"));
  EXPECT_EQ(replies.back().status, 200);
  const auto board = json::parse(replies.back().body);
  EXPECT_EQ(board["entries"].size(), 1u);
  EXPECT_EQ(board["entries"][0]["timestamp"], "2023-11-14T22:13:20Z");
  replies.push_back(handle_leaderboard(service, "eng", "eng"));
  EXPECT_EQ(replies.back().status, 404);

  for (const auto& [lang, lines] : f.refs) {
    for (const auto& line : lines) {
      for (std::size_t i = 0; i + 10 <= line.size(); ++i) {
        const std::string piece = line.substr(i, 10);
        for (const auto& r : replies) EXPECT_EQ(r.body.find(piece), std::string::npos) << piece;
      }
    }
  }
}

TEST(HttpServer, RoundTripOverLoopback) {
  Fixture f;
  EvalService service(f.config(), f.clock());
  HttpServer server(service);
  const int port = server.bind("127.0.0.1", 0);
  std::thread worker([&] { server.run(); });
  httplib::Client client("127.0.0.1", port);
  const auto posted = client.Post(
      "/v1/submissions",
      json{{"src", "fra"}, {"tgt", "deu"}, {"hypotheses", f.refs["deu"]}}.dump(),
      "application/json");
  ASSERT_TRUE(posted);
  EXPECT_EQ(posted->status, 200);
  EXPECT_EQ(json::parse(posted->body)["score"], 100.0);
  const auto got = client.Get("/v1/leaderboard?src=fra&tgt=deu");
  ASSERT_TRUE(got);
  EXPECT_EQ(json::parse(got->body)["entries"].size(), 1u);
  server.stop();
  worker.join();
}
