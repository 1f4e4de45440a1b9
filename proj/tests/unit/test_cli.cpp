#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "selfplay/cli.hpp"

using namespace selfplay;
namespace fs = std::filesystem;

namespace {

struct Invocation {
  int code = -1;
  std::string out, err;
};

Invocation run_cli(std::vector<std::string> args, const std::string& input = "") {
  args.insert(args.begin(), "selfplay");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::istringstream in(input);
  std::ostringstream out, err;
  Invocation r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), in, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path fresh_dir(const std::string& name) {
  auto d = fs::temp_directory_path() / ("selfplay_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream f(p);
  std::vector<std::string> lines;
  for (std::string l; std::getline(f, l);) lines.push_back(l);
  return lines;
}

void write_file(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

}  // namespace

TEST(Cli, FlagsOverrideFileOverrideDefaults) {
  const auto d = fresh_dir("precedence");
  write_file(d / "cfg.json", R"({"beta": 0.3, "batch_size": 16, "seed": 9})");
  cli::Common c;
  c.config = (d / "cfg.json").string();
  const auto from_file = cli::resolve_config(c);
  EXPECT_EQ(from_file.weights.beta, 0.3);
  EXPECT_EQ(from_file.batch_size, 16);
  EXPECT_EQ(from_file.decay, TrainConfig{}.decay);

  const auto r = run_cli({"train", "--config", c.config, "--beta", "0.05", "--steps", "1",
                          "--games", "kuhn_poker", "--out", (d / "run").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream f(d / "run" / "config.json");
  const auto j = nlohmann::json::parse(f);
  EXPECT_EQ(j["beta"], 0.05);
  EXPECT_EQ(j["batch_size"], 16);
  EXPECT_EQ(j["seed"], 9);
  EXPECT_EQ(j["games"].size(), 1u);
}

TEST(Cli, RemoteWithoutEndpointIsConfigError) {
  const auto r = run_cli({"train", "--evaluator", "remote", "--model", "m"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("remote.endpoint"), std::string::npos);
}

TEST(Cli, EndpointFlagCompletesRemoteConfigFromFile) {
  const auto d = fresh_dir("remote_file");
  write_file(d / "cfg.json", R"({"evaluator": "remote", "remote": {"model": "m"}})");
  cli::Common c;
  c.config = (d / "cfg.json").string();
  cli::Overrides o;
  CLI::App app;
  cli::add_overrides(app, o);
  const char* argv[] = {"x", "--endpoint", "http://127.0.0.1:1/v1"};
  app.parse(3, argv);
  const auto cfg = cli::resolve_config(c, &o);
  EXPECT_EQ(cfg.remote.endpoint, "http://127.0.0.1:1/v1");
  EXPECT_EQ(cfg.remote.model, "m");
}

TEST(Cli, AllConfigProblemsReportedTogether) {
  const auto r = run_cli({"train", "--beta", "-1", "--decay", "2", "--steps", "0"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("beta"), std::string::npos);
  EXPECT_NE(r.err.find("decay"), std::string::npos);
  EXPECT_NE(r.err.find("steps"), std::string::npos);
}

TEST(Cli, NoSecretFlag) {
  EXPECT_EQ(run_cli({"train", "--api-key", "abc"}).code, 2);
}

TEST(Cli, UnknownSubcommandAndHelp) {
  EXPECT_EQ(run_cli({"frobnicate"}).code, 2);
  const auto h = run_cli({"--help"});
  EXPECT_EQ(h.code, 0);
  EXPECT_NE(h.out.find("sweep-beta"), std::string::npos);
}

TEST(Cli, TrainScoreAgreePipeline) {
  const auto d = fresh_dir("pipeline");
  const auto run = d / "run";
  auto r = run_cli({"train", "--games", "tictactoe", "--steps", "2", "--batch-size", "8",
                    "--out", run.string(), "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_lines(run / "reports.jsonl").size(), 2u);
  EXPECT_TRUE(fs::exists(run / "checkpoints" / "step-2.json"));
  const auto trj = read_lines(run / "trajectories.jsonl");
  ASSERT_EQ(trj.size(), 16u);

  // One malformed line in the middle is skipped with its line number.
  const auto in = d / "in.jsonl";
  {
    std::ofstream f(in);
    f << trj[0] << "\n{not json\n";
    for (std::size_t i = 1; i < trj.size(); ++i) f << trj[i] << '\n';
  }
  r = run_cli({"score", "--in", in.string(), "--output", (d / "scored.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("line 2"), std::string::npos) << r.err;
  const auto scored = read_lines(d / "scored.jsonl");
  ASSERT_EQ(scored.size(), 16u);
  const auto j = nlohmann::json::parse(scored[0]);
  ASSERT_GE(j["scores"].size(), 2u);
  const auto& blk = j["scores"].back();
  EXPECT_EQ(blk["evaluator_id"], "heuristic-v1");
  EXPECT_TRUE(blk["phi"]["value"].is_number());
  EXPECT_TRUE(blk["a_game"].is_number());

  r = run_cli({"agree", "--a", (d / "scored.jsonl").string(), "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto agree = nlohmann::json::parse(r.out);
  EXPECT_EQ(agree["psi"]["n"], 16);
}

TEST(Cli, ScoreEmitsFailedRecordsWhenJudgeUnreachable) {
  const auto d = fresh_dir("score_fail");
  auto r = run_cli({"train", "--games", "kuhn_poker", "--steps", "1", "--batch-size", "2",
                    "--out", (d / "run").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  write_file(d / "cfg.json",
             R"({"remote": {"timeout_ms": 200, "max_attempts": 1}})");
  r = run_cli({"score", "--config", (d / "cfg.json").string(), "--in",
               (d / "run" / "trajectories.jsonl").string(), "--evaluator", "remote", "--endpoint",
               "http://127.0.0.1:9/v1/chat/completions", "--model", "m", "--output",
               (d / "out.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = read_lines(d / "out.jsonl");
  ASSERT_EQ(lines.size(), 2u);
  for (const auto& l : lines) {
    const auto blk = nlohmann::json::parse(l)["scores"].back();
    EXPECT_EQ(blk["evaluator_status"], "failed");
    EXPECT_TRUE(blk["phi"]["value"].is_null());
  }
  EXPECT_NE(r.err.find("failed"), std::string::npos);
}

TEST(Cli, AgreeNeedsTwoPairs) {
  const auto d = fresh_dir("agree_small");
  write_file(d / "empty.jsonl", "");
  const auto r = run_cli({"agree", "--a", (d / "empty.jsonl").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("at least 2"), std::string::npos);
}

TEST(Cli, EvalReportsRatesAndRejectsUnsupportedOpponent) {
  auto r = run_cli({"eval", "--game", "tictactoe", "--n", "20", "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  ASSERT_EQ(j["rows"].size(), 2u);
  for (const auto& row : j["rows"])
    EXPECT_EQ(row["wins"].get<int>() + row["draws"].get<int>() + row["losses"].get<int>(), 20);

  r = run_cli({"eval", "--game", "kuhn_poker", "--opponent", "ttt_minimax"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("not available"), std::string::npos);
  EXPECT_EQ(run_cli({"eval", "--game", "chess"}).code, 2);
  EXPECT_EQ(run_cli({"eval", "--game", "tictactoe", "--n", "0"}).code, 2);
}

TEST(Cli, EvalIsDeterministicForSeed) {
  const auto a = run_cli({"eval", "--game", "kuhn_poker", "--n", "50", "--seed", "5", "--json"});
  const auto b = run_cli({"eval", "--game", "kuhn_poker", "--n", "50", "--seed", "5", "--json"});
  EXPECT_EQ(a.out, b.out);
}

TEST(Cli, PlayRepromptsOnIllegalMoveAndRecords) {
  const auto d = fresh_dir("play");
  const auto rec = d / "rec.jsonl";
  // Fill every square in order; the first free one is always legal.
  std::string moves = "9\nfoo\n";
  for (int i = 0; i < 9; ++i) moves += std::to_string(i) + "\n";
  const auto r = run_cli({"play", "--game", "tictactoe", "--record", rec.string(), "--seed", "1"},
                         moves);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("'9' is not legal"), std::string::npos);
  EXPECT_NE(r.out.find("'foo' is not legal"), std::string::npos);
  EXPECT_NE(r.out.find("Agent reasoning:"), std::string::npos);
  EXPECT_NE(r.out.find("Result:"), std::string::npos);
  EXPECT_EQ(read_lines(rec).size(), 1u);
}

TEST(Cli, PlayEofAbandonsWithoutRecording) {
  const auto d = fresh_dir("play_eof");
  const auto rec = d / "rec.jsonl";
  const auto r = run_cli({"play", "--game", "tictactoe", "--record", rec.string()}, "4\n");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("abandoned"), std::string::npos);
  EXPECT_FALSE(fs::exists(rec));
}

TEST(Cli, PlayKuhnHidesAgentCardUntilShowdown) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto r = run_cli({"play", "--game", "kuhn_poker", "--seat", "1", "--seed",
                            std::to_string(seed), "--greedy"},
                           "call\ncheck\ncall\n");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto showdown = r.out.find("Showdown:");
    const bool folded = r.out.find("Agent plays: fold") != std::string::npos;
    EXPECT_EQ(showdown == std::string::npos, folded) << r.out;
    EXPECT_EQ(r.out.find("agent held"), showdown == std::string::npos ? std::string::npos
                                                                       : showdown + 14);
  }
}

TEST(Cli, ExportCheckpointProbabilitiesSumToOne) {
  const auto d = fresh_dir("export");
  ASSERT_EQ(run_cli({"train", "--games", "kuhn_poker", "--steps", "1", "--batch-size", "8",
                     "--out", (d / "run").string()})
                .code,
            0);
  const auto r = run_cli({"export", "--checkpoint",
                          (d / "run" / "checkpoints" / "step-1.json").string(), "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  ASSERT_FALSE(j["policy"].empty());
  for (const auto& [key, row] : j["policy"].items()) {
    double s = 0;
    for (const auto& [a, p] : row.items()) s += p.get<double>();
    EXPECT_NEAR(s, 1.0, 1e-12) << key;
  }

  const auto t = run_cli({"export", "--trajectories", (d / "run" / "trajectories.jsonl").string()});
  ASSERT_EQ(t.code, 0) << t.err;
  EXPECT_NE(t.out.find("Turn 0 [Role 0]"), std::string::npos);
  EXPECT_EQ(run_cli({"export"}).code, 2);
}

TEST(Cli, SweepWritesTable) {
  const auto d = fresh_dir("sweep");
  const auto r = run_cli({"sweep-beta", "--games", "kuhn_poker", "--steps", "1", "--batch-size",
                          "4", "--betas", "0.1", "0.2", "--matches", "10", "--out", d.string(),
                          "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  ASSERT_EQ(j.size(), 2u);
  EXPECT_EQ(j[0]["beta"], 0.1);
  EXPECT_TRUE(j[1]["exploitability"]["exploitability"].is_number());
  EXPECT_TRUE(fs::exists(d / "sweep.json"));
  EXPECT_TRUE(fs::exists(d / "beta-0.2" / "config.json"));
}
