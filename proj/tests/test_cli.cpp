#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <sstream>

#include "rweet/cli.hpp"
#include "support.hpp"

using namespace rweet;
using rweet::testing::slurp;
using rweet::testing::TempDir;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

class CliTest : public ::testing::Test {
 protected:
  TempDir tmp{"cli"};

  std::string path(const std::string& name) const { return (tmp / name).string(); }

  Outcome run(std::vector<std::string> args, const std::string& cache = "cache") {
    args.insert(args.begin(), {"--cache-dir", path(cache)});
    std::ostringstream out, err;
    int code = cli::run_cli(args, out, err);
    return {code, out.str(), err.str()};
  }

  void synth(const std::string& domain, const std::string& name, int seed, int size = 200) {
    auto r = run({"--seed", std::to_string(seed), "synth", "--domain", domain, "--size", std::to_string(size),
                  "--out", path(name)});
    ASSERT_EQ(r.code, 0) << r.err;
  }

  void write(const std::string& name, const std::string& body) { write_file_atomic(tmp / name, body); }
};

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_F(CliTest, UsageErrorsExitOne) {
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"frobnicate"}).code, 1);
  EXPECT_EQ(run({"synth", "--no-such-flag"}).code, 1);
  synth("binary", "b.jsonl", 1, 50);
  ASSERT_EQ(run({"preprocess", path("b.jsonl")}).code, 0);
  auto r = run({"featurize", path("b.jsonl"), "--combo", "25"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("combo"), std::string::npos);
  EXPECT_EQ(run({"evaluate", path("b.jsonl"), "--folds", "1"}).code, 1);
  EXPECT_EQ(run({"evaluate", path("b.jsonl"), "--classifier", "svm"}).code, 1);
}

TEST_F(CliTest, HelpExitsZero) {
  auto r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("series"), std::string::npos);
}

TEST_F(CliTest, MissingInputExitsTwo) {
  auto r = run({"preprocess", path("absent.jsonl")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("absent.jsonl"), std::string::npos);
}

TEST_F(CliTest, MalformedInputExitsThree) {
  write("bad.jsonl", "{\"id\": \"1\", \"text\": \"ok\"}\nnot json\n");
  auto r = run({"preprocess", path("bad.jsonl")});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find(":2"), std::string::npos);
}

TEST_F(CliTest, FeaturizeNeedsPreprocessAndReusesCache) {
  synth("binary", "b.jsonl", 2, 80);
  EXPECT_EQ(run({"featurize", path("b.jsonl"), "--combo", "10"}).code, 4);
  ASSERT_EQ(run({"preprocess", path("b.jsonl")}).code, 0);
  auto first = run({"featurize", path("b.jsonl"), "--combo", "10"});
  ASSERT_EQ(first.code, 0) << first.err;
  EXPECT_EQ(first.out.find("cache hit"), std::string::npos);
  EXPECT_NE(first.err.find("vocabulary"), std::string::npos);
  auto second = run({"featurize", path("b.jsonl"), "--combo", "10"});
  ASSERT_EQ(second.code, 0);
  EXPECT_NE(second.out.find("cache hit"), std::string::npos);
  // Preprocessing under other options makes the cached clean corpus stale.
  EXPECT_EQ(run({"featurize", path("b.jsonl"), "--combo", "10", "--min-tokens", "3"}).code, 4);
}

TEST_F(CliTest, RulesClassify) {
  write("r.jsonl",
        "{\"id\": \"1\", \"text\": \"Where can I donate clothes\"}\n"
        "{\"id\": \"2\", \"text\": \"what a lovely sunny afternoon\"}\n");
  auto r = run({"rules", "classify", path("r.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  auto first = nlohmann::json::parse(line);
  EXPECT_EQ(first["rule_label"], "rweet");
  std::getline(in, line);
  auto second = nlohmann::json::parse(line);
  EXPECT_EQ(second["rule_label"], "not_rweet");
  EXPECT_EQ(second["rule_bits"].size(), 18u);
}

TEST_F(CliTest, EvaluateIsReproducible) {
  synth("binary", "b.jsonl", 3, 150);
  auto a = run({"evaluate", path("b.jsonl"), "--combo", "10", "--report", path("a.json")});
  ASSERT_EQ(a.code, 0) << a.err;
  auto b = run({"evaluate", path("b.jsonl"), "--combo", "10", "--report", path("b.json")});
  ASSERT_EQ(b.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(slurp(tmp / "a.json"), slurp(tmp / "b.json"));
  EXPECT_NE(a.out.find("5-fold"), std::string::npos);
  auto j = nlohmann::json::parse(slurp(tmp / "a.json"));
  EXPECT_GT(j["accuracy"].get<double>(), 0.8);
  auto resub = run({"evaluate", path("b.jsonl"), "--combo", "10", "--resubstitution"});
  ASSERT_EQ(resub.code, 0);
  EXPECT_NE(resub.out.find("resubstitution"), std::string::npos);
}

TEST_F(CliTest, TrainThenSeries) {
  synth("binary", "b.jsonl", 4, 200);
  synth("categorical", "c.jsonl", 5, 200);
  synth("binary", "input.jsonl", 6, 120);
  auto t = run({"train", "--binary", path("b.jsonl"), "--categorical", path("c.jsonl"), "--combo", "10"});
  ASSERT_EQ(t.code, 0) << t.err;
  auto first = run({"series", path("input.jsonl"), "--out", path("s1.jsonl")});
  ASSERT_EQ(first.code, 0) << first.err;
  auto out = slurp(tmp / "s1.jsonl");
  EXPECT_GT(lines(out), 0u);
  std::istringstream in(out);
  for (std::string line; std::getline(in, line);) {
    auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j.contains("stage2"), j["stage1"] == "rweet");
  }
  auto warm = run({"series", path("input.jsonl"), "--no-recompute"});
  ASSERT_EQ(warm.code, 0) << warm.err;
  EXPECT_EQ(warm.out, out);
  EXPECT_NE(warm.err.find("cache hit"), std::string::npos);
  auto cold = run({"series", path("input.jsonl"), "--no-recompute", "--model", path("cache/staged")}, "other");
  EXPECT_EQ(cold.code, 4);
  EXPECT_EQ(run({"series", path("input.jsonl"), "--model", path("nowhere")}).code, 2);
}

TEST_F(CliTest, ConfigFileWithOverrides) {
  synth("binary", "b.jsonl", 7, 60);
  ASSERT_EQ(run({"preprocess", path("b.jsonl")}).code, 0);
  write("rweet.conf", "# feature settings\ncombo = 25\n");
  EXPECT_EQ(run({"--config", path("rweet.conf"), "featurize", path("b.jsonl")}).code, 1);
  auto r = run({"--config", path("rweet.conf"), "featurize", path("b.jsonl"), "--combo", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("tf-1-2"), std::string::npos);
  write("seed.conf", "seed=9\nsize=7\n");
  auto s = run({"--config", path("seed.conf"), "synth"});
  ASSERT_EQ(s.code, 0) << s.err;
  EXPECT_EQ(lines(s.out), 7u);
  EXPECT_EQ(s.out, run({"--seed", "9", "synth", "--size", "7"}).out);
  EXPECT_EQ(run({"--config", path("none.conf"), "synth"}).code, 2);
}

TEST_F(CliTest, BinaryExitCodes) {
  auto status = [&](const std::string& args) {
    std::string cmd = std::string(RWEET_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    int raw = std::system(cmd.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  EXPECT_EQ(status("--cache-dir " + path("c") + " synth --size 3"), 0);
  EXPECT_EQ(status("--cache-dir " + path("c") + " preprocess " + path("missing.jsonl")), 2);
  EXPECT_EQ(status("--bogus"), 1);
}
