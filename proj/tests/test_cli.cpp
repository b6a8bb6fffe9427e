#include <doctest.h>

#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>

#include <json.hpp>

#include "support.hpp"

#ifndef MORTEM_BIN
#error "MORTEM_BIN must be defined"
#endif

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

const std::filesystem::path& dir() {
  static const auto d = testing::scratch_dir("cli");
  return d;
}

Run cli(const std::string& args) {
  const auto out = dir() / "stdout.txt";
  const auto err = dir() / "stderr.txt";
  const std::string command =
      std::string(MORTEM_BIN) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(command.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = testing::read_file(out);
  r.err = testing::read_file(err);
  return r;
}

std::string path(const std::string& name) { return (dir() / name).string(); }

// A small labeled corpus shared by the tests below.
const std::string& corpus() {
  static const std::string p = [] {
    const auto target = path("corpus.jsonl");
    REQUIRE(cli("gen-synth --profiles 30 --seed 3 --out " + target).code == 0);
    return target;
  }();
  return p;
}

}  // namespace

TEST_CASE("version and usage errors exit 1") {
  const auto v = cli("--version");
  CHECK(v.code == 0);
  CHECK(v.out.find("mortem 0.1.0") != std::string::npos);
  CHECK(cli("").code == 1);
  CHECK(cli("no-such-command").code == 1);
  CHECK(cli("cv --corpus " + corpus() + " --out " + path("r.json") + " --folds 1").code == 1);
  CHECK(cli("early --corpus " + corpus() + " --out " + path("e.csv") + " --test-fraction 0").code == 1);
  CHECK(cli("train --corpus " + corpus() + " --out " + path("m.json") + " --model forest").code == 1);
  CHECK(cli("early --corpus " + corpus() + " --out " + path("e.csv") + " --unit comment").code == 1);
}

TEST_CASE("gen-synth summary and data errors exit 2") {
  const auto r = cli("gen-synth --profiles 10 --seed 1 --out " + path("ten.jsonl"));
  CHECK(r.code == 0);
  CHECK(r.out.rfind("profiles 10\ncomments ", 0) == 0);
  CHECK(cli("gen-synth --profiles 0 --out " + path("zero.jsonl")).code == 2);

  const auto locked = dir() / "locked";
  std::filesystem::create_directories(locked);
  ::chmod(locked.c_str(), 0500);
  if (::access((locked / "probe").c_str(), W_OK) != 0 && ::geteuid() != 0) {
    CHECK(cli("gen-synth --profiles 5 --out " + (locked / "c.jsonl").string()).code == 2);
  }
  ::chmod(locked.c_str(), 0700);
  CHECK(cli("gen-synth --profiles 5 --out " + path("no/such/dir/c.jsonl")).code == 2);
  CHECK(cli("stats --corpus " + path("missing.jsonl")).code == 2);
  testing::write_file(dir() / "broken.jsonl", "{\"comment_id\": 1}\n");
  const auto broken = cli("stats --corpus " + path("broken.jsonl"));
  CHECK(broken.code == 2);
  CHECK(broken.err.find("line 1") != std::string::npos);
}

TEST_CASE("gen-synth is deterministic") {
  REQUIRE(cli("gen-synth --profiles 12 --seed 9 --out " + path("a.jsonl")).code == 0);
  REQUIRE(cli("gen-synth --profiles 12 --seed 9 --out " + path("b.jsonl")).code == 0);
  CHECK(testing::read_file(dir() / "a.jsonl") == testing::read_file(dir() / "b.jsonl"));
}

TEST_CASE("stats report shape") {
  const auto r = cli("stats --corpus " + corpus() + " --out " + path("stats.json"));
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(testing::read_file(dir() / "stats.json"));
  CHECK(j["descriptive"]["total_profiles"] == 30);
  CHECK(j["top_ngrams"]["post"]["unigrams"].size() == 5);
  REQUIRE(j["clt_tests"].is_array());
  for (const auto& row : j["clt_tests"]) {
    CHECK(row["p_holm"].get<double>() >= row["p"].get<double>());
    if (row["reported"].get<bool>()) CHECK(row["significant"].get<bool>());
  }
}

TEST_CASE("train, classify and recall-only") {
  REQUIRE(cli("train --corpus " + corpus() + " --out " + path("lr.json") + " --top-features 3").code == 0);
  testing::write_file(dir() / "in.jsonl",
                      "{\"id\":\"x\",\"text\":\"rest in peace, miss you\"}\n{\"id\":\"y\",\"text\":\"hey lol\"}\n");
  REQUIRE(cli("classify --model " + path("lr.json") + " --in " + path("in.jsonl") + " --out " +
                 path("out.jsonl"))
              .code == 0);
  const auto rows = testing::read_file(dir() / "out.jsonl");
  std::istringstream lines(rows);
  std::string line;
  std::vector<nlohmann::json> parsed;
  while (std::getline(lines, line)) parsed.push_back(nlohmann::json::parse(line));
  REQUIRE(parsed.size() == 2);
  CHECK(parsed[0]["id"] == "x");
  CHECK(parsed[1]["id"] == "y");

  testing::write_file(dir() / "empty.jsonl", "");
  CHECK(cli("classify --model " + path("lr.json") + " --in " + path("empty.jsonl") + " --out " +
               path("empty_out.jsonl"))
            .code == 0);
  CHECK(testing::read_file(dir() / "empty_out.jsonl").empty());

  testing::write_file(dir() / "positives.jsonl",
                      "{\"comment_id\":\"a1\",\"profile_id\":\"a\",\"timestamp\":10,\"text\":\"rest in peace\"}\n"
                      "{\"comment_id\":\"b1\",\"profile_id\":\"b\",\"timestamp\":10,\"text\":\"miss you\","
                      "\"label\":\"post\"}\n");
  const auto recall = cli("recall-only --model " + path("lr.json") + " --corpus " + path("positives.jsonl"));
  CHECK(recall.code == 0);
  CHECK(recall.out.rfind("documents 2\nrecall ", 0) == 0);
  CHECK(cli("recall-only --model " + path("lr.json") + " --corpus " + corpus()).code == 2);
  CHECK(cli("recall-only --model " + path("lr.json") + " --corpus " + path("empty.jsonl")).code == 2);
  CHECK(cli("classify --model " + path("missing.json") + " --in " + path("in.jsonl") + " --out " +
               path("o.jsonl"))
            .code == 2);
}

TEST_CASE("baseline warns about ignored feature options") {
  const auto r = cli("train --corpus " + corpus() + " --out " + path("base.json") +
                        " --model baseline --features ngram");
  CHECK(r.code == 0);
  CHECK_FALSE(r.err.empty());
}

TEST_CASE("cv reports, compare and determinism") {
  const std::string common = "cv --corpus " + corpus() + " --folds 3 --seed 5";
  REQUIRE(cli(common + " --model nb --out " + path("nb.json")).code == 0);
  REQUIRE(cli(common + " --model nb --out " + path("nb2.json")).code == 0);
  CHECK(testing::read_file(dir() / "nb.json") == testing::read_file(dir() / "nb2.json"));
  REQUIRE(cli(common + " --model baseline --out " + path("base_cv.json")).code == 0);
  const auto cmp = cli("compare --report-a " + path("nb.json") + " --report-b " + path("base_cv.json"));
  CHECK(cmp.code == 0);
  CHECK(cli("compare --report-a " + path("nb.json") + " --report-b " + path("nb2.json")).code == 2);
  REQUIRE(cli("cv --corpus " + corpus() + " --folds 2 --seed 5 --model nb --out " + path("two.json")).code == 0);
  CHECK(cli("compare --report-a " + path("nb.json") + " --report-b " + path("two.json")).code == 2);
}

TEST_CASE("early detection output is byte-identical across runs") {
  const std::string args = "early --corpus " + corpus() + " --test-fraction 0.3 --seed 2 --model nb";
  REQUIRE(cli(args + " --out " + path("e1.csv")).code == 0);
  REQUIRE(cli(args + " --out " + path("e2.csv")).code == 0);
  const auto csv = testing::read_file(dir() / "e1.csv");
  CHECK(csv == testing::read_file(dir() / "e2.csv"));
  CHECK(csv.rfind("m,fraction\n", 0) == 0);
  CHECK(csv.find("\n\nday,fraction\n") != std::string::npos);
}
