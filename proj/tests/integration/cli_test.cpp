#include <gtest/gtest.h>

#include <cstdlib>
#include <json.hpp>
#include <sstream>

#include "cli.hpp"
#include "factcheck/ingestion.hpp"
#include "factcheck/reporting.hpp"
#include "fake_service.hpp"
#include "scenarios.hpp"

namespace factcheck {
namespace {

using testing::dist;
using testing::read_text;
using testing::write_text;

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& p) {
  std::vector<nlohmann::json> rows;
  std::istringstream in(read_text(p));
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) rows.push_back(nlohmann::json::parse(line));
  }
  return rows;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override { ::unsetenv("FACTCHECK_ENDPOINT"); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  std::string write(const std::string& name, const std::string& content) const {
    write_text(dir_ / name, content);
    return path(name);
  }

  std::string write_examples(const std::string& name, const std::vector<Example>& examples) const {
    std::ostringstream s;
    write_examples_jsonl(examples, s);
    return write(name, s.str());
  }

  testing::TempDir dir_;
};

TEST_F(CliTest, BlueSpiceWithFixture) {
  const std::string input = write_examples("in.jsonl", {testing::blue_spice_example()});
  const std::string text = testing::kBlueSpiceText;
  const std::string pub = "Blue Spice is a pub.";
  const std::string area = "Blue Spice is located in the riverside.";
  const std::string fixture = write(
      "fx.json", testing::fixture_json({{{text, pub}, dist(0.3, 0.6, 0.1)},
                                        {{text, area}, dist(0.05, 0.15, 0.8)},
                                        {{pub + " " + area, text}, dist(0.2, 0.5, 0.3)}}));
  const auto r = run_cli({"evaluate", "--input", input, "--out", path("res.jsonl"), "--fixture",
                          fixture, "--templates", "builtin:e2e"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const auto rows = read_jsonl(path("res.jsonl"));
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0]["fine"], "omission+hallucination");
  EXPECT_EQ(rows[0]["per_fact_passed"], nlohmann::json::array({false, true}));
  EXPECT_EQ(rows[0]["confidence"], 0.1);
  EXPECT_NE(r.out.find("omission+hallucination: 1"), std::string::npos);
  const auto stats = nlohmann::json::parse(read_text(path("res.jsonl.stats.json")));
  EXPECT_EQ(stats["examples"], 1);
  EXPECT_EQ(stats["cache_lookups"], 3);
}

TEST_F(CliTest, BackoffOnlyAndRawBackoff) {
  const std::string input = write_examples("in.jsonl", {testing::blue_spice_example()});
  const std::string fixture = write("fx.json", testing::fixture_json({}, dist(0.1, 0.1, 0.8)));
  ASSERT_EQ(run_cli({"evaluate", "--input", input, "--out", path("a.jsonl"), "--fixture", fixture,
                     "--backoff-only"})
                .code,
            0);
  EXPECT_EQ(read_jsonl(path("a.jsonl"))[0]["facts"][0]["text"], "The eat type of Blue Spice is pub.");
  ASSERT_EQ(run_cli({"evaluate", "--input", input, "--out", path("b.jsonl"), "--fixture", fixture,
                     "--raw-backoff"})
                .code,
            0);
  EXPECT_EQ(read_jsonl(path("b.jsonl"))[0]["facts"][0]["text"], "The eat_type of Blue Spice is pub.");
  EXPECT_EQ(read_jsonl(path("b.jsonl"))[0]["fine"], "OK");
}

TEST_F(CliTest, EmptyInput) {
  const std::string input = write("empty.jsonl", "");
  const std::string fixture = write("fx.json", testing::fixture_json({}));
  const auto r = run_cli({"evaluate", "--input", input, "--out", path("res.jsonl"), "--fixture",
                          fixture});
  EXPECT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_EQ(read_text(path("res.jsonl")), "");
  EXPECT_NE(r.out.find("examples: 0"), std::string::npos);
}

TEST_F(CliTest, UnreachableEndpointWritesNothing) {
  const std::string input = write_examples("in.jsonl", {testing::blue_spice_example()});
  const std::string url = "http://127.0.0.1:" + std::to_string(testing::unused_port());
  const auto r = run_cli({"evaluate", "--input", input, "--out", path("res.jsonl"), "--endpoint",
                          url, "--timeout", "2"});
  EXPECT_EQ(r.code, cli::kExitEvaluationFailed);
  EXPECT_FALSE(std::filesystem::exists(path("res.jsonl")));
  EXPECT_NE(r.err.find("unreachable"), std::string::npos) << r.err;
}

TEST_F(CliTest, EndpointFromEnvironment) {
  testing::FakeNliService service;
  const std::string input = write_examples("in.jsonl", testing::synthetic_corpus(10, 4));
  ::setenv("FACTCHECK_ENDPOINT", service.url().c_str(), 1);
  const auto r = run_cli({"evaluate", "--input", input, "--out", path("res.jsonl"), "--templates",
                          "builtin:e2e", "--batch-size", "4"});
  ::unsetenv("FACTCHECK_ENDPOINT");
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_EQ(read_jsonl(path("res.jsonl")).size(), 10u);
  EXPECT_NE(r.err.find("fake-nli"), std::string::npos);
}

TEST_F(CliTest, ConfigurationErrors) {
  const std::string input = write_examples("in.jsonl", {testing::blue_spice_example()});
  const std::string fixture = write("fx.json", testing::fixture_json({}, dist(0.1, 0.1, 0.8)));
  EXPECT_EQ(run_cli({"evaluate", "--input", input, "--out", path("r.jsonl")}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"evaluate", "--input", input, "--out", path("r.jsonl"), "--fixture", fixture,
                     "--endpoint", "http://127.0.0.1:1"})
                .code,
            cli::kExitUsage);
  EXPECT_EQ(run_cli({"evaluate", "--input", path("nope.jsonl"), "--out", path("r.jsonl"),
                     "--fixture", fixture})
                .code,
            cli::kExitUsage);
  EXPECT_EQ(run_cli({"evaluate", "--input", input, "--out", path("r.jsonl"), "--fixture", fixture,
                     "--mode", "sideways"})
                .code,
            cli::kExitUsage);
  const std::string bad = write("bad.jsonl", R"({"id":"x","triples":[],"text":"t"})");
  const auto r = run_cli({"evaluate", "--input", bad, "--out", path("r.jsonl"), "--fixture", fixture});
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_NE(r.err.find("line 1"), std::string::npos) << r.err;
  EXPECT_EQ(run_cli({"frobnicate"}).code, cli::kExitUsage);
  EXPECT_FALSE(std::filesystem::exists(path("r.jsonl")));
}

TEST_F(CliTest, EvaluationErrorsRecordedOrFailFast) {
  const std::string input = write_examples("in.jsonl", {testing::blue_spice_example()});
  const std::string fixture = write("fx.json", testing::fixture_json({}));
  const auto r = run_cli({"evaluate", "--input", input, "--out", path("res.jsonl"), "--fixture",
                          fixture});
  EXPECT_EQ(r.code, cli::kExitOk);
  const auto rows = read_jsonl(path("res.jsonl"));
  EXPECT_TRUE(rows[0].contains("error"));
  EXPECT_NE(r.err.find("evaluation_error: e1"), std::string::npos);
  const auto ff = run_cli({"evaluate", "--input", input, "--out", path("ff.jsonl"), "--fixture",
                           fixture, "--fail-fast"});
  EXPECT_EQ(ff.code, cli::kExitEvaluationFailed);
  EXPECT_FALSE(std::filesystem::exists(path("ff.jsonl")));
}

TEST_F(CliTest, ByteIdenticalAcrossRunsAndParallelism) {
  const auto corpus = testing::synthetic_corpus(120, 7);
  const std::string templates = write("t.tsv", testing::multi_template_tsv());
  auto reg = load_registry(std::filesystem::path(templates));
  reg.set_seed(99);
  const std::string input = write_examples("in.jsonl", corpus);
  const std::string fixture =
      write("fx.json", testing::fixture_json(testing::hash_pairs_for(corpus, reg)));
  std::vector<std::string> outputs;
  for (const char* par : {"1", "8", "1", "8"}) {
    const std::string out = path(std::string("res-") + par + "-" +
                                 std::to_string(outputs.size()) + ".jsonl");
    const auto r = run_cli({"evaluate", "--input", input, "--out", out, "--fixture", fixture,
                            "--templates", templates, "--seed", "99", "--parallelism", par});
    ASSERT_EQ(r.code, 0) << r.err;
    outputs.push_back(read_text(out) + read_text(out + ".stats.json"));
  }
  for (const auto& o : outputs) EXPECT_EQ(o, outputs.front());
  EXPECT_EQ(read_jsonl(path("res-1-0.jsonl")).size(), 120u);
  EXPECT_EQ(read_text(path("res-1-0.jsonl")).find("\"error\""), std::string::npos);
}

TEST_F(CliTest, ScorePerfectAndExcluded) {
  std::vector<Example> gold_examples;
  std::ostringstream results;
  const std::vector<FineVerdict> verdicts{FineVerdict::ok, FineVerdict::omission,
                                          FineVerdict::hallucination,
                                          FineVerdict::omission_and_hallucination};
  for (std::size_t i = 0; i < 8; ++i) {
    const FineVerdict v = verdicts[i % 4];
    gold_examples.push_back(Example{"g" + std::to_string(i), {Triple("a", "b", "c")}, "t",
                                    GoldLabel(v), 1.0 + 0.25 * double(i)});
    results << R"({"id":"g)" << i << R"(","num_triples":1,"fine":")" << to_string(v)
            << R"(","confidence":)" << 0.1 * double(i + 1) << "}\n";
  }
  const std::string gold = write_examples("gold.jsonl", gold_examples);
  const std::string res = write("res.jsonl", results.str());
  const auto r = run_cli({"score", "--results", res, "--gold", gold, "--out", path("score.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("   1.000   1.000"), std::string::npos) << r.out;
  const auto report = nlohmann::json::parse(read_text(path("score.json")));
  EXPECT_EQ(report["accuracy_fine"], 1.0);
  EXPECT_EQ(report["f1"], 1.0);
  EXPECT_NEAR(report["confidence_rho"].get<double>(), 1.0, 1e-12);

  const std::string with_errors =
      write("res2.jsonl", results.str() + R"({"id":"g8","num_triples":2,"error":"x"})" "\n" +
                              R"({"id":"g9","num_triples":2,"error":"y"})" "\n");
  const auto r2 = run_cli({"score", "--results", with_errors, "--gold", gold});
  ASSERT_EQ(r2.code, 0) << r2.err;
  EXPECT_NE(r2.out.find("excluded: 2"), std::string::npos) << r2.out;
  EXPECT_NE(r2.out.find("scored: 8"), std::string::npos);
}

TEST_F(CliTest, ScoreTwentyItemFixture) {
  std::vector<Example> gold_examples;
  std::ostringstream results;
  const auto layout = testing::twenty_item_layout();
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const auto [g, p] = layout[i];
    gold_examples.push_back(Example{"i" + std::to_string(i), {Triple("a", "b", "c")}, "t",
                                    GoldLabel(g ? RoughVerdict::not_ok : RoughVerdict::ok), {}});
    results << R"({"id":"i)" << i << R"(","fine":")" << (p ? "omission" : "OK")
            << R"(","confidence":0.5})" << "\n";
  }
  const auto r = run_cli({"score", "--results", write("res.jsonl", results.str()), "--gold",
                          write_examples("gold.jsonl", gold_examples), "--out", path("s.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto report = nlohmann::json::parse(read_text(path("s.json")));
  EXPECT_NEAR(report["precision"].get<double>(), 0.625, 1e-9);
  EXPECT_NEAR(report["recall"].get<double>(), 5.0 / 7.0, 1e-9);
  EXPECT_NEAR(report["f1"].get<double>(), 2.0 / 3.0, 1e-9);
  EXPECT_EQ(report["confusion"]["tp"], 5);
  EXPECT_TRUE(report["accuracy_fine"].is_null());
  EXPECT_NE(r.out.find("   0.750   0.714   0.625   0.667     n/a"), std::string::npos) << r.out;
}

TEST_F(CliTest, ScoreWithRatingsCsv) {
  const std::string res = write("res.jsonl", R"({"id":"w1","fine":"omission","confidence":0.2})"
                                             "\n"
                                             R"({"id":"w2","fine":"OK","confidence":0.9})"
                                             "\n"
                                             R"({"id":"w3","fine":"OK","confidence":0.7})"
                                             "\n");
  const std::string csv = write("ratings.csv", "id,mean\nw1,2.33\nw2,2.5\nw3,3\n");
  const auto r = run_cli({"score", "--results", res, "--gold", csv, "--ratings", "--score-column",
                          "mean", "--out", path("s.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto report = nlohmann::json::parse(read_text(path("s.json")));
  EXPECT_EQ(report["accuracy_rough"], 1.0);
  EXPECT_EQ(report["confusion"]["tp"], 1);
  EXPECT_EQ(run_cli({"score", "--results", res, "--gold", csv, "--ratings"}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"score", "--results", res, "--gold", csv, "--ratings", "--score-column",
                     "mean", "--threshold", "4"})
                .code,
            cli::kExitUsage);
}

TEST_F(CliTest, ScoreMissingGold) {
  const std::string res = write("res.jsonl", R"({"id":"zz","fine":"OK","confidence":0.9})" "\n");
  const std::string gold = write_examples(
      "gold.jsonl", {Example{"aa", {Triple("a", "b", "c")}, "t", GoldLabel(RoughVerdict::ok), {}}});
  const auto r = run_cli({"score", "--results", res, "--gold", gold});
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_NE(r.err.find("zz"), std::string::npos);
}

TEST_F(CliTest, ExtractTemplatesDeterministic) {
  const std::string input = write(
      "single.jsonl",
      R"({"id":"1","triples":[["Aenir","language","English language"]],"text":"One of the languages of Aenir is English language."})"
      "\n"
      R"({"id":"2","triples":[["René Goscinny","nationality","French people"]],"text":"René Goscinny was French people."})"
      "\n"
      R"({"id":"3","triples":[["X","p","Y"]],"text":"Z is great."})"
      "\n");
  const auto a = run_cli({"extract-templates", "--input", input, "--out", path("a.tsv")});
  const auto b = run_cli({"extract-templates", "--input", input, "--out", path("b.tsv")});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(read_text(path("a.tsv")), read_text(path("b.tsv")));
  EXPECT_NE(a.out.find("discarded: 1"), std::string::npos);
  const auto reg = load_registry(std::filesystem::path(path("a.tsv")));
  EXPECT_EQ(reg.lookup("nationality")[0].pattern, "<subject> was <object>.");

  const std::string multi = write(
      "multi.jsonl", read_text(input) +
                         R"({"id":"4","triples":[["a","b","c"],["d","e","f"]],"text":"t"})" "\n");
  const auto bad = run_cli({"extract-templates", "--input", multi, "--out", path("c.tsv")});
  EXPECT_EQ(bad.code, cli::kExitUsage);
  EXPECT_NE(bad.err.find("line 4"), std::string::npos) << bad.err;
}

TEST_F(CliTest, ConvertE2e) {
  const std::string csv = write(
      "e2e.csv",
      "mr,output\n"
      "\"name[The Punter], eatType[restaurant], food[Indian], priceRange[high], customer "
      "rating[average], area[city centre], familyFriendly[no], near[Express by Holiday Inn]\","
      "\"The Punter is a high priced, average rated, adult only Indian restaurant.\"\n");
  const auto r = run_cli({"convert-e2e", "--input", csv, "--out", path("e2e.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto examples = parse_jsonl(std::filesystem::path(path("e2e.jsonl")));
  ASSERT_EQ(examples.size(), 1u);
  EXPECT_EQ(examples[0].id, "e2e-1");
  ASSERT_EQ(examples[0].triples.size(), 7u);
  EXPECT_EQ(examples[0].triples[3], Triple("The Punter", "customer_rating", "average"));

  const std::string bad = write("bad.csv", "mr,output\n\"eatType[pub]\",text\n");
  const auto rb = run_cli({"convert-e2e", "--input", bad, "--out", path("bad.jsonl")});
  EXPECT_EQ(rb.code, cli::kExitUsage);
  EXPECT_NE(rb.err.find("line 2"), std::string::npos) << rb.err;
}

TEST_F(CliTest, ConvertTriples) {
  const std::string triples =
      write("t.txt", "Blue Spice | eat_type | pub\nBlue Spice | area | riverside\n\nX | p | Y\n");
  const std::string texts =
      write("texts.txt", std::string(testing::kBlueSpiceText) + "\nThe p of X is Y.\n");
  const auto r = run_cli({"convert-triples", "--triples", triples, "--texts", texts, "--out",
                          path("out.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto examples = parse_jsonl(std::filesystem::path(path("out.jsonl")));
  ASSERT_EQ(examples.size(), 2u);
  EXPECT_EQ(examples[0].triples, testing::blue_spice_example().triples);
  EXPECT_EQ(examples[1].id, "ex-2");

  const std::string broken = write("broken.txt", "a | b | c\n\nd | e\n");
  const auto rb = run_cli({"convert-triples", "--triples", broken, "--texts", texts, "--out",
                           path("o2.jsonl")});
  EXPECT_EQ(rb.code, cli::kExitUsage);
  EXPECT_NE(rb.err.find("line 3"), std::string::npos) << rb.err;
}

TEST_F(CliTest, Help) {
  const auto r = run_cli({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("evaluate"), std::string::npos);
}

}  // namespace
}  // namespace factcheck
