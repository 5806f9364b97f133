#include "factcheck/reporting.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <random>
#include <sstream>

#include "factcheck/errors.hpp"
#include "factcheck/text.hpp"

namespace factcheck {

namespace {

using ojson = nlohmann::ordered_json;

ojson distribution_json(const NliDistribution& d) {
  return {{"contradiction", d.contradiction()},
          {"neutral", d.neutral()},
          {"entailment", d.entailment()}};
}

std::string fixed3(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(3) << v;
  return s.str();
}

}  // namespace

std::string example_to_json(const Example& ex) {
  ojson obj;
  obj["id"] = ex.id;
  auto& triples = obj["triples"] = ojson::array();
  for (const Triple& t : ex.triples) triples.push_back({t.subject(), t.predicate(), t.object()});
  obj["text"] = ex.text;
  if (ex.gold) {
    ojson gold = ojson::object();
    if (ex.gold->fine()) gold["fine"] = to_string(*ex.gold->fine());
    gold["rough"] = to_string(ex.gold->rough());
    obj["gold"] = std::move(gold);
  }
  if (ex.human_score) obj["human_score"] = *ex.human_score;
  return obj.dump();
}

void write_examples_jsonl(std::span<const Example> examples, std::ostream& out) {
  for (const Example& ex : examples) out << example_to_json(ex) << '\n';
}

std::string outcome_to_json(const ExampleOutcome& outcome) {
  ojson obj;
  obj["id"] = outcome.example_id;
  obj["num_triples"] = outcome.triple_count;
  if (!outcome.result) {
    obj["error"] = outcome.error;
    return obj.dump();
  }
  const ExampleResult& r = *outcome.result;
  obj["fine"] = to_string(r.verdict.fine);
  obj["rough"] = to_string(r.verdict.rough);
  obj["confidence"] = r.verdict.confidence;
  obj["omission_confidence"] =
      r.omission_confidence ? ojson(*r.omission_confidence) : ojson(nullptr);
  auto& flags = obj["per_fact_passed"] = ojson::array();
  for (bool b : r.verdict.per_fact_passed) flags.push_back(b);
  auto& facts = obj["facts"] = ojson::array();
  for (const Fact& f : r.facts) {
    facts.push_back(
        {{"text", f.text}, {"template_id", f.template_id}, {"used_backoff", f.used_backoff}});
  }
  auto& checks = obj["checks"] = ojson::array();
  for (const CheckResult& c : r.checks) {
    ojson check = {{"direction", to_string(c.direction)},
                   {"premise", c.premise},
                   {"hypothesis", c.hypothesis}};
    check.update(distribution_json(c.distribution));
    check["passed"] = c.passed;
    checks.push_back(std::move(check));
  }
  return obj.dump();
}

void write_results_jsonl(std::span<const ExampleOutcome> outcomes, std::ostream& out) {
  for (const ExampleOutcome& o : outcomes) out << outcome_to_json(o) << '\n';
}

std::vector<Prediction> parse_results_jsonl(std::istream& in) {
  std::vector<Prediction> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::is_blank(line)) continue;
    ojson obj;
    try {
      obj = ojson::parse(line);
    } catch (const ojson::parse_error& e) {
      throw ParseError(line_no, "", std::string("malformed JSON: ") + e.what());
    }
    try {
      Prediction p;
      p.id = obj.at("id").get<std::string>();
      p.triple_count = obj.value("num_triples", std::size_t{0});
      if (!obj.contains("error")) {
        p.fine = parse_fine_verdict(obj.at("fine").get<std::string>());
        p.confidence = obj.at("confidence").get<double>();
        if (auto rough = obj.find("rough"); rough != obj.end() &&
                                             parse_rough_verdict(rough->get<std::string>()) !=
                                                 to_rough(*p.fine)) {
          throw InvalidArgument("rough verdict disagrees with fine verdict");
        }
      }
      out.push_back(std::move(p));
    } catch (const ojson::exception& e) {
      throw ParseError(line_no, "", e.what());
    } catch (const InvalidArgument& e) {
      throw ParseError(line_no, "", e.what());
    }
  }
  return out;
}

std::string run_stats_json(const RunStats& stats) {
  ojson obj;
  obj["examples"] = stats.examples;
  obj["evaluation_errors"] = stats.errors;
  ojson counts = ojson::object();
  for (FineVerdict v : {FineVerdict::ok, FineVerdict::omission, FineVerdict::hallucination,
                        FineVerdict::omission_and_hallucination}) {
    counts[std::string(to_string(v))] = stats.count(v);
  }
  obj["fine_counts"] = std::move(counts);
  if (stats.cache) {
    obj["cache_lookups"] = stats.cache->lookups;
    obj["cache_hits"] = stats.cache->hits;
  }
  return obj.dump(2) + "\n";
}

std::string score_report_json(const ScoreReport& report) {
  ojson obj;
  obj["n"] = report.n;
  obj["n_excluded"] = report.n_excluded;
  obj["accuracy_rough"] = report.accuracy_rough;
  obj["accuracy_fine"] = report.accuracy_fine ? ojson(*report.accuracy_fine) : ojson(nullptr);
  obj["precision"] = report.precision;
  obj["recall"] = report.recall;
  obj["f1"] = report.f1;
  obj["confusion"] = {{"tp", report.confusion.tp},
                      {"fp", report.confusion.fp},
                      {"fn", report.confusion.fn},
                      {"tn", report.confusion.tn}};
  if (report.fine_confusion) {
    // rows = gold, columns = predicted
    ojson rows = ojson::object();
    const std::array verdicts{FineVerdict::ok, FineVerdict::omission, FineVerdict::hallucination,
                              FineVerdict::omission_and_hallucination};
    for (FineVerdict g : verdicts) {
      ojson row = ojson::object();
      for (FineVerdict p : verdicts) {
        row[std::string(to_string(p))] =
            (*report.fine_confusion)[static_cast<std::size_t>(g)][static_cast<std::size_t>(p)];
      }
      rows[std::string(to_string(g))] = std::move(row);
    }
    obj["fine_confusion"] = std::move(rows);
  }
  obj["confidence_rho"] = report.confidence_rho ? ojson(*report.confidence_rho) : ojson(nullptr);
  obj["error_size_rho"] = report.error_size_rho ? ojson(*report.error_size_rho) : ojson(nullptr);
  obj["warnings"] = report.warnings;
  return obj.dump(2) + "\n";
}

std::string score_report_table(const ScoreReport& report) {
  std::vector<std::pair<std::string, std::string>> cols;
  if (report.accuracy_fine) {
    cols.emplace_back("Af", fixed3(*report.accuracy_fine));
    cols.emplace_back("Ar", fixed3(report.accuracy_rough));
  } else {
    cols.emplace_back("A", fixed3(report.accuracy_rough));
  }
  cols.emplace_back("R", fixed3(report.recall));
  cols.emplace_back("P", fixed3(report.precision));
  cols.emplace_back("F1", fixed3(report.f1));
  cols.emplace_back("rho", report.confidence_rho ? fixed3(*report.confidence_rho) : "n/a");

  std::ostringstream out;
  for (const auto& [name, value] : cols) out << std::setw(8) << name;
  out << '\n';
  for (const auto& [name, value] : cols) out << std::setw(8) << value;
  out << '\n';
  out << "scored: " << report.n << '\n';
  out << "excluded: " << report.n_excluded << '\n';
  out << "error/size rho: " << (report.error_size_rho ? fixed3(*report.error_size_rho) : "n/a")
      << '\n';
  for (const auto& w : report.warnings) out << "warning: " << w << '\n';
  return out.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  namespace fs = std::filesystem;
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  std::random_device rd;
  const fs::path tmp =
      dir / ("." + path.filename().string() + ".tmp" + std::to_string(rd()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error("write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error("cannot move output into place at " + path.string());
  }
}

}  // namespace factcheck
