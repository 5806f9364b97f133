#include "cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include "factcheck/evaluator.hpp"
#include "factcheck/ingestion.hpp"
#include "factcheck/metrics.hpp"
#include "factcheck/nli_backend.hpp"
#include "factcheck/reporting.hpp"
#include "factcheck/templates.hpp"
#include "factcheck/text.hpp"

namespace factcheck::cli {

namespace {

constexpr std::string_view kBuiltinE2e = "builtin:e2e";

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return in;
}

std::string read_file(const std::string& path) {
  auto in = open_input(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// --- evaluate --------------------------------------------------------------

struct EvaluateArgs {
  std::string input;
  std::string templates;
  bool backoff_only = false;
  bool raw_backoff = false;
  std::string endpoint;
  std::string fixture;
  std::string mode = "both";
  std::uint64_t seed = 0;
  std::size_t parallelism = 1;
  std::string out;
  bool fail_fast = false;
  std::size_t batch_size = 16;
  double timeout_seconds = 30.0;
  unsigned retries = 2;
  bool no_cache = false;
};

TemplateRegistry build_registry(const EvaluateArgs& a) {
  TemplateRegistry reg;
  if (!a.backoff_only && !a.templates.empty()) {
    reg = a.templates == kBuiltinE2e ? TemplateRegistry::e2e_default()
                                     : load_registry(std::filesystem::path(a.templates));
  }
  reg.set_seed(a.seed);
  reg.set_backoff_style(a.raw_backoff ? BackoffStyle::raw : BackoffStyle::humanized);
  return reg;
}

int cmd_evaluate(EvaluateArgs a, std::ostream& out, std::ostream& err) {
  if (a.endpoint.empty() && a.fixture.empty()) {
    if (const char* env = std::getenv("FACTCHECK_ENDPOINT"); env && *env) a.endpoint = env;
  }
  if (a.endpoint.empty() == a.fixture.empty()) {
    err << "error: configure exactly one backend (--fixture or --endpoint/FACTCHECK_ENDPOINT)\n";
    return kExitUsage;
  }
  if (a.backoff_only && !a.templates.empty()) {
    err << "error: --backoff-only and --templates are mutually exclusive\n";
    return kExitUsage;
  }
  if (a.parallelism < 1) {
    err << "error: --parallelism must be at least 1\n";
    return kExitUsage;
  }

  std::vector<Example> examples;
  TemplateRegistry reg;
  CorpusOptions opts;
  std::unique_ptr<NliBackend> backend;
  try {
    opts.mode = parse_check_mode(a.mode);
    opts.parallelism = a.parallelism;
    opts.fail_fast = a.fail_fast;
    reg = build_registry(a);
    examples = parse_jsonl(std::filesystem::path(a.input));
    if (!a.fixture.empty()) {
      backend = std::make_unique<FixtureBackend>(FixtureBackend::load(a.fixture));
    } else {
      BackendConfig cfg;
      cfg.endpoint_url = a.endpoint;
      cfg.batch_size = a.batch_size;
      cfg.timeout = std::chrono::milliseconds(static_cast<long long>(a.timeout_seconds * 1000));
      cfg.retries = a.retries;
      cfg.cache_enabled = !a.no_cache;
      backend = std::make_unique<HttpBackend>(cfg);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  if (auto* http = dynamic_cast<HttpBackend*>(backend.get())) {
    try {
      const std::string model = http->health();
      err << "NLI service ready" << (model.empty() ? "" : " (model " + model + ")") << '\n';
    } catch (const BackendError& e) {
      err << "error: " << e.what() << '\n';
      return kExitEvaluationFailed;
    }
  }
  if (!a.no_cache) backend = std::make_unique<CachingBackend>(std::move(backend));

  CorpusRun run;
  try {
    run = evaluate_corpus(examples, reg, *backend, opts);
  } catch (const EvaluationFailed& e) {
    err << "error: " << e.what() << '\n';
    return kExitEvaluationFailed;
  }

  std::ostringstream results;
  write_results_jsonl(run.outcomes, results);
  try {
    write_file_atomic(a.out, results.str());
    write_file_atomic(a.out + ".stats.json", run_stats_json(run.stats));
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  const RunStats& s = run.stats;
  out << "examples: " << s.examples << "  errors: " << s.errors;
  for (FineVerdict v : {FineVerdict::ok, FineVerdict::omission, FineVerdict::hallucination,
                        FineVerdict::omission_and_hallucination}) {
    out << "  " << to_string(v) << ": " << s.count(v);
  }
  out << '\n';
  err << "backend requests: " << s.backend.requests << ", pairs classified: " << s.backend.pairs;
  if (s.cache) err << ", cache hits: " << s.cache->hits << "/" << s.cache->lookups;
  err << ", wall time: " << std::fixed << std::setprecision(2) << s.wall_seconds << "s\n";
  for (const ExampleOutcome& o : run.outcomes) {
    if (!o.ok()) err << "evaluation_error: " << o.example_id << ": " << o.error << '\n';
  }
  return kExitOk;
}

// --- score -----------------------------------------------------------------

struct ScoreArgs {
  std::string results;
  std::string gold;
  bool ratings = false;
  RatingsConfig ratings_cfg;
  std::string out;
};

int cmd_score(const ScoreArgs& a, std::ostream& out, std::ostream& err) {
  std::vector<Prediction> predictions;
  std::map<std::string, GoldLabel> gold;
  std::map<std::string, double> human;
  try {
    a.ratings_cfg.validate();
    auto results_in = open_input(a.results);
    predictions = parse_results_jsonl(results_in);
    auto gold_in = open_input(a.gold);
    if (a.ratings) {
      for (auto& [id, rating] : load_ratings(gold_in, a.ratings_cfg)) {
        gold.emplace(id, rating.gold);
        human.emplace(id, rating.human_score);
      }
    } else {
      for (const Example& ex : parse_jsonl(gold_in)) {
        if (ex.human_score) human.emplace(ex.id, *ex.human_score);
        if (ex.gold) {
          gold.emplace(ex.id, *ex.gold);
        } else if (ex.human_score) {
          gold.emplace(ex.id, gold_from_score(*ex.human_score, a.ratings_cfg.threshold));
        }
      }
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  ScoreReport report;
  try {
    report = score(predictions, gold);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  std::vector<double> confidences;
  std::vector<double> scores;
  for (const Prediction& p : predictions) {
    if (p.errored()) continue;
    if (auto it = human.find(p.id); it != human.end()) {
      confidences.push_back(p.confidence);
      scores.push_back(it->second);
    }
  }
  if (!scores.empty()) {
    try {
      const auto r = spearman(confidences, scores);
      report.confidence_rho = r.rho;
      err << "confidence vs human score: rho = " << std::fixed << std::setprecision(3) << r.rho
          << " (approx. p = " << std::scientific << std::setprecision(2) << r.p_approx << ")\n"
          << std::defaultfloat;
    } catch (const Error& e) {
      report.warnings.push_back(std::string("confidence correlation n/a: ") + e.what());
    }
  }
  try {
    report.error_size_rho = error_size_correlation(predictions, gold);
  } catch (const Error& e) {
    report.warnings.push_back(std::string("error/size correlation n/a: ") + e.what());
  }

  out << score_report_table(report);
  if (!a.out.empty()) {
    try {
      write_file_atomic(a.out, score_report_json(report));
    } catch (const Error& e) {
      err << "error: " << e.what() << '\n';
      return kExitUsage;
    }
  }
  return kExitOk;
}

// --- extract-templates -----------------------------------------------------

struct ExtractArgs {
  std::string input;
  std::string out;
  bool keep_subject_free = false;
};

int cmd_extract_templates(const ExtractArgs& a, std::ostream& out, std::ostream& err) {
  std::vector<ExtractionItem> corpus;
  try {
    auto in = open_input(a.input);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (text::is_blank(line)) continue;
      Example ex = parse_example_line(line, line_no);
      if (ex.triples.size() != 1) {
        throw ParseError(line_no, "triples",
                         "extraction needs single-triple examples, got " +
                             std::to_string(ex.triples.size()));
      }
      corpus.push_back(ExtractionItem{ex.triples.front(), std::move(ex.text)});
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  ExtractionOptions opts;
  opts.keep_subject_free = a.keep_subject_free;
  const Extraction ex = extract_templates(corpus, opts);
  try {
    write_file_atomic(a.out, save_registry(ex.registry));
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  out << "predicates covered: " << ex.stats.predicates << '\n'
      << "patterns kept: " << ex.stats.kept << '\n'
      << "discarded: " << ex.stats.discarded << '\n';
  return kExitOk;
}

// --- conversions -----------------------------------------------------------

struct ConvertE2eArgs {
  std::string input;
  std::string out;
  std::string mr_column = "mr";
  std::string text_column = "output";
  std::string id_column;
  std::string id_prefix = "e2e-";
};

int cmd_convert_e2e(const ConvertE2eArgs& a, std::ostream& out, std::ostream& err) {
  std::vector<Example> examples;
  try {
    auto in = open_input(a.input);
    const auto records = read_csv(in);
    if (records.empty()) throw ParseError(1, "", "CSV has no header row");
    auto column = [&](const std::string& name) -> std::size_t {
      const auto& header = records.front();
      for (std::size_t i = 0; i < header.size(); ++i) {
        if (text::trim(header[i]) == name) return i;
      }
      throw ParseError(1, name, "column not found in header");
    };
    const std::size_t mr_col = column(a.mr_column);
    const std::size_t text_col = column(a.text_column);
    const std::optional<std::size_t> id_col =
        a.id_column.empty() ? std::nullopt : std::optional(column(a.id_column));

    for (std::size_t row = 1; row < records.size(); ++row) {
      const auto& rec = records[row];
      const std::size_t record_no = row + 1;
      const std::size_t needed = std::max({mr_col, text_col, id_col.value_or(0)});
      if (rec.size() <= needed) throw ParseError(record_no, "", "row is too short");
      Example ex;
      ex.id = id_col ? rec[*id_col] : a.id_prefix + std::to_string(row);
      try {
        ex.triples = parse_e2e_mr(rec[mr_col]);
      } catch (const ParseError& e) {
        throw ParseError(record_no, a.mr_column, e.what());
      }
      ex.text = std::string(text::trim(rec[text_col]));
      try {
        validate(ex);
      } catch (const InvalidArgument& e) {
        throw ParseError(record_no, "", e.what());
      }
      examples.push_back(std::move(ex));
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  std::ostringstream s;
  write_examples_jsonl(examples, s);
  try {
    write_file_atomic(a.out, s.str());
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  out << "converted " << examples.size() << " example(s)\n";
  return kExitOk;
}

struct ConvertTriplesArgs {
  std::string triples;
  std::string texts;
  std::string out;
  std::string id_prefix = "ex-";
};

// Triple blocks are separated by blank lines; texts are one per line.
int cmd_convert_triples(const ConvertTriplesArgs& a, std::ostream& out, std::ostream& err) {
  std::vector<Example> examples;
  try {
    const std::string content = read_file(a.triples);
    std::vector<std::pair<std::size_t, std::string>> blocks;  // first line, block text
    std::istringstream lines(content);
    std::string line;
    std::size_t line_no = 0;
    std::string current;
    std::size_t current_start = 0;
    while (std::getline(lines, line)) {
      ++line_no;
      if (text::is_blank(line)) {
        if (!current.empty()) blocks.emplace_back(current_start, std::exchange(current, {}));
        continue;
      }
      if (current.empty()) current_start = line_no;
      current += line + '\n';
    }
    if (!current.empty()) blocks.emplace_back(current_start, current);

    std::vector<std::string> texts;
    auto text_in = open_input(a.texts);
    while (std::getline(text_in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      texts.push_back(line);
    }
    while (!texts.empty() && text::is_blank(texts.back())) texts.pop_back();
    if (texts.size() != blocks.size()) {
      throw Error(std::to_string(blocks.size()) + " triple block(s) but " +
                  std::to_string(texts.size()) + " text line(s)");
    }
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      Example ex;
      ex.id = a.id_prefix + std::to_string(i + 1);
      try {
        ex.triples = parse_pipe_triples(blocks[i].second);
      } catch (const ParseError& e) {
        throw ParseError(blocks[i].first + e.line() - 1, "", e.what());
      }
      ex.text = texts[i];
      try {
        validate(ex);
      } catch (const InvalidArgument& e) {
        throw Error("text line " + std::to_string(i + 1) + ": " + e.what());
      }
      examples.push_back(std::move(ex));
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  std::ostringstream s;
  write_examples_jsonl(examples, s);
  try {
    write_file_atomic(a.out, s.str());
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  out << "converted " << examples.size() << " example(s)\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"factcheck: NLI-based semantic accuracy checks for data-to-text outputs"};
  app.require_subcommand(1);

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Check outputs for omissions and hallucinations");
  evaluate->add_option("--input", ev.input, "Canonical JSONL examples")->required();
  evaluate->add_option("--out", ev.out, "Results JSONL (stats go to <out>.stats.json)")->required();
  evaluate->add_option("--templates", ev.templates,
                       "Template registry file, or builtin:e2e");
  evaluate->add_flag("--backoff-only", ev.backoff_only, "Use only the universal backoff template");
  evaluate->add_flag("--raw-backoff", ev.raw_backoff,
                     "Insert predicates verbatim into the backoff template");
  evaluate->add_option("--endpoint", ev.endpoint,
                       "NLI service base URL (default: $FACTCHECK_ENDPOINT)");
  evaluate->add_option("--fixture", ev.fixture, "Fixture JSON answering NLI pairs offline");
  evaluate->add_option("--mode", ev.mode, "both | omissions | hallucinations")
      ->check(CLI::IsMember({"both", "omissions", "hallucinations"}));
  evaluate->add_option("--seed", ev.seed, "Template selection seed");
  evaluate->add_option("--parallelism", ev.parallelism, "Examples evaluated concurrently");
  evaluate->add_flag("--fail-fast", ev.fail_fast, "Abort on the first evaluation error");
  evaluate->add_option("--batch-size", ev.batch_size, "Pairs per HTTP request")
      ->check(CLI::PositiveNumber);
  evaluate->add_option("--timeout", ev.timeout_seconds, "HTTP timeout in seconds")
      ->check(CLI::PositiveNumber);
  evaluate->add_option("--retries", ev.retries, "HTTP retries per request");
  evaluate->add_flag("--no-cache", ev.no_cache, "Disable the per-run NLI response cache");

  ScoreArgs sc;
  auto* score_cmd = app.add_subcommand("score", "Score results against gold labels");
  score_cmd->add_option("--results", sc.results, "Results JSONL from evaluate")->required();
  score_cmd->add_option("--gold", sc.gold, "Gold JSONL, or ratings CSV with --ratings")->required();
  score_cmd->add_flag("--ratings", sc.ratings, "Gold file is a human-ratings CSV");
  score_cmd->add_option("--threshold", sc.ratings_cfg.threshold,
                        "Ratings at or above this are OK");
  score_cmd->add_option("--id-column", sc.ratings_cfg.id_column, "Ratings CSV id column");
  score_cmd->add_option("--score-column", sc.ratings_cfg.score_column, "Ratings CSV score column");
  score_cmd->add_option("--text-column", sc.ratings_cfg.text_column, "Ratings CSV text column");
  score_cmd->add_option("--out", sc.out, "Write the score report as JSON");

  ExtractArgs ex;
  auto* extract = app.add_subcommand("extract-templates",
                                     "Delexicalize single-triple references into templates");
  extract->add_option("--input", ex.input, "Canonical JSONL of single-triple examples")->required();
  extract->add_option("--out", ex.out, "Registry file to write")->required();
  extract->add_flag("--keep-subject-free", ex.keep_subject_free,
                    "Keep patterns whose reference omits the subject");

  ConvertE2eArgs ce;
  auto* convert_e2e = app.add_subcommand("convert-e2e", "Convert an MR/text CSV to canonical JSONL");
  convert_e2e->add_option("--input", ce.input, "CSV with MR and text columns")->required();
  convert_e2e->add_option("--out", ce.out, "JSONL to write")->required();
  convert_e2e->add_option("--mr-column", ce.mr_column, "MR column name");
  convert_e2e->add_option("--text-column", ce.text_column, "Text column name");
  convert_e2e->add_option("--id-column", ce.id_column, "Id column (default: prefix + row)");
  convert_e2e->add_option("--id-prefix", ce.id_prefix, "Prefix for generated ids");

  ConvertTriplesArgs ct;
  auto* convert_triples =
      app.add_subcommand("convert-triples", "Convert pipe-triple blocks plus texts to JSONL");
  convert_triples->add_option("--triples", ct.triples, "Blank-line separated triple blocks")
      ->required();
  convert_triples->add_option("--texts", ct.texts, "One output text per line")->required();
  convert_triples->add_option("--out", ct.out, "JSONL to write")->required();
  convert_triples->add_option("--id-prefix", ct.id_prefix, "Prefix for generated ids");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  if (*evaluate) return cmd_evaluate(ev, out, err);
  if (*score_cmd) return cmd_score(sc, out, err);
  if (*extract) return cmd_extract_templates(ex, out, err);
  if (*convert_e2e) return cmd_convert_e2e(ce, out, err);
  if (*convert_triples) return cmd_convert_triples(ct, out, err);
  return kExitUsage;
}

}  // namespace factcheck::cli
