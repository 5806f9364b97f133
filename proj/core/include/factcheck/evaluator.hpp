#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "factcheck/errors.hpp"
#include "factcheck/nli_backend.hpp"
#include "factcheck/templates.hpp"
#include "factcheck/types.hpp"

namespace factcheck {

enum class CheckMode { both, omissions_only, hallucinations_only };

/// "both", "omissions", "hallucinations".
std::string_view to_string(CheckMode mode);
CheckMode parse_check_mode(std::string_view name);

struct ExampleResult {
  std::string example_id;
  std::vector<Fact> facts;
  Verdict verdict;
  /// Fact-direction checks in fact order, then the text-direction check.
  std::vector<CheckResult> checks;
  /// Minimum entailment over fact-direction checks only; absent when no
  /// fact checks ran. The headline confidence in `verdict` covers all checks.
  std::optional<double> omission_confidence;
};

/// Facts joined in input order with a single space.
std::string concatenate_facts(std::span<const Fact> facts);

/// Premise = text, hypothesis = each fact; one result per fact, in order.
std::vector<CheckResult> check_omissions(std::string_view text, std::span<const Fact> facts,
                                         NliBackend& backend);

/// Premise = concatenated facts, hypothesis = text.
CheckResult check_hallucination(std::span<const Fact> facts, std::string_view text,
                                NliBackend& backend);

/// Verdict from the performed checks. Fact-direction checks decide
/// omission, the text-direction check decides hallucination, confidence is
/// the minimum entailment probability across all of them.
Verdict derive_verdict(std::span<const CheckResult> checks);

/// Renders every triple (input order), runs the checks `mode` asks for in a
/// single backend batch and derives the verdict. Backend errors propagate.
ExampleResult evaluate_example(const Example& ex, const TemplateRegistry& reg, NliBackend& backend,
                               CheckMode mode);

/// One corpus entry: either a result or the error that aborted the example.
struct ExampleOutcome {
  std::string example_id;
  std::size_t triple_count = 0;
  std::optional<ExampleResult> result;
  std::string error;

  bool ok() const noexcept { return result.has_value(); }
};

struct RunStats {
  std::size_t examples = 0;
  std::size_t errors = 0;
  /// Indexed by FineVerdict.
  std::array<std::size_t, 4> fine_counts{};
  BackendStats backend;
  std::optional<CacheStats> cache;
  double wall_seconds = 0.0;

  std::size_t count(FineVerdict v) const { return fine_counts[static_cast<std::size_t>(v)]; }
};

struct CorpusOptions {
  CheckMode mode = CheckMode::both;
  std::size_t parallelism = 1;
  /// Stop at the first failing example and throw EvaluationFailed instead
  /// of recording the failure.
  bool fail_fast = false;
};

struct CorpusRun {
  std::vector<ExampleOutcome> outcomes;  // input order
  RunStats stats;
};

class EvaluationFailed : public Error {
 public:
  EvaluationFailed(std::string example_id, const std::string& what)
      : Error("example '" + example_id + "': " + what), example_id_(std::move(example_id)) {}

  const std::string& example_id() const noexcept { return example_id_; }

 private:
  std::string example_id_;
};

/// Evaluates examples on up to `parallelism` threads; outcomes come back in
/// input order whatever the scheduling.
CorpusRun evaluate_corpus(std::span<const Example> examples, const TemplateRegistry& reg,
                          NliBackend& backend, const CorpusOptions& opts);

}  // namespace factcheck
