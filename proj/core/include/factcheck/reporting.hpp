#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "factcheck/evaluator.hpp"
#include "factcheck/metrics.hpp"
#include "factcheck/types.hpp"

namespace factcheck {

/// Canonical JSONL line (no trailing newline); inverse of parse_example_line.
std::string example_to_json(const Example& ex);
void write_examples_jsonl(std::span<const Example> examples, std::ostream& out);

/// One results line per example: verdicts, confidences, per-fact flags,
/// rendered facts and every check with its full distribution. Evaluation
/// errors serialize as {"id", "num_triples", "error"}.
std::string outcome_to_json(const ExampleOutcome& outcome);
void write_results_jsonl(std::span<const ExampleOutcome> outcomes, std::ostream& out);

/// Reads what scoring needs back from a results file.
std::vector<Prediction> parse_results_jsonl(std::istream& in);

/// Deterministic counters only; timing and request counts depend on
/// scheduling and are left to the caller's diagnostics.
std::string run_stats_json(const RunStats& stats);

std::string score_report_json(const ScoreReport& report);

/// Fixed-width table: A (or Af, Ar), R, P, F1, rho, followed by counts.
std::string score_report_table(const ScoreReport& report);

/// Writes to a temporary sibling and renames it over `path`, so readers
/// never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace factcheck
