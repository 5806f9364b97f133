#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "factcheck/types.hpp"

namespace factcheck {

/// Canonical JSONL, one example per line:
///   {"id": "...", "triples": [["s", "p", "o"], ...], "text": "...",
///    "gold": {"fine": "...", "rough": "..."}, "human_score": 2.5}
/// `gold` and `human_score` are optional; `gold` needs at least one of its
/// keys. Blank lines are skipped. Errors are ParseError with the line number.
std::vector<Example> parse_jsonl(std::istream& in);
std::vector<Example> parse_jsonl(const std::filesystem::path& path);

/// One example from one JSON line; `line_no` is used for error reporting.
Example parse_example_line(std::string_view line, std::size_t line_no);

/// `subject | predicate | object` per line, fields trimmed. Blank lines are
/// skipped.
std::vector<Triple> parse_pipe_triples(std::string_view block);

/// Restaurant meaning representation `name[X], eatType[pub], ...` to
/// triples with the name value as subject. Attribute names go through
/// text::predicate_key (eatType -> eat_type). The name pair emits no triple.
std::vector<Triple> parse_e2e_mr(std::string_view mr);

/// RFC-4180 reader: quoted fields, doubled quotes, embedded separators and
/// line breaks, CRLF or LF records.
std::vector<std::vector<std::string>> read_csv(std::istream& in);

struct RatingsConfig {
  std::string id_column = "id";
  std::string score_column = "score";
  std::string text_column;  // optional; empty means "not read"
  double threshold = 2.5;   // inclusive: score >= threshold is OK

  /// Throws InvalidArgument for a threshold outside the 1-3 Likert range
  /// or a missing id/score column name.
  void validate() const;
};

struct Rating {
  double human_score;
  GoldLabel gold;
  std::string text;
};

GoldLabel gold_from_score(double score, double threshold);

/// Human-rating CSV keyed by id. Missing columns, unparseable scores and
/// duplicate ids are ParseError with the 1-based CSV record number.
std::map<std::string, Rating> load_ratings(std::istream& csv, const RatingsConfig& cfg);

}  // namespace factcheck
