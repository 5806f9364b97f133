#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace factcheck {

/// One subject/predicate/object input fact. Fields are stored verbatim;
/// construction only rejects fields that are blank after trimming.
class Triple {
 public:
  Triple(std::string subject, std::string predicate, std::string object);

  const std::string& subject() const noexcept { return subject_; }
  const std::string& predicate() const noexcept { return predicate_; }
  const std::string& object() const noexcept { return object_; }

  friend bool operator==(const Triple&, const Triple&) = default;

 private:
  std::string subject_;
  std::string predicate_;
  std::string object_;
};

/// A triple rendered to a sentence by a template.
struct Fact {
  std::string text;
  Triple source;
  std::string template_id;
  bool used_backoff = false;

  friend bool operator==(const Fact&, const Fact&) = default;
};

enum class NliLabel { contradiction, neutral, entailment };

std::string_view to_string(NliLabel label);
NliLabel parse_nli_label(std::string_view name);

/// Three-way NLI output. Components lie in [0, 1] and sum to 1 within
/// kSumTolerance; anything else is rejected at construction.
class NliDistribution {
 public:
  static constexpr double kSumTolerance = 1e-4;

  NliDistribution(double contradiction, double neutral, double entailment);

  double contradiction() const noexcept { return contradiction_; }
  double neutral() const noexcept { return neutral_; }
  double entailment() const noexcept { return entailment_; }
  double probability(NliLabel label) const noexcept;

  friend bool operator==(const NliDistribution&, const NliDistribution&) = default;

 private:
  double contradiction_;
  double neutral_;
  double entailment_;
};

/// Label with the strictly greatest probability. Ties go to the label that
/// comes first in (contradiction, neutral, entailment), so entailment only
/// wins when it is the unique maximum.
NliLabel label_argmax(const NliDistribution& d);

/// The pass rule: entailment strictly exceeds both other probabilities.
bool entailment_wins(const NliDistribution& d);

enum class CheckDirection {
  fact_check,  // text entails fact (omission direction)
  text_check,  // facts entail text (hallucination direction)
};

std::string_view to_string(CheckDirection direction);
CheckDirection parse_check_direction(std::string_view name);

struct CheckResult {
  CheckDirection direction;
  std::string premise;
  std::string hypothesis;
  NliDistribution distribution;
  bool passed;

  friend bool operator==(const CheckResult&, const CheckResult&) = default;
};

CheckResult make_check_result(CheckDirection direction, std::string premise,
                              std::string hypothesis, const NliDistribution& d);

enum class FineVerdict { ok, omission, hallucination, omission_and_hallucination };
enum class RoughVerdict { ok, not_ok };

/// "OK", "omission", "hallucination", "omission+hallucination".
std::string_view to_string(FineVerdict v);
/// "OK", "not_OK".
std::string_view to_string(RoughVerdict v);
FineVerdict parse_fine_verdict(std::string_view name);
RoughVerdict parse_rough_verdict(std::string_view name);

inline RoughVerdict to_rough(FineVerdict v) {
  return v == FineVerdict::ok ? RoughVerdict::ok : RoughVerdict::not_ok;
}

inline bool has_omission(FineVerdict v) {
  return v == FineVerdict::omission || v == FineVerdict::omission_and_hallucination;
}

inline bool has_hallucination(FineVerdict v) {
  return v == FineVerdict::hallucination || v == FineVerdict::omission_and_hallucination;
}

FineVerdict combine_failures(bool omission, bool hallucination);

struct Verdict {
  FineVerdict fine = FineVerdict::ok;
  RoughVerdict rough = RoughVerdict::ok;
  std::vector<bool> per_fact_passed;
  double confidence = 1.0;

  friend bool operator==(const Verdict&, const Verdict&) = default;
};

/// Gold annotation. The rough label is always present; the fine label only
/// for annotation sources that distinguish error kinds.
class GoldLabel {
 public:
  explicit GoldLabel(RoughVerdict rough, std::optional<FineVerdict> fine = std::nullopt);
  explicit GoldLabel(FineVerdict fine) : GoldLabel(to_rough(fine), fine) {}

  RoughVerdict rough() const noexcept { return rough_; }
  const std::optional<FineVerdict>& fine() const noexcept { return fine_; }

  friend bool operator==(const GoldLabel&, const GoldLabel&) = default;

 private:
  RoughVerdict rough_;
  std::optional<FineVerdict> fine_;
};

struct Example {
  std::string id;
  std::vector<Triple> triples;
  std::string text;
  std::optional<GoldLabel> gold;
  std::optional<double> human_score;

  friend bool operator==(const Example&, const Example&) = default;
};

/// Throws InvalidArgument unless the example has at least one triple and
/// non-blank text.
void validate(const Example& ex);

}  // namespace factcheck
