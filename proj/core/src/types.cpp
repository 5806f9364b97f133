#include "factcheck/types.hpp"

#include <cmath>

#include "factcheck/errors.hpp"
#include "factcheck/text.hpp"

namespace factcheck {

Triple::Triple(std::string subject, std::string predicate, std::string object)
    : subject_(std::move(subject)), predicate_(std::move(predicate)), object_(std::move(object)) {
  if (text::is_blank(subject_)) throw InvalidArgument("triple subject is empty");
  if (text::is_blank(predicate_)) throw InvalidArgument("triple predicate is empty");
  if (text::is_blank(object_)) throw InvalidArgument("triple object is empty");
}

std::string_view to_string(NliLabel label) {
  switch (label) {
    case NliLabel::contradiction: return "contradiction";
    case NliLabel::neutral: return "neutral";
    case NliLabel::entailment: return "entailment";
  }
  return "?";
}

NliLabel parse_nli_label(std::string_view name) {
  if (name == "contradiction") return NliLabel::contradiction;
  if (name == "neutral") return NliLabel::neutral;
  if (name == "entailment") return NliLabel::entailment;
  throw InvalidArgument("unknown NLI label '" + std::string(name) + "'");
}

NliDistribution::NliDistribution(double contradiction, double neutral, double entailment)
    : contradiction_(contradiction), neutral_(neutral), entailment_(entailment) {
  for (double p : {contradiction, neutral, entailment}) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw InvalidArgument("NLI probability out of [0, 1]: " + std::to_string(p));
    }
  }
  const double sum = contradiction + neutral + entailment;
  if (std::abs(sum - 1.0) > kSumTolerance) {
    throw InvalidArgument("NLI probabilities sum to " + std::to_string(sum) + ", expected 1");
  }
}

double NliDistribution::probability(NliLabel label) const noexcept {
  switch (label) {
    case NliLabel::contradiction: return contradiction_;
    case NliLabel::neutral: return neutral_;
    case NliLabel::entailment: return entailment_;
  }
  return 0.0;
}

NliLabel label_argmax(const NliDistribution& d) {
  NliLabel best = NliLabel::contradiction;
  for (NliLabel l : {NliLabel::neutral, NliLabel::entailment}) {
    if (d.probability(l) > d.probability(best)) best = l;
  }
  return best;
}

bool entailment_wins(const NliDistribution& d) {
  return d.entailment() > d.contradiction() && d.entailment() > d.neutral();
}

std::string_view to_string(CheckDirection direction) {
  return direction == CheckDirection::fact_check ? "fact_check" : "text_check";
}

CheckDirection parse_check_direction(std::string_view name) {
  if (name == "fact_check") return CheckDirection::fact_check;
  if (name == "text_check") return CheckDirection::text_check;
  throw InvalidArgument("unknown check direction '" + std::string(name) + "'");
}

CheckResult make_check_result(CheckDirection direction, std::string premise,
                              std::string hypothesis, const NliDistribution& d) {
  return CheckResult{direction, std::move(premise), std::move(hypothesis), d, entailment_wins(d)};
}

std::string_view to_string(FineVerdict v) {
  switch (v) {
    case FineVerdict::ok: return "OK";
    case FineVerdict::omission: return "omission";
    case FineVerdict::hallucination: return "hallucination";
    case FineVerdict::omission_and_hallucination: return "omission+hallucination";
  }
  return "?";
}

std::string_view to_string(RoughVerdict v) { return v == RoughVerdict::ok ? "OK" : "not_OK"; }

FineVerdict parse_fine_verdict(std::string_view name) {
  if (name == "OK") return FineVerdict::ok;
  if (name == "omission") return FineVerdict::omission;
  if (name == "hallucination") return FineVerdict::hallucination;
  if (name == "omission+hallucination") return FineVerdict::omission_and_hallucination;
  throw InvalidArgument("unknown fine verdict '" + std::string(name) + "'");
}

RoughVerdict parse_rough_verdict(std::string_view name) {
  if (name == "OK") return RoughVerdict::ok;
  if (name == "not_OK") return RoughVerdict::not_ok;
  throw InvalidArgument("unknown rough verdict '" + std::string(name) + "'");
}

FineVerdict combine_failures(bool omission, bool hallucination) {
  if (omission && hallucination) return FineVerdict::omission_and_hallucination;
  if (omission) return FineVerdict::omission;
  if (hallucination) return FineVerdict::hallucination;
  return FineVerdict::ok;
}

GoldLabel::GoldLabel(RoughVerdict rough, std::optional<FineVerdict> fine)
    : rough_(rough), fine_(fine) {
  if (fine_ && to_rough(*fine_) != rough_) {
    throw InvalidArgument("gold fine label '" + std::string(to_string(*fine_)) +
                          "' contradicts rough label '" + std::string(to_string(rough_)) + "'");
  }
}

void validate(const Example& ex) {
  if (ex.triples.empty()) throw InvalidArgument("example '" + ex.id + "' has no triples");
  if (text::is_blank(ex.text)) throw InvalidArgument("example '" + ex.id + "' has empty text");
}

}  // namespace factcheck
