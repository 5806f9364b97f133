#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "factcheck/errors.hpp"
#include "factcheck/evaluator.hpp"
#include "factcheck/types.hpp"

namespace factcheck {

/// What scoring needs from one evaluated example. `fine` is empty when the
/// example ended in an evaluation error.
struct Prediction {
  std::string id;
  std::optional<FineVerdict> fine;
  double confidence = 0.0;
  std::size_t triple_count = 0;

  bool errored() const noexcept { return !fine.has_value(); }
};

Prediction to_prediction(const ExampleOutcome& outcome);

/// Rough confusion with not_OK as the positive class.
struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const noexcept { return tp + fp + fn + tn; }
  friend bool operator==(const Confusion&, const Confusion&) = default;
};

struct ScoreReport {
  std::size_t n = 0;           // scored examples
  std::size_t n_excluded = 0;  // evaluation errors
  double accuracy_rough = 0.0;
  std::optional<double> accuracy_fine;  // only when every scored gold label is fine-grained
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  Confusion confusion;
  /// [gold][predicted], indexed by FineVerdict.
  std::optional<std::array<std::array<std::size_t, 4>, 4>> fine_confusion;
  /// Spearman rho of confidence vs. human score, when scores are available.
  std::optional<double> confidence_rho;
  /// Spearman rho of input size vs. rough error; absent when undefined.
  std::optional<double> error_size_rho;
  std::vector<std::string> warnings;
};

/// Scored predictions lack a gold label.
class GoldMismatch : public Error {
 public:
  explicit GoldMismatch(std::vector<std::string> ids);
  const std::vector<std::string>& ids() const noexcept { return ids_; }

 private:
  std::vector<std::string> ids_;
};

/// Accuracy and P/R/F1 of non-errored predictions against gold (id-matched).
/// Precision or recall with an empty denominator is 0 and adds a warning.
ScoreReport score(std::span<const Prediction> predictions,
                  const std::map<std::string, GoldLabel>& gold);

/// 1-based ranks, ties share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values);

struct SpearmanResult {
  double rho;
  /// Two-sided p from the t approximation with n-2 degrees of freedom.
  double p_approx;
};

/// Pearson correlation of average ranks. Needs n >= 3 equal-length inputs
/// (InvalidArgument otherwise); a constant input throws UndefinedCorrelation.
SpearmanResult spearman(std::span<const double> xs, std::span<const double> ys);

/// Spearman rho between input size (triple count) and a 0/1 rough-error
/// indicator, over non-errored predictions.
double error_size_correlation(std::span<const Prediction> predictions,
                              const std::map<std::string, GoldLabel>& gold);

}  // namespace factcheck
