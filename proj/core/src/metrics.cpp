#include "factcheck/metrics.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <numeric>
#include <set>

namespace factcheck {

namespace {

std::string list_ids(const std::vector<std::string>& ids) {
  constexpr std::size_t kShown = 10;
  std::string out;
  for (std::size_t i = 0; i < std::min(ids.size(), kShown); ++i) {
    if (i > 0) out += ", ";
    out += ids[i];
  }
  if (ids.size() > kShown) out += ", ... (" + std::to_string(ids.size()) + " total)";
  return out;
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

Prediction to_prediction(const ExampleOutcome& outcome) {
  Prediction p;
  p.id = outcome.example_id;
  p.triple_count = outcome.triple_count;
  if (outcome.result) {
    p.fine = outcome.result->verdict.fine;
    p.confidence = outcome.result->verdict.confidence;
  }
  return p;
}

GoldMismatch::GoldMismatch(std::vector<std::string> ids)
    : Error("no gold label for " + std::to_string(ids.size()) + " result id(s): " + list_ids(ids)),
      ids_(std::move(ids)) {}

ScoreReport score(std::span<const Prediction> predictions,
                  const std::map<std::string, GoldLabel>& gold) {
  ScoreReport report;
  std::vector<std::string> missing;
  std::vector<std::string> duplicates;
  std::set<std::string> seen;
  std::vector<std::pair<const Prediction*, const GoldLabel*>> scored;

  for (const Prediction& p : predictions) {
    if (!seen.insert(p.id).second) duplicates.push_back(p.id);
    if (p.errored()) {
      ++report.n_excluded;
      continue;
    }
    auto it = gold.find(p.id);
    if (it == gold.end()) {
      missing.push_back(p.id);
      continue;
    }
    scored.emplace_back(&p, &it->second);
  }
  if (!duplicates.empty()) {
    throw InvalidArgument("duplicate result id(s): " + list_ids(duplicates));
  }
  if (!missing.empty()) throw GoldMismatch(std::move(missing));

  report.n = scored.size();
  if (report.n == 0) {
    report.warnings.push_back("no scorable examples");
    return report;
  }

  const bool all_fine = std::all_of(scored.begin(), scored.end(),
                                    [](const auto& s) { return s.second->fine().has_value(); });
  const bool any_fine = std::any_of(scored.begin(), scored.end(),
                                    [](const auto& s) { return s.second->fine().has_value(); });
  if (any_fine && !all_fine) {
    report.warnings.push_back("only some gold labels are fine-grained; fine accuracy omitted");
  }

  std::size_t rough_correct = 0;
  std::size_t fine_correct = 0;
  std::array<std::array<std::size_t, 4>, 4> fine_confusion{};
  for (const auto& [pred, label] : scored) {
    const RoughVerdict predicted = to_rough(*pred->fine);
    const bool gold_positive = label->rough() == RoughVerdict::not_ok;
    const bool pred_positive = predicted == RoughVerdict::not_ok;
    if (predicted == label->rough()) ++rough_correct;
    if (gold_positive && pred_positive) ++report.confusion.tp;
    if (!gold_positive && pred_positive) ++report.confusion.fp;
    if (gold_positive && !pred_positive) ++report.confusion.fn;
    if (!gold_positive && !pred_positive) ++report.confusion.tn;
    if (all_fine) {
      if (*label->fine() == *pred->fine) ++fine_correct;
      ++fine_confusion[static_cast<std::size_t>(*label->fine())]
                      [static_cast<std::size_t>(*pred->fine)];
    }
  }

  const double n = static_cast<double>(report.n);
  report.accuracy_rough = static_cast<double>(rough_correct) / n;
  if (all_fine) {
    report.accuracy_fine = static_cast<double>(fine_correct) / n;
    report.fine_confusion = fine_confusion;
  }

  const auto& c = report.confusion;
  if (c.tp + c.fp == 0) {
    report.warnings.push_back("no not_OK predictions; precision set to 0");
  } else {
    report.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  }
  if (c.tp + c.fn == 0) {
    report.warnings.push_back("no not_OK gold labels; recall set to 0");
  } else {
    report.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  }
  if (report.precision + report.recall > 0) {
    report.f1 = 2 * report.precision * report.recall / (report.precision + report.recall);
  }
  return report;
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    // positions i..j (0-based) share rank mean((i+1)..(j+1))
    const double rank = (static_cast<double>(i + j) / 2.0) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

SpearmanResult spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw InvalidArgument("spearman: length mismatch (" + std::to_string(xs.size()) + " vs " +
                          std::to_string(ys.size()) + ")");
  }
  if (xs.size() < 3) throw InvalidArgument("spearman: needs at least 3 observations");
  for (std::span<const double> v : {xs, ys}) {
    if (std::any_of(v.begin(), v.end(), [](double x) { return !std::isfinite(x); })) {
      throw InvalidArgument("spearman: non-finite value");
    }
    if (std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); })) {
      throw UndefinedCorrelation("spearman: constant input vector");
    }
  }

  const auto rx = average_ranks(xs);
  const auto ry = average_ranks(ys);
  const double rho = std::clamp(pearson(rx, ry), -1.0, 1.0);

  const double df = static_cast<double>(xs.size() - 2);
  double p = 0.0;
  if (std::abs(rho) < 1.0) {
    const double t = rho * std::sqrt(df / (1.0 - rho * rho));
    const boost::math::students_t dist(df);
    p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
  }
  return {rho, std::clamp(p, 0.0, 1.0)};
}

double error_size_correlation(std::span<const Prediction> predictions,
                              const std::map<std::string, GoldLabel>& gold) {
  std::vector<double> sizes;
  std::vector<double> errors;
  std::vector<std::string> missing;
  for (const Prediction& p : predictions) {
    if (p.errored()) continue;
    auto it = gold.find(p.id);
    if (it == gold.end()) {
      missing.push_back(p.id);
      continue;
    }
    sizes.push_back(static_cast<double>(p.triple_count));
    errors.push_back(to_rough(*p.fine) != it->second.rough() ? 1.0 : 0.0);
  }
  if (!missing.empty()) throw GoldMismatch(std::move(missing));
  return spearman(sizes, errors).rho;
}

}  // namespace factcheck
