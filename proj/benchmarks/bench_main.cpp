#include <benchmark/benchmark.h>

#include <random>

#include "factcheck/evaluator.hpp"
#include "factcheck/metrics.hpp"
#include "factcheck/templates.hpp"

namespace {

using namespace factcheck;

// Answers every pair with the same passing distribution so the benchmark
// measures the pipeline, not a classifier.
class ConstantBackend final : public NliBackend {
 public:
  std::vector<NliDistribution> classify_batch(const NliRequest& req) override {
    return std::vector<NliDistribution>(req.size(), NliDistribution(0.05, 0.05, 0.9));
  }
  BackendStats stats() const override { return {}; }
};

std::vector<Example> corpus(std::size_t n) {
  std::mt19937_64 rng(1);
  const std::vector<std::string> preds{"eatType", "food", "area", "near", "priceRange",
                                       "familyFriendly", "customer rating"};
  std::vector<Example> out;
  for (std::size_t i = 0; i < n; ++i) {
    Example ex{"b" + std::to_string(i), {}, "Some restaurant text number " + std::to_string(i), {}, {}};
    for (std::size_t k = 0, m = 1 + rng() % 7; k < m; ++k) {
      ex.triples.emplace_back("The Punter", preds[rng() % preds.size()], "value " + std::to_string(k));
    }
    out.push_back(std::move(ex));
  }
  return out;
}

void BM_RenderE2e(benchmark::State& state) {
  const auto reg = TemplateRegistry::e2e_default();
  const Triple t("The Punter", "priceRange", "high");
  for (auto _ : state) benchmark::DoNotOptimize(render(t, reg));
}
BENCHMARK(BM_RenderE2e);

void BM_RenderBackoff(benchmark::State& state) {
  const Triple t("Aenir", "numberOfPages", "233");
  for (auto _ : state) benchmark::DoNotOptimize(render_backoff(t));
}
BENCHMARK(BM_RenderBackoff);

void BM_Spearman(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::vector<double> x(static_cast<std::size_t>(state.range(0)));
  std::vector<double> y(x.size());
  for (auto& v : x) v = double(rng() % 100);
  for (auto& v : y) v = double(rng() % 100);
  for (auto _ : state) benchmark::DoNotOptimize(spearman(x, y));
}
BENCHMARK(BM_Spearman)->Arg(100)->Arg(2230)->Arg(13230);

void BM_EvaluateCorpus(benchmark::State& state) {
  const auto examples = corpus(1000);
  const auto reg = TemplateRegistry::e2e_default();
  ConstantBackend backend;
  CorpusOptions opts;
  opts.parallelism = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_corpus(examples, reg, backend, opts));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(examples.size()));
}
BENCHMARK(BM_EvaluateCorpus)->Arg(1)->Arg(4)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
