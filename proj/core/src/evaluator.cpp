#include "factcheck/evaluator.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <mutex>
#include <thread>

namespace factcheck {

std::string_view to_string(CheckMode mode) {
  switch (mode) {
    case CheckMode::both: return "both";
    case CheckMode::omissions_only: return "omissions";
    case CheckMode::hallucinations_only: return "hallucinations";
  }
  return "?";
}

CheckMode parse_check_mode(std::string_view name) {
  if (name == "both") return CheckMode::both;
  if (name == "omissions" || name == "omissions_only") return CheckMode::omissions_only;
  if (name == "hallucinations" || name == "hallucinations_only") {
    return CheckMode::hallucinations_only;
  }
  throw InvalidArgument("unknown check mode '" + std::string(name) + "'");
}

std::string concatenate_facts(std::span<const Fact> facts) {
  std::string out;
  for (const Fact& f : facts) {
    if (!out.empty()) out.push_back(' ');
    out += f.text;
  }
  return out;
}

std::vector<CheckResult> check_omissions(std::string_view text, std::span<const Fact> facts,
                                         NliBackend& backend) {
  std::vector<PremiseHypothesis> pairs;
  pairs.reserve(facts.size());
  for (const Fact& f : facts) pairs.push_back({std::string(text), f.text});
  const auto dists = backend.classify_batch(NliRequest(pairs));
  std::vector<CheckResult> out;
  out.reserve(facts.size());
  for (std::size_t i = 0; i < facts.size(); ++i) {
    out.push_back(make_check_result(CheckDirection::fact_check, std::move(pairs[i].premise),
                                    std::move(pairs[i].hypothesis), dists[i]));
  }
  return out;
}

CheckResult check_hallucination(std::span<const Fact> facts, std::string_view text,
                                NliBackend& backend) {
  return check(concatenate_facts(facts), std::string(text), CheckDirection::text_check, backend);
}

Verdict derive_verdict(std::span<const CheckResult> checks) {
  Verdict v;
  bool omission = false;
  bool hallucination = false;
  for (const CheckResult& c : checks) {
    v.confidence = std::min(v.confidence, c.distribution.entailment());
    if (c.direction == CheckDirection::fact_check) {
      v.per_fact_passed.push_back(c.passed);
      omission |= !c.passed;
    } else {
      hallucination |= !c.passed;
    }
  }
  v.fine = combine_failures(omission, hallucination);
  v.rough = to_rough(v.fine);
  return v;
}

ExampleResult evaluate_example(const Example& ex, const TemplateRegistry& reg, NliBackend& backend,
                               CheckMode mode) {
  validate(ex);
  ExampleResult out;
  out.example_id = ex.id;
  out.facts.reserve(ex.triples.size());
  for (const Triple& t : ex.triples) out.facts.push_back(render(t, reg));

  // Both directions go to the backend as one batch.
  std::vector<PremiseHypothesis> pairs;
  std::vector<CheckDirection> directions;
  if (mode != CheckMode::hallucinations_only) {
    for (const Fact& f : out.facts) {
      pairs.push_back({ex.text, f.text});
      directions.push_back(CheckDirection::fact_check);
    }
  }
  if (mode != CheckMode::omissions_only) {
    pairs.push_back({concatenate_facts(out.facts), ex.text});
    directions.push_back(CheckDirection::text_check);
  }
  const auto dists = backend.classify_batch(NliRequest(pairs));

  out.checks.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    out.checks.push_back(make_check_result(directions[i], std::move(pairs[i].premise),
                                           std::move(pairs[i].hypothesis), dists[i]));
    if (directions[i] == CheckDirection::fact_check) {
      out.omission_confidence =
          std::min(out.omission_confidence.value_or(1.0), dists[i].entailment());
    }
  }
  out.verdict = derive_verdict(out.checks);
  return out;
}

CorpusRun evaluate_corpus(std::span<const Example> examples, const TemplateRegistry& reg,
                          NliBackend& backend, const CorpusOptions& opts) {
  const auto started = std::chrono::steady_clock::now();
  const BackendStats backend_before = backend.stats();
  auto* cache = dynamic_cast<CachingBackend*>(&backend);
  const CacheStats cache_before = cache ? cache->cache_stats() : CacheStats{};

  CorpusRun run;
  run.outcomes.resize(examples.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex failure_mu;
  std::optional<std::size_t> first_failure;

  auto worker = [&] {
    while (!stop.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= examples.size()) return;
      const Example& ex = examples[i];
      ExampleOutcome& outcome = run.outcomes[i];
      outcome.example_id = ex.id;
      outcome.triple_count = ex.triples.size();
      try {
        outcome.result = evaluate_example(ex, reg, backend, opts.mode);
      } catch (const Error& e) {
        outcome.error = e.what();
        if (opts.fail_fast) {
          std::lock_guard lock(failure_mu);
          if (!first_failure || i < *first_failure) first_failure = i;
          stop = true;
        }
      }
    }
  };

  const std::size_t threads =
      std::clamp<std::size_t>(opts.parallelism, 1, std::max<std::size_t>(examples.size(), 1));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  if (first_failure) {
    const auto& failed = run.outcomes[*first_failure];
    throw EvaluationFailed(failed.example_id, failed.error);
  }

  RunStats& stats = run.stats;
  stats.examples = examples.size();
  for (const ExampleOutcome& o : run.outcomes) {
    if (o.ok()) {
      ++stats.fine_counts[static_cast<std::size_t>(o.result->verdict.fine)];
    } else {
      ++stats.errors;
    }
  }
  const BackendStats backend_after = backend.stats();
  stats.backend.requests = backend_after.requests - backend_before.requests;
  stats.backend.pairs = backend_after.pairs - backend_before.pairs;
  if (cache) {
    const CacheStats now = cache->cache_stats();
    stats.cache = CacheStats{now.lookups - cache_before.lookups, now.hits - cache_before.hits};
  }
  stats.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return run;
}

}  // namespace factcheck
