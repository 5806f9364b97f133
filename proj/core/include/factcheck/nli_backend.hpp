#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <future>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <utility>
#include <vector>

#include "factcheck/types.hpp"

namespace factcheck {

struct PremiseHypothesis {
  std::string premise;
  std::string hypothesis;

  friend auto operator<=>(const PremiseHypothesis&, const PremiseHypothesis&) = default;
};

/// Non-empty ordered list of pairs, none with a blank side.
class NliRequest {
 public:
  explicit NliRequest(std::vector<PremiseHypothesis> pairs);

  const std::vector<PremiseHypothesis>& pairs() const noexcept { return pairs_; }
  std::size_t size() const noexcept { return pairs_.size(); }

 private:
  std::vector<PremiseHypothesis> pairs_;
};

/// Work that reached the backend implementation: `requests` counts
/// classify calls (HTTP posts for the HTTP client), `pairs` the pairs
/// classified.
struct BackendStats {
  std::uint64_t requests = 0;
  std::uint64_t pairs = 0;
};

/// (premise, hypothesis) -> NliDistribution. Implementations are safe for
/// concurrent calls and return one distribution per pair, in request order.
class NliBackend {
 public:
  virtual ~NliBackend() = default;

  virtual std::vector<NliDistribution> classify_batch(const NliRequest& request) = 0;
  virtual BackendStats stats() const = 0;
};

/// Runs one check and applies the pass rule.
CheckResult check(std::string premise, std::string hypothesis, CheckDirection direction,
                  NliBackend& backend);

/// Table-driven backend for tests and offline runs.
class FixtureBackend final : public NliBackend {
 public:
  using Table = std::map<PremiseHypothesis, NliDistribution>;

  /// `fallback` answers table misses; `identical`, when set, answers pairs
  /// whose premise equals the hypothesis before the fallback is consulted.
  explicit FixtureBackend(Table table, std::optional<NliDistribution> fallback = std::nullopt,
                          std::optional<NliDistribution> identical = std::nullopt);

  FixtureBackend(FixtureBackend&& other) noexcept;

  /// JSON: {"pairs": [{"premise", "hypothesis", "contradiction", "neutral",
  /// "entailment"}], "default": {...}, "identical": {...}}.
  static FixtureBackend from_json(std::istream& in);
  static FixtureBackend load(const std::filesystem::path& path);

  std::vector<NliDistribution> classify_batch(const NliRequest& request) override;
  BackendStats stats() const override;

 private:
  Table table_;
  std::optional<NliDistribution> fallback_;
  std::optional<NliDistribution> identical_;
  std::atomic<std::uint64_t> requests_{0};
  std::atomic<std::uint64_t> pairs_{0};
};

struct CacheStats {
  std::uint64_t lookups = 0;
  std::uint64_t hits = 0;
};

/// Memoizes an inner backend by exact (premise, hypothesis). Concurrent
/// requests for a pair already being classified wait for that result
/// instead of classifying it again, so hit counts depend only on the
/// multiset of pairs requested, not on thread timing. Failed lookups are
/// not cached.
class CachingBackend final : public NliBackend {
 public:
  explicit CachingBackend(std::unique_ptr<NliBackend> inner);

  std::vector<NliDistribution> classify_batch(const NliRequest& request) override;
  BackendStats stats() const override { return inner_->stats(); }
  CacheStats cache_stats() const;

 private:
  std::unique_ptr<NliBackend> inner_;
  mutable std::mutex mu_;
  std::map<PremiseHypothesis, std::shared_future<NliDistribution>> entries_;
  CacheStats cache_stats_;
};

struct BackendConfig {
  std::string endpoint_url;
  std::size_t batch_size = 16;
  std::chrono::milliseconds timeout{30'000};
  unsigned retries = 2;
  bool cache_enabled = true;
  std::size_t max_in_flight = 4;
  std::chrono::milliseconds initial_backoff{500};  // doubles per retry

  void validate() const;
};

/// Client for the inference sidecar: POST {endpoint}/nli, GET {endpoint}/health.
/// Only plain http:// endpoints are supported.
class HttpBackend final : public NliBackend {
 public:
  explicit HttpBackend(BackendConfig cfg);

  std::vector<NliDistribution> classify_batch(const NliRequest& request) override;
  BackendStats stats() const override;

  /// Model identifier reported by the service. Throws BackendUnavailable
  /// when the service is unreachable or not ready.
  std::string health() const;

  const BackendConfig& config() const noexcept { return cfg_; }

 private:
  std::vector<NliDistribution> post_chunk(const std::vector<PremiseHypothesis>& pairs,
                                          std::size_t first_index);

  BackendConfig cfg_;
  std::string host_;
  int port_ = 80;
  std::string path_prefix_;
  std::counting_semaphore<> in_flight_;
  std::atomic<std::uint64_t> requests_{0};
  std::atomic<std::uint64_t> pairs_{0};
};

/// Serializes a request body: {"pairs": [{"premise": ..., "hypothesis": ...}]}.
std::string encode_nli_request(const std::vector<PremiseHypothesis>& pairs);

/// Parses a 200 response body; throws ProtocolError (pair index relative to
/// `first_index`) on shape, length or probability violations.
std::vector<NliDistribution> decode_nli_response(const std::string& body, std::size_t expected,
                                                 std::size_t first_index = 0);

}  // namespace factcheck
