#include "factcheck/nli_backend.hpp"

#include <fstream>
#include <httplib.h>
#include <json.hpp>
#include <thread>

#include "factcheck/errors.hpp"
#include "factcheck/text.hpp"

namespace factcheck {

namespace {

using nlohmann::json;

NliDistribution distribution_from_json(const json& obj) {
  auto prob = [&](const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_number()) {
      throw InvalidArgument(std::string("missing numeric '") + key + "'");
    }
    return it->get<double>();
  };
  return NliDistribution(prob("contradiction"), prob("neutral"), prob("entailment"));
}

std::string describe(const PremiseHypothesis& p) {
  return "premise=\"" + p.premise + "\" hypothesis=\"" + p.hypothesis + "\"";
}

// Re-raises a backend error with its pair index shifted into the caller's
// numbering, keeping the concrete error type.
[[noreturn]] void rethrow_shifted(const BackendError& e, std::size_t new_index) {
  if (dynamic_cast<const BackendUnavailable*>(&e)) throw BackendUnavailable(new_index, e.what());
  if (dynamic_cast<const FixtureIncomplete*>(&e)) throw FixtureIncomplete(new_index, e.what());
  if (dynamic_cast<const ProtocolError*>(&e)) throw ProtocolError(new_index, e.what());
  throw BackendError(new_index, e.what());
}

class SlotGuard {
 public:
  explicit SlotGuard(std::counting_semaphore<>& sem) : sem_(sem) { sem_.acquire(); }
  ~SlotGuard() { sem_.release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  std::counting_semaphore<>& sem_;
};

}  // namespace

NliRequest::NliRequest(std::vector<PremiseHypothesis> pairs) : pairs_(std::move(pairs)) {
  if (pairs_.empty()) throw InvalidArgument("NLI request has no pairs");
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    if (text::is_blank(pairs_[i].premise) || text::is_blank(pairs_[i].hypothesis)) {
      throw InvalidArgument("NLI pair " + std::to_string(i) + " has an empty side");
    }
  }
}

CheckResult check(std::string premise, std::string hypothesis, CheckDirection direction,
                  NliBackend& backend) {
  NliRequest req({{premise, hypothesis}});
  const auto dist = backend.classify_batch(req).at(0);
  return make_check_result(direction, std::move(premise), std::move(hypothesis), dist);
}

// --- fixture ---------------------------------------------------------------

FixtureBackend::FixtureBackend(Table table, std::optional<NliDistribution> fallback,
                               std::optional<NliDistribution> identical)
    : table_(std::move(table)), fallback_(fallback), identical_(identical) {}

FixtureBackend::FixtureBackend(FixtureBackend&& other) noexcept
    : table_(std::move(other.table_)),
      fallback_(other.fallback_),
      identical_(other.identical_),
      requests_(other.requests_.load()),
      pairs_(other.pairs_.load()) {}

FixtureBackend FixtureBackend::from_json(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(0, "", std::string("malformed fixture JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError(0, "", "fixture must be a JSON object");

  auto optional_dist = [&](const char* key) -> std::optional<NliDistribution> {
    auto it = doc.find(key);
    if (it == doc.end() || it->is_null()) return std::nullopt;
    try {
      return distribution_from_json(*it);
    } catch (const InvalidArgument& e) {
      throw ParseError(0, key, e.what());
    }
  };

  Table table;
  if (auto pairs = doc.find("pairs"); pairs != doc.end()) {
    if (!pairs->is_array()) throw ParseError(0, "pairs", "expected an array");
    for (std::size_t i = 0; i < pairs->size(); ++i) {
      const auto& entry = (*pairs)[i];
      const std::string field = "pairs[" + std::to_string(i) + "]";
      try {
        if (!entry.is_object() || !entry.contains("premise") || !entry.contains("hypothesis")) {
          throw InvalidArgument("needs premise and hypothesis");
        }
        PremiseHypothesis key{entry.at("premise").get<std::string>(),
                              entry.at("hypothesis").get<std::string>()};
        table.insert_or_assign(std::move(key), distribution_from_json(entry));
      } catch (const InvalidArgument& e) {
        throw ParseError(0, field, e.what());
      } catch (const json::exception& e) {
        throw ParseError(0, field, e.what());
      }
    }
  }
  return FixtureBackend(std::move(table), optional_dist("default"), optional_dist("identical"));
}

FixtureBackend FixtureBackend::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open fixture " + path.string());
  return from_json(in);
}

std::vector<NliDistribution> FixtureBackend::classify_batch(const NliRequest& request) {
  ++requests_;
  pairs_ += request.size();
  std::vector<NliDistribution> out;
  out.reserve(request.size());
  for (std::size_t i = 0; i < request.size(); ++i) {
    const auto& pair = request.pairs()[i];
    if (auto it = table_.find(pair); it != table_.end()) {
      out.push_back(it->second);
    } else if (identical_ && pair.premise == pair.hypothesis) {
      out.push_back(*identical_);
    } else if (fallback_) {
      out.push_back(*fallback_);
    } else {
      throw FixtureIncomplete(i, "no fixture entry for pair " + std::to_string(i) + ": " +
                                     describe(pair));
    }
  }
  return out;
}

BackendStats FixtureBackend::stats() const { return {requests_.load(), pairs_.load()}; }

// --- cache -----------------------------------------------------------------

CachingBackend::CachingBackend(std::unique_ptr<NliBackend> inner) : inner_(std::move(inner)) {
  if (!inner_) throw InvalidArgument("caching backend needs an inner backend");
}

CacheStats CachingBackend::cache_stats() const {
  std::lock_guard lock(mu_);
  return cache_stats_;
}

std::vector<NliDistribution> CachingBackend::classify_batch(const NliRequest& request) {
  const auto& pairs = request.pairs();
  std::vector<std::shared_future<NliDistribution>> pending(pairs.size());
  std::vector<std::promise<NliDistribution>> owned;
  std::vector<std::size_t> owned_index;
  std::vector<PremiseHypothesis> to_send;
  {
    std::lock_guard lock(mu_);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      ++cache_stats_.lookups;
      if (auto it = entries_.find(pairs[i]); it != entries_.end()) {
        ++cache_stats_.hits;
        pending[i] = it->second;
        continue;
      }
      owned.emplace_back();
      pending[i] = owned.back().get_future().share();
      entries_.emplace(pairs[i], pending[i]);
      owned_index.push_back(i);
      to_send.push_back(pairs[i]);
    }
  }

  if (!to_send.empty()) {
    try {
      const auto results = inner_->classify_batch(NliRequest(std::move(to_send)));
      if (results.size() != owned.size()) {
        throw ProtocolError(0, "backend returned " + std::to_string(results.size()) +
                                   " results for " + std::to_string(owned.size()) + " pairs");
      }
      for (std::size_t k = 0; k < owned.size(); ++k) owned[k].set_value(results[k]);
    } catch (...) {
      const auto error = std::current_exception();
      {
        std::lock_guard lock(mu_);
        for (std::size_t i : owned_index) entries_.erase(pairs[i]);
      }
      for (auto& p : owned) p.set_exception(error);
      try {
        throw;
      } catch (const BackendError& e) {
        rethrow_shifted(e, e.pair_index() < owned_index.size() ? owned_index[e.pair_index()]
                                                                : e.pair_index());
      }
    }
  }

  std::vector<NliDistribution> out;
  out.reserve(pairs.size());
  for (auto& f : pending) out.push_back(f.get());
  return out;
}

// --- HTTP ------------------------------------------------------------------

void BackendConfig::validate() const {
  if (batch_size < 1) throw InvalidArgument("batch_size must be at least 1");
  if (max_in_flight < 1) throw InvalidArgument("max_in_flight must be at least 1");
  if (endpoint_url.empty()) throw InvalidArgument("endpoint URL is empty");
}

std::string encode_nli_request(const std::vector<PremiseHypothesis>& pairs) {
  json body;
  auto& arr = body["pairs"] = json::array();
  for (const auto& p : pairs) arr.push_back({{"premise", p.premise}, {"hypothesis", p.hypothesis}});
  return body.dump();
}

std::vector<NliDistribution> decode_nli_response(const std::string& body, std::size_t expected,
                                                 std::size_t first_index) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::parse_error& e) {
    throw ProtocolError(first_index, std::string("malformed response JSON: ") + e.what());
  }
  auto results = doc.is_object() ? doc.find("results") : doc.end();
  if (results == doc.end() || !results->is_array()) {
    throw ProtocolError(first_index, "response lacks a 'results' array");
  }
  if (results->size() != expected) {
    throw ProtocolError(first_index, "response has " + std::to_string(results->size()) +
                                         " results for " + std::to_string(expected) + " pairs");
  }
  std::vector<NliDistribution> out;
  out.reserve(expected);
  for (std::size_t i = 0; i < expected; ++i) {
    try {
      out.push_back(distribution_from_json((*results)[i]));
    } catch (const InvalidArgument& e) {
      throw ProtocolError(first_index + i,
                          "result " + std::to_string(first_index + i) + ": " + e.what());
    }
  }
  return out;
}

HttpBackend::HttpBackend(BackendConfig cfg)
    : cfg_(std::move(cfg)),
      in_flight_(static_cast<std::ptrdiff_t>(std::max<std::size_t>(cfg_.max_in_flight, 1))) {
  cfg_.validate();
  std::string_view url = cfg_.endpoint_url;
  constexpr std::string_view scheme = "http://";
  if (url.substr(0, scheme.size()) != scheme) {
    throw InvalidArgument("endpoint must be an http:// URL: " + cfg_.endpoint_url);
  }
  url.remove_prefix(scheme.size());
  const auto slash = url.find('/');
  std::string_view authority = url.substr(0, slash);
  path_prefix_ = slash == std::string_view::npos ? "" : std::string(url.substr(slash));
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
  if (const auto colon = authority.rfind(':'); colon != std::string_view::npos) {
    const std::string port(authority.substr(colon + 1));
    try {
      port_ = std::stoi(port);
    } catch (const std::exception&) {
      throw InvalidArgument("bad port in endpoint URL: " + cfg_.endpoint_url);
    }
    authority = authority.substr(0, colon);
  }
  host_ = std::string(authority);
  if (host_.empty()) throw InvalidArgument("endpoint URL has no host: " + cfg_.endpoint_url);
}

std::vector<NliDistribution> HttpBackend::classify_batch(const NliRequest& request) {
  const auto& pairs = request.pairs();
  std::vector<NliDistribution> out;
  out.reserve(pairs.size());
  for (std::size_t start = 0; start < pairs.size(); start += cfg_.batch_size) {
    const std::size_t end = std::min(pairs.size(), start + cfg_.batch_size);
    std::vector<PremiseHypothesis> chunk(pairs.begin() + static_cast<std::ptrdiff_t>(start),
                                         pairs.begin() + static_cast<std::ptrdiff_t>(end));
    auto results = post_chunk(chunk, start);
    out.insert(out.end(), results.begin(), results.end());
  }
  return out;
}

std::vector<NliDistribution> HttpBackend::post_chunk(const std::vector<PremiseHypothesis>& pairs,
                                                     std::size_t first_index) {
  const std::string body = encode_nli_request(pairs);
  const std::string path = path_prefix_ + "/nli";
  std::string last_error;
  auto delay = cfg_.initial_backoff;

  for (unsigned attempt = 0; attempt <= cfg_.retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(delay);
      delay *= 2;
    }
    httplib::Result res;
    {
      SlotGuard slot(in_flight_);
      httplib::Client client(host_, port_);
      client.set_connection_timeout(cfg_.timeout);
      client.set_read_timeout(cfg_.timeout);
      client.set_write_timeout(cfg_.timeout);
      ++requests_;
      res = client.Post(path, body, "application/json");
    }
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 200) {
      auto out = decode_nli_response(res->body, pairs.size(), first_index);
      pairs_ += pairs.size();
      return out;
    }
    if (res->status >= 400 && res->status < 500) {
      throw ProtocolError(first_index,
                          "service rejected request (HTTP " + std::to_string(res->status) + "): " +
                              res->body);
    }
    last_error = "HTTP " + std::to_string(res->status) + ": " + res->body;
  }
  throw BackendUnavailable(first_index, "NLI service at " + cfg_.endpoint_url + " unavailable after " +
                                            std::to_string(cfg_.retries + 1) +
                                            " attempt(s) (pair " + std::to_string(first_index) +
                                            "): " + last_error);
}

BackendStats HttpBackend::stats() const { return {requests_.load(), pairs_.load()}; }

std::string HttpBackend::health() const {
  httplib::Client client(host_, port_);
  client.set_connection_timeout(cfg_.timeout);
  client.set_read_timeout(cfg_.timeout);
  auto res = client.Get(path_prefix_ + "/health");
  if (!res) {
    throw BackendUnavailable(0, "NLI service at " + cfg_.endpoint_url +
                                    " unreachable: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw BackendUnavailable(0, "NLI service at " + cfg_.endpoint_url + " not ready (HTTP " +
                                    std::to_string(res->status) + ")");
  }
  try {
    const auto doc = json::parse(res->body);
    return doc.value("model", std::string());
  } catch (const json::exception& e) {
    throw ProtocolError(0, std::string("malformed health response: ") + e.what());
  }
}

}  // namespace factcheck
