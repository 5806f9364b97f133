#pragma once

#include <arpa/inet.h>
#include <httplib.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <deque>
#include <functional>
#include <json.hpp>
#include <mutex>
#include <thread>

#include "test_support.hpp"

namespace factcheck::testing {

/// In-process stand-in for the inference sidecar speaking the same wire
/// protocol. Answers with HashBackend distributions unless a canned
/// response is queued.
class FakeNliService {
 public:
  struct Canned {
    int status;
    std::string body;
  };

  FakeNliService() {
    server_.Post("/nli", [this](const httplib::Request& req, httplib::Response& res) {
      std::lock_guard lock(mu_);
      ++posts_;
      if (!canned_.empty()) {
        const Canned c = canned_.front();
        canned_.pop_front();
        res.status = c.status;
        res.set_content(c.body, "application/json");
        return;
      }
      const auto doc = nlohmann::json::parse(req.body);
      nlohmann::json results = nlohmann::json::array();
      batch_sizes_.push_back(doc.at("pairs").size());
      for (const auto& p : doc.at("pairs")) {
        const auto d = HashBackend::of(
            {p.at("premise").get<std::string>(), p.at("hypothesis").get<std::string>()});
        results.push_back({{"contradiction", d.contradiction()},
                           {"neutral", d.neutral()},
                           {"entailment", d.entailment()},
                           {"label", std::string(to_string(label_argmax(d)))}});
      }
      res.set_content(nlohmann::json{{"results", results}}.dump(), "application/json");
    });
    server_.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
      std::lock_guard lock(mu_);
      if (!ready_) {
        res.status = 503;
        res.set_content(R"({"status":"loading"})", "application/json");
        return;
      }
      res.set_content(R"({"status":"ok","model":"fake-nli"})", "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~FakeNliService() {
    server_.stop();
    thread_.join();
  }

  FakeNliService(const FakeNliService&) = delete;
  FakeNliService& operator=(const FakeNliService&) = delete;

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

  void queue(int status, std::string body) {
    std::lock_guard lock(mu_);
    canned_.push_back({status, std::move(body)});
  }
  void set_ready(bool ready) {
    std::lock_guard lock(mu_);
    ready_ = ready;
  }
  std::size_t posts() const {
    std::lock_guard lock(mu_);
    return posts_;
  }
  std::vector<std::size_t> batch_sizes() const {
    std::lock_guard lock(mu_);
    return batch_sizes_;
  }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  mutable std::mutex mu_;
  std::deque<Canned> canned_;
  std::vector<std::size_t> batch_sizes_;
  std::size_t posts_ = 0;
  bool ready_ = true;
};

/// A local port with nothing listening on it: bound once without
/// listen(), then released, so connects are refused.
inline int unused_port() {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  ::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr);
  socklen_t len = sizeof addr;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  ::close(fd);
  return ntohs(addr.sin_port);
}

}  // namespace factcheck::testing
