#pragma once

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <semaphore>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "selfplay/evaluator/prompts.hpp"
#include "selfplay/evaluator/reply.hpp"
#include "selfplay/evaluator/types.hpp"

namespace selfplay {

struct RemoteClientConfig {
  std::string endpoint;  // full URL of the chat-completions resource
  std::string model;
  std::string api_key_env = "JUDGE_API_KEY";
  std::chrono::milliseconds timeout{60'000};
  int max_attempts = 3;
  std::chrono::milliseconds backoff_base{1'000};  // doubles per retry
  int max_in_flight = 8;
};

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;

struct HttpResponse {
  int status = 0;  // 0: transport error (connect failure, timeout)
  std::string body;
  std::string error;
};

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse post(const std::string& url, const std::string& body,
                            const HttpHeaders& headers, std::chrono::milliseconds timeout) = 0;
};

namespace detail {

/// "http://host:8080/v1/chat" -> {"http://host:8080", "/v1/chat"}.
inline std::pair<std::string, std::string> split_url(const std::string& url) {
  const auto scheme = url.find("://");
  const auto path = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (path == std::string::npos) return {url, "/"};
  return {url.substr(0, path), url.substr(path)};
}

}  // namespace detail

class HttplibTransport : public HttpTransport {
 public:
  HttpResponse post(const std::string& url, const std::string& body, const HttpHeaders& headers,
                    std::chrono::milliseconds timeout) override {
    const auto [base, path] = detail::split_url(url);
    httplib::Client client(base);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    httplib::Headers h;
    for (const auto& [k, v] : headers) h.emplace(k, v);
    auto res = client.Post(path, h, body, "application/json");
    if (!res) return {0, {}, httplib::to_string(res.error())};
    return {res->status, res->body, {}};
  }
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

inline Sleeper real_sleeper() {
  return [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

struct RemoteScoreResult {
  bool ok = false;
  std::string content;
  std::string error;
  int attempts = 0;
};

inline std::string chat_request_body(const RemoteClientConfig& cfg, const std::string& prompt) {
  return nlohmann::json{{"model", cfg.model},
                        {"temperature", 0},
                        {"messages", {{{"role", "user"}, {"content", prompt}}}}}
      .dump();
}

/// Bounds concurrent requests across every caller sharing it.
class InFlightLimiter {
 public:
  explicit InFlightLimiter(int limit) : sem_(std::max(1, limit)) {}
  void acquire() { sem_.acquire(); }
  void release() { sem_.release(); }

 private:
  std::counting_semaphore<4096> sem_;
};

inline bool retryable_status(int status) noexcept {
  return status == 0 || status == 408 || status == 429 || status >= 500;
}

/// One chat-completion exchange with bounded retries. Never throws for
/// transport or protocol problems; the result carries the error instead.
inline RemoteScoreResult remote_score(std::string_view trajectory_text, GameId game,
                                      Rubric rubric, const RemoteClientConfig& cfg,
                                      HttpTransport& transport, const Sleeper& sleep,
                                      InFlightLimiter* limiter = nullptr) {
  RemoteScoreResult out;
  const std::string body =
      chat_request_body(cfg, assemble_prompt(rubric, game_title(game), trajectory_text));
  HttpHeaders headers{{"Content-Type", "application/json"}};
  if (!cfg.api_key_env.empty())
    if (const char* key = std::getenv(cfg.api_key_env.c_str()); key && *key)
      headers.emplace_back("Authorization", std::string("Bearer ") + key);

  auto backoff = cfg.backoff_base;
  for (int attempt = 1; attempt <= std::max(1, cfg.max_attempts); ++attempt) {
    out.attempts = attempt;
    if (limiter) limiter->acquire();
    HttpResponse res;
    try {
      res = transport.post(cfg.endpoint, body, headers, cfg.timeout);
    } catch (const std::exception& e) {
      res = {0, {}, e.what()};
    }
    if (limiter) limiter->release();

    if (res.status >= 200 && res.status < 300) {
      auto j = nlohmann::json::parse(res.body, nullptr, false);
      if (j.is_discarded() || !j.contains("choices") || !j["choices"].is_array() ||
          j["choices"].empty()) {
        out.error = "malformed chat-completion response";
        return out;
      }
      const auto& msg = j["choices"][0].value("message", nlohmann::json::object());
      if (!msg.contains("content") || !msg["content"].is_string()) {
        out.error = "chat-completion response has no message content";
        return out;
      }
      out.ok = true;
      out.content = msg["content"].get<std::string>();
      return out;
    }
    out.error = res.status == 0 ? "transport error: " + res.error
                                : "HTTP status " + std::to_string(res.status);
    if (!retryable_status(res.status)) return out;
    if (attempt < cfg.max_attempts) {
      sleep(backoff);
      backoff *= 2;
    }
  }
  return out;
}

/// Judge-backed evaluator. Verdicts are memoized per trajectory hash for the
/// lifetime of the object.
class RemoteEvaluator : public Evaluator {
 public:
  RemoteEvaluator(RemoteClientConfig cfg, std::shared_ptr<HttpTransport> transport = nullptr,
                  Sleeper sleep = real_sleeper())
      : cfg_(std::move(cfg)),
        transport_(transport ? std::move(transport) : std::make_shared<HttplibTransport>()),
        sleep_(std::move(sleep)),
        limiter_(cfg_.max_in_flight) {}

  std::string id() const override { return "remote:" + cfg_.model; }

  EvaluatorVerdict evaluate(const Trajectory& tr) override {
    const auto hash = trajectory_hash(tr);
    {
      std::lock_guard lock(mu_);
      if (const auto it = memo_.find(hash); it != memo_.end()) return it->second;
    }
    auto v = score(tr, hash);
    std::lock_guard lock(mu_);
    memo_.emplace(hash, v);
    return v;
  }

  std::vector<EvaluatorVerdict> evaluate_batch(
      const std::vector<const Trajectory*>& batch) override {
    std::vector<EvaluatorVerdict> out(batch.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (auto i = next++; i < batch.size(); i = next++) out[i] = evaluate(*batch[i]);
    };
    const auto n = std::min<std::size_t>(batch.size(),
                                         static_cast<std::size_t>(std::max(1, cfg_.max_in_flight)));
    std::vector<std::jthread> pool;
    for (std::size_t i = 1; i < n; ++i) pool.emplace_back(worker);
    worker();
    return out;
  }

 private:
  EvaluatorVerdict score(const Trajectory& tr, const std::string& hash) {
    const auto text = render_trajectory_text(tr);
    const auto rtc = remote_score(text, tr.game, Rubric::rtc, cfg_, *transport_, sleep_, &limiter_);
    if (!rtc.ok) return EvaluatorVerdict::failed(hash, id(), "rtc: " + rtc.error);
    const auto rer = remote_score(text, tr.game, Rubric::rer, cfg_, *transport_, sleep_, &limiter_);
    if (!rer.ok) return EvaluatorVerdict::failed(hash, id(), "rer: " + rer.error);
    try {
      return EvaluatorVerdict::scored(hash, id(), parse_rtc_reply(rtc.content),
                                      parse_rer_reply(rer.content));
    } catch (const ReplyParseError& e) {
      return EvaluatorVerdict::failed(hash, id(), e.what());
    }
  }

  RemoteClientConfig cfg_;
  std::shared_ptr<HttpTransport> transport_;
  Sleeper sleep_;
  InFlightLimiter limiter_;
  std::mutex mu_;
  std::map<std::string, EvaluatorVerdict> memo_;
};

}  // namespace selfplay
