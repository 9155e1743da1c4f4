#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>

#include "lsa/vocabulary.hpp"

namespace lsa {

// Decode and transport parameters for chat-completion requests. The
// default sampling settings are temperature 0.7 with nucleus top_p 0.4.
struct DecodeConfig {
  std::string model = "gpt-4o-mini";
  std::string endpoint = "http://localhost:8000/v1";
  double temperature = 0.7;
  double top_p = 0.4;
  std::optional<int> max_output_tokens;
  int timeout_ms = 60000;
  int max_retries = 3;
  int backoff_ms = 500;
  int max_inflight = 4;
  // Name of the environment variable holding the API key. The key itself
  // is never persisted.
  std::string api_key_env = "LSA_API_KEY";
};

enum class LlmErrorKind {
  malformed_request,  // never retried
  auth,
  rate_limited,       // retried; surfaces after retry exhaustion
  timeout,
  network,
  protocol,           // unexpected response shape
};

std::string_view to_string(LlmErrorKind kind);

class LlmError : public std::runtime_error {
public:
  LlmError(LlmErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  LlmErrorKind kind() const { return kind_; }

private:
  LlmErrorKind kind_;
};

struct Completion {
  std::string text;
  double latency_ms = 0;
  int attempts = 1;
  int prompt_tokens = -1;      // -1 when the backend reports no usage
  int completion_tokens = -1;
};

class LlmBackend {
public:
  virtual ~LlmBackend() = default;
  // Returns the completion or throws LlmError. Thread-safe.
  virtual Completion complete(const std::string& prompt, const DecodeConfig& config) = 0;
  virtual std::string name() const = 0;
};

// OpenAI-compatible chat-completions client. Transient failures (429, 5xx,
// network) are retried with exponential backoff; 4xx client errors are not.
// Concurrent requests are bounded by config.max_inflight.
std::unique_ptr<LlmBackend> make_http_backend();

// Deterministic offline stub: replays the last observed frame. For a GOA
// prompt it answers every requested frame with the last frame's object
// list; for an OORA prompt, with the target object's last observed
// relations.
std::unique_ptr<LlmBackend> make_echo_last_frame_backend();

// Replays canned responses keyed by the SHA-256 of the prompt text, loaded
// from a JSON file: [{"prompt_sha256": "...", "response": "..."}, ...].
std::unique_ptr<LlmBackend> make_fixture_backend(const std::string& path);

// "echo-last-frame", "fixture:<path>" or "http".
std::unique_ptr<LlmBackend> make_backend(const std::string& selector);

// Appends one JSONL record per request: timestamp, backend, model, prompt
// hash, decode parameters, latency, outcome and token usage. API keys and
// prompt text never appear in the log.
class RequestLogger {
public:
  explicit RequestLogger(std::string path) : path_(std::move(path)) {}
  void log(const std::string& backend, const DecodeConfig& config,
           const std::string& prompt, const Completion* completion,
           const LlmError* error);

private:
  std::string path_;
  std::mutex mutex_;
};

// Decorator that reports every call to a logger. `logger` may be null, in
// which case calls pass straight through.
std::unique_ptr<LlmBackend> with_logging(std::unique_ptr<LlmBackend> inner,
                                         std::shared_ptr<RequestLogger> logger);

}  // namespace lsa
