#include "lsa/llm_client.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <semaphore>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "httplib.h"
#include "json.hpp"
#include "lsa/util.hpp"

namespace lsa {

using nlohmann::json;

std::string_view to_string(LlmErrorKind kind) {
  switch (kind) {
    case LlmErrorKind::malformed_request: return "malformed_request";
    case LlmErrorKind::auth: return "auth";
    case LlmErrorKind::rate_limited: return "rate_limited";
    case LlmErrorKind::timeout: return "timeout";
    case LlmErrorKind::network: return "network";
    case LlmErrorKind::protocol: return "protocol";
  }
  return "?";
}

namespace {

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

void require_prompt(const std::string& prompt) {
  if (prompt.empty()) {
    throw LlmError(LlmErrorKind::malformed_request, "empty prompt");
  }
}

struct EndpointParts {
  std::string origin;  // scheme://host[:port]
  std::string base_path;
};

EndpointParts split_endpoint(const std::string& endpoint) {
  const std::size_t scheme = endpoint.find("://");
  if (scheme == std::string::npos) {
    throw LlmError(LlmErrorKind::malformed_request, "endpoint missing scheme: " + endpoint);
  }
  const std::size_t path = endpoint.find('/', scheme + 3);
  if (path == std::string::npos) return {endpoint, ""};
  std::string base = endpoint.substr(path);
  while (!base.empty() && base.back() == '/') base.pop_back();
  return {endpoint.substr(0, path), base};
}

class HttpBackend : public LlmBackend {
public:
  Completion complete(const std::string& prompt, const DecodeConfig& config) override {
    require_prompt(prompt);
    const EndpointParts parts = split_endpoint(config.endpoint);
    httplib::Client client(parts.origin);
    client.set_connection_timeout(0, config.timeout_ms * 1000LL);
    client.set_read_timeout(config.timeout_ms / 1000, (config.timeout_ms % 1000) * 1000);
    client.set_write_timeout(config.timeout_ms / 1000, (config.timeout_ms % 1000) * 1000);

    httplib::Headers headers;
    if (const char* key = std::getenv(config.api_key_env.c_str());
        key != nullptr && key[0] != '\0') {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    json body{{"model", config.model},
              {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
              {"temperature", config.temperature},
              {"top_p", config.top_p}};
    if (config.max_output_tokens) body["max_tokens"] = *config.max_output_tokens;
    const std::string payload = body.dump();
    const std::string url = parts.base_path + "/chat/completions";

    std::counting_semaphore<256>& gate = inflight_gate(config.max_inflight);
    gate.acquire();
    struct Release {
      std::counting_semaphore<256>& gate;
      ~Release() { gate.release(); }
    } release{gate};

    const double start = now_ms();
    LlmErrorKind last_kind = LlmErrorKind::network;
    std::string last_message;
    for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
      if (attempt > 0) {
        std::this_thread::sleep_for(
            std::chrono::milliseconds(config.backoff_ms << (attempt - 1)));
      }
      httplib::Result res = client.Post(url, headers, payload, "application/json");
      if (!res) {
        last_kind = res.error() == httplib::Error::ConnectionTimeout ||
                            res.error() == httplib::Error::Read
                        ? LlmErrorKind::timeout
                        : LlmErrorKind::network;
        last_message = httplib::to_string(res.error());
        continue;  // transient: retry
      }
      if (res->status == 401 || res->status == 403) {
        throw LlmError(LlmErrorKind::auth, "authentication failed (HTTP " +
                                               std::to_string(res->status) + ")");
      }
      if (res->status == 429) {
        last_kind = LlmErrorKind::rate_limited;
        last_message = "HTTP 429";
        continue;
      }
      if (res->status >= 500) {
        last_kind = LlmErrorKind::network;
        last_message = "HTTP " + std::to_string(res->status);
        continue;
      }
      if (res->status >= 400) {
        throw LlmError(LlmErrorKind::malformed_request,
                       "request rejected (HTTP " + std::to_string(res->status) +
                           "): " + res->body.substr(0, 200));
      }
      json reply = json::parse(res->body, nullptr, false);
      if (reply.is_discarded() || !reply.contains("choices") || reply["choices"].empty()) {
        throw LlmError(LlmErrorKind::protocol,
                       "unexpected response shape: " + res->body.substr(0, 200));
      }
      Completion completion;
      completion.text = reply["choices"][0].value("message", json::object())
                            .value("content", std::string{});
      completion.latency_ms = now_ms() - start;
      completion.attempts = attempt + 1;
      if (reply.contains("usage")) {
        completion.prompt_tokens = reply["usage"].value("prompt_tokens", -1);
        completion.completion_tokens = reply["usage"].value("completion_tokens", -1);
      }
      return completion;
    }
    if (last_kind == LlmErrorKind::rate_limited) {
      throw LlmError(last_kind, "rate limit not cleared after " +
                                    std::to_string(config.max_retries) + " retries");
    }
    throw LlmError(last_kind, "request failed after retries: " + last_message);
  }

  std::string name() const override { return "http"; }

private:
  // One gate per backend instance; sized lazily from the first request.
  std::counting_semaphore<256>& inflight_gate(int cap) {
    std::call_once(gate_once_, [&] {
      gate_ = std::make_unique<std::counting_semaphore<256>>(
          std::max(1, std::min(cap, 256)));
    });
    return *gate_;
  }
  std::once_flag gate_once_;
  std::unique_ptr<std::counting_semaphore<256>> gate_;
};

// Shared helpers for the echo mock's lightweight prompt scraping. Clause
// lines carry only vocabulary tokens, so placeholder lines of the format
// instruction ("<attention_relationship>") never match.
struct Clause {
  std::string object;
  std::string attention;
  std::string spatial;
  std::string contact;
};

std::optional<Clause> scrape_clause(const std::string& line) {
  const std::size_t obj = line.find("object: ");
  if (obj == std::string::npos) return std::nullopt;
  const std::size_t attn = line.find(" attention: ", obj);
  const std::size_t spat = line.find(", spatial: ", obj);
  const std::size_t cont = line.find(", contact: ", obj);
  if (attn == std::string::npos || spat == std::string::npos || cont == std::string::npos) {
    return std::nullopt;
  }
  Clause clause;
  clause.object = line.substr(obj + 8, attn - obj - 8);
  clause.attention = line.substr(attn + 12, spat - attn - 12);
  clause.spatial = line.substr(spat + 11, cont - spat - 11);
  clause.contact = line.substr(cont + 11);
  if (!clause.contact.empty() && clause.contact.back() == '.') clause.contact.pop_back();
  if (clause.contact.find('<') != std::string::npos) return std::nullopt;
  return clause;
}

std::vector<int> scrape_ids(const std::string& line) {
  std::vector<int> ids;
  std::size_t i = 0;
  while (i < line.size()) {
    if (std::isdigit(static_cast<unsigned char>(line[i]))) {
      std::size_t j = i;
      while (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j]))) ++j;
      ids.push_back(std::stoi(line.substr(i, j - i)));
      i = j;
    } else {
      ++i;
    }
  }
  return ids;
}

class EchoLastFrameBackend : public LlmBackend {
public:
  Completion complete(const std::string& prompt, const DecodeConfig&) override {
    require_prompt(prompt);
    std::vector<std::string> lines;
    {
      std::istringstream stream(prompt);
      std::string line;
      while (std::getline(stream, line)) lines.push_back(line);
    }
    if (lines.empty()) {
      throw LlmError(LlmErrorKind::malformed_request, "blank prompt");
    }
    const std::vector<int> future = scrape_ids(lines.back());
    if (future.empty()) {
      throw LlmError(LlmErrorKind::protocol, "echo mock: no future frames in cue line");
    }

    const bool oora = prompt.find("Observed segment for object [") != std::string::npos;
    Completion completion;
    completion.text = oora ? answer_oora(lines, future) : answer_goa(lines, future);
    return completion;
  }

  std::string name() const override { return "echo-last-frame"; }

private:
  static std::string answer_goa(const std::vector<std::string>& lines,
                                const std::vector<int>& future) {
    // Objects of the last frame header's clause group.
    std::vector<std::string> objects;
    for (const auto& line : lines) {
      auto clause = scrape_clause(line);
      if (!clause) continue;
      if (line.rfind("Frame ", 0) == 0) objects.clear();
      objects.push_back(clause->object);
    }
    if (objects.empty()) {
      throw LlmError(LlmErrorKind::protocol, "echo mock: no observed clauses in prompt");
    }
    std::string joined = join(objects, ", ");
    std::vector<std::string> out;
    for (int id : future) out.push_back("Frame " + std::to_string(id) + ": " + joined);
    return join(out, "\n");
  }

  static std::string answer_oora(const std::vector<std::string>& lines,
                                 const std::vector<int>& future) {
    std::optional<Clause> last;
    for (const auto& line : lines) {
      if (auto clause = scrape_clause(line)) last = clause;
    }
    if (!last) {
      throw LlmError(LlmErrorKind::protocol, "echo mock: no observed clauses in prompt");
    }
    std::vector<std::string> out;
    for (int id : future) {
      out.push_back("Frame " + std::to_string(id) + ": object: " + last->object +
                    " attention: " + last->attention + ", spatial: " + last->spatial +
                    ", contact: " + last->contact + ".");
    }
    return join(out, "\n");
  }
};

class FixtureBackend : public LlmBackend {
public:
  explicit FixtureBackend(const std::string& path) : path_(path) {
    json doc = json::parse(read_file(path));
    for (const auto& entry : doc) {
      responses_[entry.at("prompt_sha256").get<std::string>()] =
          entry.at("response").get<std::string>();
    }
  }

  Completion complete(const std::string& prompt, const DecodeConfig&) override {
    require_prompt(prompt);
    const std::string digest = sha256_hex(prompt);
    auto it = responses_.find(digest);
    if (it == responses_.end()) {
      throw LlmError(LlmErrorKind::protocol,
                     "no fixture response for prompt " + digest + " in " + path_);
    }
    Completion completion;
    completion.text = it->second;
    return completion;
  }

  std::string name() const override { return "fixture"; }

private:
  std::string path_;
  std::unordered_map<std::string, std::string> responses_;
};

class LoggingBackend : public LlmBackend {
public:
  LoggingBackend(std::unique_ptr<LlmBackend> inner, std::shared_ptr<RequestLogger> logger)
      : inner_(std::move(inner)), logger_(std::move(logger)) {}

  Completion complete(const std::string& prompt, const DecodeConfig& config) override {
    try {
      Completion completion = inner_->complete(prompt, config);
      if (logger_) logger_->log(inner_->name(), config, prompt, &completion, nullptr);
      return completion;
    } catch (const LlmError& error) {
      if (logger_) logger_->log(inner_->name(), config, prompt, nullptr, &error);
      throw;
    }
  }

  std::string name() const override { return inner_->name(); }

private:
  std::unique_ptr<LlmBackend> inner_;
  std::shared_ptr<RequestLogger> logger_;
};

}  // namespace

std::unique_ptr<LlmBackend> make_http_backend() { return std::make_unique<HttpBackend>(); }

std::unique_ptr<LlmBackend> make_echo_last_frame_backend() {
  return std::make_unique<EchoLastFrameBackend>();
}

std::unique_ptr<LlmBackend> make_fixture_backend(const std::string& path) {
  return std::make_unique<FixtureBackend>(path);
}

std::unique_ptr<LlmBackend> make_backend(const std::string& selector) {
  if (selector == "echo-last-frame") return make_echo_last_frame_backend();
  if (selector.rfind("fixture:", 0) == 0) return make_fixture_backend(selector.substr(8));
  if (selector == "http" || selector.empty() || selector == "none") {
    return make_http_backend();
  }
  throw std::invalid_argument("unknown backend selector: " + selector);
}

void RequestLogger::log(const std::string& backend, const DecodeConfig& config,
                        const std::string& prompt, const Completion* completion,
                        const LlmError* error) {
  json record{{"ts_ms", std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::system_clock::now().time_since_epoch())
                            .count()},
              {"backend", backend},
              {"model", config.model},
              {"prompt_sha256", sha256_hex(prompt)},
              {"temperature", config.temperature},
              {"top_p", config.top_p}};
  if (completion != nullptr) {
    record["status"] = "ok";
    record["latency_ms"] = completion->latency_ms;
    record["attempts"] = completion->attempts;
    record["prompt_tokens"] = completion->prompt_tokens;
    record["completion_tokens"] = completion->completion_tokens;
  } else if (error != nullptr) {
    record["status"] = std::string(to_string(error->kind()));
    record["error"] = error->what();
  }
  std::lock_guard<std::mutex> lock(mutex_);
  std::ofstream out(path_, std::ios::app);
  out << record.dump() << '\n';
}

std::unique_ptr<LlmBackend> with_logging(std::unique_ptr<LlmBackend> inner,
                                         std::shared_ptr<RequestLogger> logger) {
  if (!logger) return inner;
  return std::make_unique<LoggingBackend>(std::move(inner), std::move(logger));
}

}  // namespace lsa
