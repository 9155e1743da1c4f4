#include "lsa/run_config.hpp"

#include "lsa/util.hpp"

namespace lsa {

using nlohmann::json;

namespace {

json decode_to_json(const DecodeConfig& d) {
  return json{{"model", d.model},
              {"endpoint", d.endpoint},
              {"temperature", d.temperature},
              {"top_p", d.top_p},
              {"max_output_tokens",
               d.max_output_tokens ? json(*d.max_output_tokens) : json()},
              {"timeout_ms", d.timeout_ms},
              {"max_retries", d.max_retries},
              {"backoff_ms", d.backoff_ms},
              {"max_inflight", d.max_inflight},
              {"api_key_env", d.api_key_env}};
}

DecodeConfig decode_from_json(const json& j) {
  DecodeConfig d;
  d.model = j.value("model", d.model);
  d.endpoint = j.value("endpoint", d.endpoint);
  d.temperature = j.value("temperature", d.temperature);
  d.top_p = j.value("top_p", d.top_p);
  if (j.contains("max_output_tokens") && !j.at("max_output_tokens").is_null()) {
    d.max_output_tokens = j.at("max_output_tokens").get<int>();
  }
  d.timeout_ms = j.value("timeout_ms", d.timeout_ms);
  d.max_retries = j.value("max_retries", d.max_retries);
  d.backoff_ms = j.value("backoff_ms", d.backoff_ms);
  d.max_inflight = j.value("max_inflight", d.max_inflight);
  d.api_key_env = j.value("api_key_env", d.api_key_env);
  return d;
}

json loss_to_json(const LossConfig& l) {
  return json{{"beta", l.beta},          {"lambda", l.lambda},
              {"delta", l.delta},        {"tau", l.tau},
              {"tau_gate", l.tau_gate},  {"epsilon", l.epsilon},
              {"gamma_pos", l.gamma_pos},{"gamma_neg", l.gamma_neg},
              {"eta", l.eta}};
}

LossConfig loss_from_json(const json& j) {
  LossConfig l;
  l.beta = j.value("beta", l.beta);
  l.lambda = j.value("lambda", l.lambda);
  l.delta = j.value("delta", l.delta);
  l.tau = j.value("tau", l.tau);
  l.tau_gate = j.value("tau_gate", l.tau_gate);
  l.epsilon = j.value("epsilon", l.epsilon);
  l.gamma_pos = j.value("gamma_pos", l.gamma_pos);
  l.gamma_neg = j.value("gamma_neg", l.gamma_neg);
  l.eta = j.value("eta", l.eta);
  return l;
}

}  // namespace

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  const json paths = j.value("paths", json::object());
  c.benchmark_path = paths.value("benchmark", "");
  c.predictions_path = paths.value("predictions", "");
  c.reports_path = paths.value("reports", "");
  c.fractions = j.value("fractions", c.fractions);
  c.k_values = j.value("k_values", c.k_values);
  if (j.contains("decode")) c.decode = decode_from_json(j.at("decode"));
  if (j.contains("loss")) c.loss = loss_from_json(j.at("loss"));
  c.mode = j.value("mode", c.mode);
  c.mock = j.value("mock", c.mock);
  c.mock_fixture = j.value("mock_fixture", c.mock_fixture);
  c.one_shot = j.value("one_shot", c.one_shot);
  c.seed = j.value("seed", c.seed);
  c.parallelism = j.value("parallelism", c.parallelism);
  c.token_budget = j.value("token_budget", c.token_budget);
  c.request_log = j.value("request_log", c.request_log);
  return c;
}

json RunConfig::to_json() const {
  return json{{"paths",
               {{"benchmark", benchmark_path},
                {"predictions", predictions_path},
                {"reports", reports_path}}},
              {"fractions", fractions},
              {"k_values", k_values},
              {"decode", decode_to_json(decode)},
              {"loss", loss_to_json(loss)},
              {"mode", mode},
              {"mock", mock},
              {"mock_fixture", mock_fixture},
              {"one_shot", one_shot},
              {"seed", seed},
              {"parallelism", parallelism},
              {"token_budget", token_budget},
              {"request_log", request_log}};
}

RunConfig RunConfig::load(const std::string& path) {
  return from_json(json::parse(read_file(path)));
}

void RunConfig::save(const std::string& path) const {
  write_file(path, to_json().dump(2) + "\n");
}

std::string RunConfig::hash() const { return sha256_hex(to_json().dump()); }

std::string RunConfig::backend_selector() const {
  if (mock == "echo-last-frame") return "echo-last-frame";
  if (mock == "fixture") return "fixture:" + mock_fixture;
  if (mock.rfind("fixture:", 0) == 0) return mock;
  return "http";
}

void write_manifest(const std::string& output_path, const std::string& command,
                    const RunConfig& config,
                    const std::map<std::string, std::string>& input_paths) {
  json inputs = json::object();
  for (const auto& [label, path] : input_paths) {
    inputs[label] = json{{"path", path}, {"sha256", sha256_file(path)}};
  }
  json manifest{{"tool", "lsa"},
                {"version", std::string(kToolVersion)},
                {"command", command},
                {"config_sha256", config.hash()},
                {"config", config.to_json()},
                {"inputs", std::move(inputs)},
                {"output", output_path}};
  write_file(output_path + ".manifest.json", manifest.dump(2) + "\n");
}

}  // namespace lsa
