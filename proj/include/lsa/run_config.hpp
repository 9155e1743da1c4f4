#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "lsa/llm_client.hpp"
#include "lsa/losses.hpp"
#include "lsa/pipeline.hpp"

namespace lsa {

inline constexpr std::string_view kToolVersion = "0.1.0";

// Reproducible run settings. The JSON form round-trips losslessly; flags
// override file values; the API key comes from the environment only.
struct RunConfig {
  std::string benchmark_path;
  std::string predictions_path;
  std::string reports_path;
  std::vector<double> fractions{0.3, 0.5, 0.7, 0.9};
  std::vector<int> k_values{10, 20, 50};
  DecodeConfig decode;
  LossConfig loss;
  std::string mode = "with_goa";
  std::string mock;           // "", "echo-last-frame" or "fixture"
  std::string mock_fixture;   // fixture response file
  bool one_shot = false;
  std::uint64_t seed = 0;
  int parallelism = 4;
  std::size_t token_budget = 2000;
  std::string request_log;

  static RunConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  static RunConfig load(const std::string& path);
  void save(const std::string& path) const;
  std::string hash() const;  // sha256 of the canonical JSON form

  // Backend selector string derived from mock settings.
  std::string backend_selector() const;
};

// Run manifest: everything needed to reproduce a run bit-for-bit with
// mocks. Written next to each output as <output>.manifest.json.
void write_manifest(const std::string& output_path, const std::string& command,
                    const RunConfig& config,
                    const std::map<std::string, std::string>& input_paths);

}  // namespace lsa
