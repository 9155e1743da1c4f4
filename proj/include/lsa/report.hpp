#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "lsa/eval.hpp"
#include "lsa/pipeline.hpp"

namespace lsa {

// Full evaluation of one prediction set against ground truth.
struct EvalReport {
  std::vector<int> k_values;
  std::map<int, std::optional<double>> recall;
  std::map<int, std::optional<double>> mean_recall;
  std::map<int, std::map<std::string, double>> per_class_recall;
  ObjectSetMetrics objects;
  RelationAccuracy relations;
  double parse_failure_rate = 0;  // records with any OORA total failure
  double fallback_rate = 0;       // records that fell back to without_goa
  double mean_latency_ms = 0;
  double total_latency_ms = 0;
  int videos = 0;
  int frames = 0;
};

// Pairs prediction records with their instances (matched on video id and
// fraction) and evaluates. Records without a matching instance are
// reported in `unmatched`.
std::vector<VideoFrames> pair_records(const std::vector<PredictionRecord>& records,
                                      const std::vector<LsaInstance>& truth,
                                      double fraction,
                                      std::vector<std::string>* unmatched = nullptr);

EvalReport evaluate(const std::vector<PredictionRecord>& records,
                    const std::vector<LsaInstance>& truth, double fraction,
                    const std::vector<int>& k_values);

// Fractions present in a prediction set, ascending.
std::vector<double> fractions_in(const std::vector<PredictionRecord>& records);

nlohmann::json report_to_json(const EvalReport& report);
std::string report_to_table(const EvalReport& report);

// Percentage deltas of noisy runs against a clean baseline.
struct RobustnessRow {
  std::string kind;
  std::string range;
  double rate = 0;
  std::map<int, std::optional<double>> recall;       // per K
  std::map<int, std::optional<double>> delta_pct;    // 100*(noisy-clean)/clean
};

struct RobustnessTable {
  std::map<int, std::optional<double>> clean;        // per K
  std::vector<RobustnessRow> rows;
  std::map<double, std::map<int, double>> average_delta_pct;  // rate -> K -> avg
};

RobustnessTable robustness_delta(const EvalReport& clean,
                                 const std::vector<std::pair<RobustnessRow, EvalReport>>& noisy);

nlohmann::json robustness_to_json(const RobustnessTable& table);
std::string robustness_to_table(const RobustnessTable& table);

}  // namespace lsa
