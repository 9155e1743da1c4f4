#include "lsa/report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

namespace lsa {

using nlohmann::json;

std::vector<VideoFrames> pair_records(const std::vector<PredictionRecord>& records,
                                      const std::vector<LsaInstance>& truth,
                                      double fraction,
                                      std::vector<std::string>* unmatched) {
  auto key = [](const std::string& id, double f) {
    std::ostringstream out;
    out << id << '@' << std::setprecision(6) << f;
    return out.str();
  };
  std::map<std::string, const LsaInstance*> instances;
  for (const auto& instance : truth) {
    instances[key(instance.video_id, instance.fraction)] = &instance;
  }
  std::vector<VideoFrames> videos;
  for (const auto& record : records) {
    if (std::abs(record.fraction - fraction) > 1e-9) continue;
    auto it = instances.find(key(record.video_id, record.fraction));
    if (it == instances.end()) {
      if (unmatched != nullptr) unmatched->push_back(record.video_id);
      continue;
    }
    VideoFrames video;
    video.video_id = record.video_id;
    video.predicted = record.future;
    video.truth = expand_sequence(it->second->future);
    videos.push_back(std::move(video));
  }
  return videos;
}

std::vector<double> fractions_in(const std::vector<PredictionRecord>& records) {
  std::set<double> seen;
  for (const auto& record : records) seen.insert(record.fraction);
  return {seen.begin(), seen.end()};
}

EvalReport evaluate(const std::vector<PredictionRecord>& records,
                    const std::vector<LsaInstance>& truth, double fraction,
                    const std::vector<int>& k_values) {
  EvalReport report;
  report.k_values = k_values;
  const std::vector<VideoFrames> videos = pair_records(records, truth, fraction);
  report.videos = static_cast<int>(videos.size());
  for (const auto& video : videos) report.frames += static_cast<int>(video.predicted.size());
  for (int k : k_values) {
    report.recall[k] = recall_at_k(videos, k);
    report.mean_recall[k] = mean_recall_at_k(videos, k);
    report.per_class_recall[k] = per_class_recall_at_k(videos, k);
  }
  report.objects = object_set_metrics(videos);
  report.relations = relation_accuracy(videos);

  int with_failures = 0, with_fallback = 0, counted = 0;
  for (const auto& record : records) {
    if (std::abs(record.fraction - fraction) > 1e-9) continue;
    ++counted;
    if (!record.diagnostics.oora_parse_failures.empty() ||
        record.diagnostics.goa_parse_failure) {
      ++with_failures;
    }
    if (record.diagnostics.goa_fallback) ++with_fallback;
    report.total_latency_ms += record.latency_ms;
  }
  if (counted > 0) {
    report.parse_failure_rate = static_cast<double>(with_failures) / counted;
    report.fallback_rate = static_cast<double>(with_fallback) / counted;
    report.mean_latency_ms = report.total_latency_ms / counted;
  }
  return report;
}

namespace {

json optional_to_json(const std::optional<double>& value) {
  return value ? json(*value) : json();
}

std::string fmt(const std::optional<double>& value, int width = 8) {
  std::ostringstream out;
  if (value) {
    out << std::fixed << std::setprecision(4) << std::setw(width) << *value;
  } else {
    out << std::setw(width) << "n/a";
  }
  return out.str();
}

}  // namespace

json report_to_json(const EvalReport& report) {
  json recall = json::object(), mean_recall = json::object(), per_class = json::object();
  for (int k : report.k_values) {
    const std::string key = std::to_string(k);
    recall[key] = optional_to_json(report.recall.at(k));
    mean_recall[key] = optional_to_json(report.mean_recall.at(k));
    per_class[key] = report.per_class_recall.at(k);
  }
  return json{
      {"k_values", report.k_values},
      {"recall", std::move(recall)},
      {"mean_recall", std::move(mean_recall)},
      {"per_class_recall", std::move(per_class)},
      {"objects",
       {{"strict", report.objects.strict},
        {"contain", report.objects.contain},
        {"subset", report.objects.subset},
        {"partial_overlap", report.objects.partial_overlap},
        {"no_overlap", report.objects.no_overlap},
        {"partial_acc", report.objects.partial_acc},
        {"frames", report.objects.frames}}},
      {"relations",
       {{"attention", report.relations.attention},
        {"spatial", report.relations.spatial},
        {"contact", report.relations.contact},
        {"overall", report.relations.overall},
        {"pairs", report.relations.pairs}}},
      {"parse_failure_rate", report.parse_failure_rate},
      {"fallback_rate", report.fallback_rate},
      {"timing",
       {{"mean_latency_ms", report.mean_latency_ms},
        {"total_latency_ms", report.total_latency_ms}}},
      {"videos", report.videos},
      {"frames", report.frames}};
}

std::string report_to_table(const EvalReport& report) {
  std::ostringstream out;
  out << "videos " << report.videos << "  frames " << report.frames << "\n";
  out << std::left << std::setw(8) << "K" << std::setw(10) << "R@K" << std::setw(10)
      << "mR@K" << "\n";
  for (int k : report.k_values) {
    out << std::left << std::setw(8) << k << fmt(report.recall.at(k), 8) << "  "
        << fmt(report.mean_recall.at(k), 8) << "\n";
  }
  out << "objects: strict " << fmt(report.objects.strict, 0) << "  contain "
      << fmt(report.objects.contain, 0) << "  subset " << fmt(report.objects.subset, 0)
      << "  partial " << fmt(report.objects.partial_overlap, 0) << "  none "
      << fmt(report.objects.no_overlap, 0) << "  partial_acc "
      << fmt(report.objects.partial_acc, 0) << "\n";
  out << "relations: attention " << fmt(report.relations.attention, 0) << "  spatial "
      << fmt(report.relations.spatial, 0) << "  contact "
      << fmt(report.relations.contact, 0) << "  overall "
      << fmt(report.relations.overall, 0) << "\n";
  out << "parse_failure_rate " << fmt(report.parse_failure_rate, 0) << "  fallback_rate "
      << fmt(report.fallback_rate, 0) << "  mean_latency_ms "
      << fmt(report.mean_latency_ms, 0) << "\n";
  return out.str();
}

RobustnessTable robustness_delta(
    const EvalReport& clean,
    const std::vector<std::pair<RobustnessRow, EvalReport>>& noisy) {
  RobustnessTable table;
  table.clean = clean.recall;
  std::map<double, std::map<int, std::pair<double, int>>> sums;
  for (const auto& [meta, report] : noisy) {
    RobustnessRow row = meta;
    for (const auto& [k, value] : report.recall) {
      row.recall[k] = value;
      const auto clean_it = clean.recall.find(k);
      if (value && clean_it != clean.recall.end() && clean_it->second &&
          *clean_it->second != 0.0) {
        const double delta = 100.0 * (*value - *clean_it->second) / *clean_it->second;
        row.delta_pct[k] = delta;
        auto& [sum, count] = sums[row.rate][k];
        sum += delta;
        ++count;
      } else {
        row.delta_pct[k] = std::nullopt;
      }
    }
    table.rows.push_back(std::move(row));
  }
  for (const auto& [rate, per_k] : sums) {
    for (const auto& [k, entry] : per_k) {
      table.average_delta_pct[rate][k] = entry.first / entry.second;
    }
  }
  return table;
}

json robustness_to_json(const RobustnessTable& table) {
  json clean = json::object();
  for (const auto& [k, value] : table.clean) {
    clean[std::to_string(k)] = optional_to_json(value);
  }
  json rows = json::array();
  for (const auto& row : table.rows) {
    json recall = json::object(), delta = json::object();
    for (const auto& [k, value] : row.recall) recall[std::to_string(k)] = optional_to_json(value);
    for (const auto& [k, value] : row.delta_pct) delta[std::to_string(k)] = optional_to_json(value);
    rows.push_back(json{{"kind", row.kind},
                        {"range", row.range},
                        {"rate", row.rate},
                        {"recall", std::move(recall)},
                        {"delta_pct", std::move(delta)}});
  }
  json averages = json::object();
  for (const auto& [rate, per_k] : table.average_delta_pct) {
    json entry = json::object();
    for (const auto& [k, value] : per_k) entry[std::to_string(k)] = value;
    std::ostringstream key;
    key << rate;
    averages[key.str()] = std::move(entry);
  }
  return json{{"clean", std::move(clean)},
              {"rows", std::move(rows)},
              {"average_delta_pct", std::move(averages)}};
}

std::string robustness_to_table(const RobustnessTable& table) {
  std::ostringstream out;
  out << std::left << std::setw(8) << "kind" << std::setw(12) << "range" << std::setw(8)
      << "rate";
  for (const auto& [k, value] : table.clean) {
    out << std::setw(12) << ("R@" + std::to_string(k)) << std::setw(12)
        << ("d%@" + std::to_string(k));
  }
  out << "\n";
  for (const auto& row : table.rows) {
    out << std::left << std::setw(8) << row.kind << std::setw(12) << row.range
        << std::setw(8) << row.rate;
    for (const auto& [k, value] : table.clean) {
      auto recall_it = row.recall.find(k);
      auto delta_it = row.delta_pct.find(k);
      out << fmt(recall_it != row.recall.end() ? recall_it->second : std::nullopt, 10)
          << "  "
          << fmt(delta_it != row.delta_pct.end() ? delta_it->second : std::nullopt, 10)
          << "  ";
    }
    out << "\n";
  }
  for (const auto& [rate, per_k] : table.average_delta_pct) {
    out << "avg_delta_pct rate=" << rate << ":";
    for (const auto& [k, value] : per_k) {
      out << "  R@" << k << " " << std::fixed << std::setprecision(3) << value << "%";
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace lsa
