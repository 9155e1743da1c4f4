#include <algorithm>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lsa/benchmark.hpp"
#include "lsa/io.hpp"
#include "lsa/llm_client.hpp"
#include "lsa/losses.hpp"
#include "lsa/pipeline.hpp"
#include "lsa/prompts.hpp"
#include "lsa/report.hpp"
#include "lsa/run_config.hpp"
#include "lsa/text_codec.hpp"
#include "lsa/util.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitExternal = 2;

std::vector<double> parse_fraction_list(const std::string& csv) {
  std::vector<double> out;
  for (const auto& part : lsa::split(csv, ',')) out.push_back(std::stod(lsa::trim(part)));
  return out;
}

std::vector<int> parse_int_list(const std::string& csv) {
  std::vector<int> out;
  for (const auto& part : lsa::split(csv, ',')) out.push_back(std::stoi(lsa::trim(part)));
  return out;
}

struct CommonFlags {
  std::string config_path;
  lsa::RunConfig config;

  void load() {
    if (!config_path.empty()) config = lsa::RunConfig::load(config_path);
  }
};

std::vector<lsa::PredictionRecord> filter_fraction(
    std::vector<lsa::PredictionRecord> records, std::optional<double> fraction) {
  if (!fraction) return records;
  std::vector<lsa::PredictionRecord> out;
  for (auto& record : records) {
    if (std::abs(record.fraction - *fraction) <= 1e-9) out.push_back(std::move(record));
  }
  return out;
}

// Per-fraction evaluation over every fraction present (or just the one
// requested), plus a JSON document keyed by fraction.
json evaluate_all(const std::vector<lsa::PredictionRecord>& records,
                  const std::vector<lsa::LsaInstance>& truth,
                  const std::vector<int>& k_values, std::ostream& table_out) {
  json by_fraction = json::object();
  for (double fraction : lsa::fractions_in(records)) {
    lsa::EvalReport report = lsa::evaluate(records, truth, fraction, k_values);
    std::ostringstream key;
    key << fraction;
    by_fraction[key.str()] = lsa::report_to_json(report);
    table_out << "fraction " << fraction << "\n"
              << lsa::report_to_table(report) << "\n";
  }
  return by_fraction;
}

int run_bench_build(CommonFlags& common, const std::string& corpus_path,
                    const std::string& fractions_csv, const std::string& split,
                    const std::string& out_path, const std::string& stats_path) {
  common.load();
  const auto& vocab = lsa::Vocabulary::action_genome();
  const std::vector<lsa::VideoRecord> corpus = lsa::load_corpus(corpus_path, vocab);
  const std::vector<double> fractions =
      fractions_csv.empty() ? common.config.fractions : parse_fraction_list(fractions_csv);
  lsa::BuildDiagnostics diag;
  std::vector<lsa::LsaInstance> instances =
      lsa::build_benchmark(corpus, fractions, split, &diag);
  lsa::save_benchmark(out_path, instances);
  lsa::write_manifest(out_path, "bench build", common.config, {{"corpus", corpus_path}});
  std::cerr << "videos in " << diag.videos_in << ", kept " << diag.videos_kept
            << ", dropped short " << diag.videos_dropped_short << ", dropped split "
            << diag.videos_dropped_split << "; instances " << instances.size() << "\n";
  for (const auto& err : diag.record_errors) std::cerr << "record error: " << err << "\n";

  if (!stats_path.empty()) {
    json per_fraction = json::object();
    for (double fraction : fractions) {
      std::vector<lsa::LsaInstance> at;
      for (const auto& instance : instances) {
        if (std::abs(instance.fraction - fraction) <= 1e-9) at.push_back(instance);
      }
      lsa::ObjectDynamicsStats dynamics = lsa::compute_object_dynamics(at);
      std::ostringstream key;
      key << fraction;
      per_fraction[key.str()] = json{{"instances", at.size()},
                                     {"consistent_rate", dynamics.consistent_rate},
                                     {"new_object_rate", dynamics.new_object_rate},
                                     {"disappeared_rate", dynamics.disappeared_rate}};
    }
    json stats{{"videos_kept", diag.videos_kept},
               {"videos_dropped_short", diag.videos_dropped_short},
               {"instances", instances.size()},
               {"vocabulary",
                {{"objects", vocab.object_count()},
                 {"relations", vocab.relation_count()},
                 {"attention", vocab.attention_relations().size()},
                 {"spatial", vocab.spatial_relations().size()},
                 {"contact", vocab.contact_relations().size()}}},
               {"object_dynamics", std::move(per_fraction)}};
    lsa::write_file(stats_path, stats.dump(2) + "\n");
  }
  return kExitOk;
}

int run_bench_stats(CommonFlags& common, const std::string& benchmark_path,
                    std::optional<double> fraction, const std::string& out_path) {
  common.load();
  const auto& vocab = lsa::Vocabulary::action_genome();
  std::vector<lsa::LsaInstance> instances = lsa::load_benchmark(benchmark_path, vocab);
  json per_fraction = json::object();
  std::set<double> fractions;
  for (const auto& instance : instances) fractions.insert(instance.fraction);
  std::ostringstream table;
  table << std::left << std::setw(10) << "fraction" << std::setw(11) << "instances"
        << std::setw(12) << "consistent" << std::setw(9) << "new" << std::setw(12)
        << "disappeared" << "\n";
  for (double f : fractions) {
    if (fraction && std::abs(f - *fraction) > 1e-9) continue;
    std::vector<lsa::LsaInstance> at;
    for (const auto& instance : instances) {
      if (std::abs(instance.fraction - f) <= 1e-9) at.push_back(instance);
    }
    lsa::ObjectDynamicsStats dynamics = lsa::compute_object_dynamics(at);
    std::ostringstream key;
    key << f;
    per_fraction[key.str()] = json{{"instances", at.size()},
                                   {"consistent_rate", dynamics.consistent_rate},
                                   {"new_object_rate", dynamics.new_object_rate},
                                   {"disappeared_rate", dynamics.disappeared_rate}};
    table << std::left << std::setw(10) << f << std::setw(11) << at.size()
          << std::setw(12) << dynamics.consistent_rate << std::setw(9)
          << dynamics.new_object_rate << std::setw(12) << dynamics.disappeared_rate
          << "\n";
  }
  json stats{{"vocabulary",
              {{"objects", vocab.object_count()},
               {"relations", vocab.relation_count()},
               {"published_object_classes", 35},
               {"published_relationship_classes", 25}}},
             {"object_dynamics", std::move(per_fraction)}};
  std::cout << table.str();
  if (!out_path.empty()) {
    lsa::write_file(out_path, stats.dump(2) + "\n");
    lsa::write_manifest(out_path, "bench stats", common.config,
                        {{"benchmark", benchmark_path}});
  } else {
    std::cout << stats.dump(2) << "\n";
  }
  return kExitOk;
}

int run_bench_oracle(CommonFlags& common, const std::string& benchmark_path,
                     const std::string& k_csv, std::optional<double> fraction) {
  common.load();
  const auto& vocab = lsa::Vocabulary::action_genome();
  std::vector<lsa::LsaInstance> instances = lsa::load_benchmark(benchmark_path, vocab);
  const std::vector<int> k_values =
      k_csv.empty() ? common.config.k_values : parse_int_list(k_csv);
  std::set<double> fractions;
  for (const auto& instance : instances) fractions.insert(instance.fraction);
  json out = json::object();
  for (double f : fractions) {
    if (fraction && std::abs(f - *fraction) > 1e-9) continue;
    std::vector<lsa::LsaInstance> at;
    for (const auto& instance : instances) {
      if (std::abs(instance.fraction - f) <= 1e-9) at.push_back(instance);
    }
    json per_k = json::object();
    for (int k : k_values) {
      std::optional<double> ceiling = lsa::oracle_ceiling(at, k);
      per_k[std::to_string(k)] = ceiling ? json(*ceiling) : json();
      std::cout << "fraction " << f << "  K=" << k << "  ceiling "
                << (ceiling ? std::to_string(*ceiling) : "n/a") << "\n";
    }
    std::ostringstream key;
    key << f;
    out[key.str()] = std::move(per_k);
  }
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

int run_bench_noise(CommonFlags& common, const std::string& benchmark_path,
                    const std::string& kind, const std::string& range_csv, double rate,
                    std::uint64_t seed, const std::string& out_path) {
  common.load();
  const auto& vocab = lsa::Vocabulary::action_genome();
  std::vector<lsa::LsaInstance> instances = lsa::load_benchmark(benchmark_path, vocab);
  lsa::NoiseSpec spec;
  spec.kind = kind == "drop" ? lsa::NoiseKind::drop : lsa::NoiseKind::modify;
  if (kind != "drop" && kind != "modify") {
    std::cerr << "unknown noise kind: " << kind << "\n";
    return kExitValidation;
  }
  const std::vector<double> range = parse_fraction_list(range_csv);
  if (range.size() != 2) {
    std::cerr << "--range expects lo,hi\n";
    return kExitValidation;
  }
  spec.range_lo = range[0];
  spec.range_hi = range[1];
  spec.rate = rate;

  std::vector<lsa::LsaInstance> noisy;
  int changed = 0, observed = 0, warned = 0;
  std::uint64_t index = 0;
  for (const auto& instance : instances) {
    lsa::NoiseSpec per = spec;
    // One derived stream per instance so every instance gets independent
    // draws from the same base seed.
    per.seed = seed + index++;
    lsa::NoiseResult result = lsa::inject_noise(instance, per, vocab);
    if (result.no_frames_in_range) ++warned;
    changed += result.frames_changed;
    observed += static_cast<int>(result.instance.observed.annotated_ids.size());
    noisy.push_back(std::move(result.instance));
  }
  lsa::save_benchmark(out_path, noisy);
  lsa::write_manifest(out_path, "bench noise", common.config,
                      {{"benchmark", benchmark_path}});
  const double measured = observed == 0 ? 0.0 : static_cast<double>(changed) / observed;
  std::cerr << "instances " << noisy.size() << ", frames changed " << changed
            << ", measured frame error rate " << measured << ", empty-range warnings "
            << warned << "\n";
  std::cout << json{{"kind", kind},
                    {"range", range_csv},
                    {"nominal_rate", rate},
                    {"measured_frame_error_rate", measured},
                    {"seed", seed}}
                   .dump(2)
            << "\n";
  return kExitOk;
}

int run_prompt_render(CommonFlags& common, const std::string& benchmark_path,
                      const std::string& video_id, double fraction,
                      const std::string& mode, const std::string& object, bool one_shot,
                      std::size_t budget, const std::string& out_path) {
  common.load();
  const auto& vocab = lsa::Vocabulary::action_genome();
  std::vector<lsa::LsaInstance> instances = lsa::load_benchmark(benchmark_path, vocab);
  const lsa::LsaInstance* instance = nullptr;
  for (const auto& candidate : instances) {
    if (candidate.video_id == video_id &&
        std::abs(candidate.fraction - fraction) <= 1e-9) {
      instance = &candidate;
      break;
    }
  }
  if (instance == nullptr) {
    std::cerr << "no instance for video '" << video_id << "' at fraction " << fraction
              << "\n";
    return kExitValidation;
  }
  lsa::PromptBundle bundle;
  if (mode == "goa") {
    bundle = lsa::build_goa_prompt(instance->observed, instance->future_ids(), vocab,
                                   one_shot);
  } else if (mode == "oora") {
    if (object.empty()) {
      std::cerr << "--object is required for oora prompts\n";
      return kExitValidation;
    }
    bundle = lsa::build_oora_prompt(instance->observed, object, instance->future_ids(),
                                    vocab, one_shot);
  } else {
    std::cerr << "unknown prompt mode: " << mode << "\n";
    return kExitValidation;
  }
  if (budget > 0) bundle = lsa::truncate_to_budget(bundle, budget);
  if (out_path.empty()) {
    std::cout << bundle.text;
  } else {
    lsa::write_file(out_path, bundle.text);
  }
  return kExitOk;
}

int run_anticipate(CommonFlags& common, const std::string& benchmark_path,
                   const std::string& mode, const std::string& mock,
                   std::optional<double> fraction, bool one_shot, int parallelism,
                   const std::string& out_path) {
  common.load();
  if (!mode.empty()) common.config.mode = mode;
  if (!mock.empty()) common.config.mock = mock;
  if (one_shot) common.config.one_shot = true;
  if (parallelism > 0) common.config.parallelism = parallelism;

  const auto& vocab = lsa::Vocabulary::action_genome();
  std::vector<lsa::LsaInstance> instances = lsa::load_benchmark(benchmark_path, vocab);

  lsa::PipelineOptions options;
  options.mode = lsa::anticipation_mode_from_string(common.config.mode);
  options.one_shot = common.config.one_shot;
  options.token_budget = common.config.token_budget;
  options.parallelism = common.config.parallelism;

  std::shared_ptr<lsa::RequestLogger> logger;
  if (!common.config.request_log.empty()) {
    logger = std::make_shared<lsa::RequestLogger>(common.config.request_log);
  }
  std::unique_ptr<lsa::LlmBackend> backend =
      lsa::with_logging(lsa::make_backend(common.config.backend_selector()), logger);

  std::vector<lsa::PredictionRecord> records;
  int external_failures = 0;
  for (const auto& instance : instances) {
    if (fraction && std::abs(instance.fraction - *fraction) > 1e-9) continue;
    try {
      records.push_back(
          lsa::anticipate(instance, *backend, common.config.decode, options, vocab));
      if (!records.back().diagnostics.client_errors.empty()) ++external_failures;
    } catch (const lsa::LlmError& err) {
      std::cerr << instance.video_id << ": " << err.what() << "\n";
      ++external_failures;
    }
  }
  lsa::save_predictions(out_path, records);
  lsa::write_manifest(out_path, "run anticipate", common.config,
                      {{"benchmark", benchmark_path}});
  std::cerr << "instances " << records.size() << ", external failures "
            << external_failures << "\n";
  return external_failures > 0 ? kExitExternal : kExitOk;
}

int run_eval(CommonFlags& common, const std::string& subcommand,
             const std::string& predictions_path, const std::string& benchmark_path,
             const std::string& k_csv, std::optional<double> fraction,
             const std::string& out_path, const std::string& csv_path) {
  common.load();
  const auto& vocab = lsa::Vocabulary::action_genome();
  std::vector<lsa::PredictionRecord> records =
      filter_fraction(lsa::load_predictions(predictions_path, vocab), fraction);
  std::vector<lsa::LsaInstance> truth = lsa::load_benchmark(benchmark_path, vocab);
  const std::vector<int> k_values =
      k_csv.empty() ? common.config.k_values : parse_int_list(k_csv);

  std::ostringstream tables;
  json by_fraction = evaluate_all(records, truth, k_values, tables);
  if (!csv_path.empty()) {
    std::ostringstream csv;
    csv << "fraction,k,recall,mean_recall\n";
    for (const auto& [key, body] : by_fraction.items()) {
      for (int k : k_values) {
        const json& r = body.at("recall").at(std::to_string(k));
        const json& m = body.at("mean_recall").at(std::to_string(k));
        csv << key << ',' << k << ',' << (r.is_null() ? "" : r.dump()) << ','
            << (m.is_null() ? "" : m.dump()) << "\n";
      }
    }
    lsa::write_file(csv_path, csv.str());
  }
  json out{{"metric", subcommand}, {"fractions", std::move(by_fraction)}};
  std::cout << tables.str();
  if (!out_path.empty()) {
    lsa::write_file(out_path, out.dump(2) + "\n");
    lsa::write_manifest(out_path, "eval " + subcommand, common.config,
                        {{"predictions", predictions_path},
                         {"benchmark", benchmark_path}});
  } else {
    std::cout << out.dump(2) << "\n";
  }
  return kExitOk;
}

int run_eval_robustness(CommonFlags& common, const std::string& clean_path,
                        const std::vector<std::string>& noisy_specs,
                        const std::string& out_path) {
  common.load();
  auto load_report = [](const std::string& path, lsa::EvalReport& report) {
    json doc = json::parse(lsa::read_file(path));
    const json& fractions = doc.at("fractions");
    if (fractions.empty()) throw std::runtime_error(path + ": no fractions in report");
    const json& body = fractions.begin().value();
    for (const auto& [key, value] : body.at("recall").items()) {
      report.k_values.push_back(std::stoi(key));
      report.recall[std::stoi(key)] =
          value.is_null() ? std::nullopt : std::optional<double>(value.get<double>());
    }
  };
  lsa::EvalReport clean;
  load_report(clean_path, clean);

  std::vector<std::pair<lsa::RobustnessRow, lsa::EvalReport>> noisy;
  for (const auto& spec : noisy_specs) {
    // kind,range,rate,path
    const std::vector<std::string> parts = lsa::split(spec, ',');
    if (parts.size() != 4) {
      std::cerr << "--noisy expects kind,range,rate,path: " << spec << "\n";
      return kExitValidation;
    }
    lsa::RobustnessRow row;
    row.kind = parts[0];
    row.range = parts[1];
    row.rate = std::stod(parts[2]);
    lsa::EvalReport report;
    load_report(parts[3], report);
    noisy.emplace_back(std::move(row), std::move(report));
  }
  lsa::RobustnessTable table = lsa::robustness_delta(clean, noisy);
  std::cout << lsa::robustness_to_table(table);
  if (!out_path.empty()) {
    lsa::write_file(out_path, lsa::robustness_to_json(table).dump(2) + "\n");
  } else {
    std::cout << lsa::robustness_to_json(table).dump(2) << "\n";
  }
  return kExitOk;
}

int run_loss_score_transitions(CommonFlags& common, const std::string& predictions_path,
                               const std::string& benchmark_path, double tau,
                               bool tau_gate, double delta, const std::string& out_path) {
  common.load();
  const auto& vocab = lsa::Vocabulary::action_genome();
  std::vector<lsa::PredictionRecord> records =
      lsa::load_predictions(predictions_path, vocab);
  std::vector<lsa::LsaInstance> truth = lsa::load_benchmark(benchmark_path, vocab);

  std::vector<lsa::FramePair> pairs;
  for (double fraction : lsa::fractions_in(records)) {
    for (const auto& video : lsa::pair_records(records, truth, fraction)) {
      pairs.push_back(lsa::FramePair{video.predicted, video.truth});
    }
  }
  lsa::LossConfig config = common.config.loss;
  config.tau = tau;
  config.tau_gate = tau_gate;
  config.delta = delta;
  lsa::TransitionScoreReport report =
      lsa::score_transition_consistency(pairs, vocab, config);
  json out{{"aggregate", report.aggregate},
           {"tracks", report.tracks},
           {"no_valid_relations", report.no_valid_relations},
           {"per_relation", report.per_relation},
           {"tau", tau},
           {"tau_gate", tau_gate},
           {"delta", delta}};
  std::cout << "aggregate " << report.aggregate << " over " << report.tracks
            << " tracks\n";
  if (!out_path.empty()) {
    lsa::write_file(out_path, out.dump(2) + "\n");
  } else {
    std::cout << out.dump(2) << "\n";
  }
  return kExitOk;
}

int run_loss_export_weights(CommonFlags& common, int n, int t_end, double beta,
                            const std::string& counts_csv, const std::string& out_path) {
  common.load();
  const std::vector<int> counts = parse_int_list(counts_csv);
  lsa::TokenWeightExport weights = lsa::export_token_weights(n, t_end, beta, counts);
  json graphs = json::array();
  for (std::size_t i = 0; i < weights.graph_weights.size(); ++i) {
    graphs.push_back(json{{"t", n + 1 + static_cast<int>(i)},
                          {"weight", weights.graph_weights[i]},
                          {"token_count", weights.token_counts[i]}});
  }
  const lsa::ExternalTrainerDefaults trainer;
  json out{{"n", weights.n},
           {"t_end", weights.t_end},
           {"beta", weights.beta},
           {"graphs", std::move(graphs)},
           {"per_token_weights", weights.per_token_weights},
           {"normalizer", weights.normalizer},
           {"trainer_defaults",
            {{"lora_rank", trainer.lora_rank},
             {"lora_alpha", trainer.lora_alpha},
             {"learning_rate", trainer.learning_rate},
             {"batch_size", trainer.batch_size},
             {"goa_epochs", trainer.goa_epochs},
             {"oora_epochs", trainer.oora_epochs},
             {"context_tokens", trainer.context_tokens}}}};
  if (!out_path.empty()) {
    lsa::write_file(out_path, out.dump(2) + "\n");
  } else {
    std::cout << out.dump(2) << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linguistic scene-graph anticipation toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // lets --config appear before or after the subcommand
  CommonFlags common;
  app.add_option("--config", common.config_path, "Run-config JSON file");

  // bench
  auto* bench = app.add_subcommand("bench", "Benchmark construction and analysis");
  bench->require_subcommand(1);

  std::string corpus_path, fractions_csv, split = "test", out_path, stats_path;
  auto* bench_build = bench->add_subcommand("build", "Build LSA instances from a corpus");
  bench_build->add_option("--corpus", corpus_path, "Interchange corpus JSON")->required();
  bench_build->add_option("--fractions", fractions_csv, "Observation fractions, comma separated");
  bench_build->add_option("--split", split, "Corpus split to keep (default test; 'all' keeps every video)");
  bench_build->add_option("--out", out_path, "Benchmark JSONL output")->required();
  bench_build->add_option("--stats", stats_path, "Optional stats JSON output");

  std::string stats_benchmark;
  std::optional<double> stats_fraction;
  std::string stats_out;
  auto* bench_stats = bench->add_subcommand("stats", "Dataset statistics and object dynamics");
  bench_stats->add_option("--benchmark", stats_benchmark, "Benchmark JSONL")->required();
  bench_stats->add_option("--fraction", stats_fraction, "Restrict to one fraction");
  bench_stats->add_option("--out", stats_out, "Stats JSON output");

  std::string oracle_benchmark, oracle_k;
  std::optional<double> oracle_fraction;
  auto* bench_oracle = bench->add_subcommand("oracle", "Continuous-object ceiling");
  bench_oracle->add_option("--benchmark", oracle_benchmark, "Benchmark JSONL")->required();
  bench_oracle->add_option("--k", oracle_k, "K values, comma separated");
  bench_oracle->add_option("--fraction", oracle_fraction, "Restrict to one fraction");

  std::string noise_benchmark, noise_kind, noise_range = "0,1", noise_out;
  double noise_rate = 0;
  std::uint64_t noise_seed = 0;
  auto* bench_noise = bench->add_subcommand("noise", "Perturb observed prefixes");
  bench_noise->add_option("--benchmark", noise_benchmark, "Benchmark JSONL")->required();
  bench_noise->add_option("--kind", noise_kind, "drop or modify")->required();
  bench_noise->add_option("--range", noise_range, "Fractional range lo,hi of the observed prefix");
  bench_noise->add_option("--rate", noise_rate, "Fraction of in-range frames to perturb")->required();
  bench_noise->add_option("--seed", noise_seed, "RNG seed");
  bench_noise->add_option("--out", noise_out, "Noisy benchmark JSONL")->required();

  // prompt
  auto* prompt = app.add_subcommand("prompt", "Prompt rendering");
  prompt->require_subcommand(1);
  std::string render_benchmark, render_video, render_mode = "goa", render_object, render_out;
  double render_fraction = 0.9;
  bool render_one_shot = false;
  std::size_t render_budget = 0;
  auto* prompt_render = prompt->add_subcommand("render", "Render a GOA or OORA prompt");
  prompt_render->add_option("--benchmark", render_benchmark, "Benchmark JSONL")->required();
  prompt_render->add_option("--video", render_video, "Video id")->required();
  prompt_render->add_option("--fraction", render_fraction, "Observation fraction");
  prompt_render->add_option("--mode", render_mode, "goa or oora");
  prompt_render->add_option("--object", render_object, "Target object (oora)");
  prompt_render->add_flag("--one-shot", render_one_shot, "Include the one-shot example");
  prompt_render->add_option("--budget", render_budget, "Token budget (0 = no truncation)");
  prompt_render->add_option("--out", render_out, "Output file (default stdout)");

  // run
  auto* run = app.add_subcommand("run", "Pipeline execution");
  run->require_subcommand(1);
  std::string anticipate_benchmark, anticipate_mode, anticipate_mock, anticipate_out;
  std::optional<double> anticipate_fraction;
  bool anticipate_one_shot = false;
  int anticipate_parallelism = 0;
  auto* run_anticipate_cmd = run->add_subcommand("anticipate", "Two-stage anticipation");
  run_anticipate_cmd->add_option("--benchmark", anticipate_benchmark, "Benchmark JSONL")->required();
  run_anticipate_cmd->add_option("--mode", anticipate_mode, "with_goa or without_goa");
  run_anticipate_cmd->add_option("--mock", anticipate_mock,
                                 "Backend: echo-last-frame, fixture:<path>, or http");
  run_anticipate_cmd->add_option("--fraction", anticipate_fraction, "Restrict to one fraction");
  run_anticipate_cmd->add_flag("--one-shot", anticipate_one_shot, "One-shot prompting");
  run_anticipate_cmd->add_option("--parallelism", anticipate_parallelism, "Concurrent OORA requests");
  run_anticipate_cmd->add_option("--out", anticipate_out, "Predictions JSONL")->required();

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Evaluation reports");
  eval_cmd->require_subcommand(1);
  std::string eval_predictions, eval_benchmark, eval_k, eval_out, eval_csv;
  std::optional<double> eval_fraction;
  auto add_eval_sub = [&](const char* name, const char* help) {
    auto* sub = eval_cmd->add_subcommand(name, help);
    sub->add_option("--predictions", eval_predictions, "Predictions JSONL")->required();
    sub->add_option("--benchmark", eval_benchmark, "Benchmark JSONL")->required();
    sub->add_option("--k", eval_k, "K values, comma separated");
    sub->add_option("--fraction", eval_fraction, "Restrict to one fraction");
    sub->add_option("--out", eval_out, "Report JSON output");
    sub->add_option("--csv", eval_csv, "Optional CSV output (fraction,k,recall,mean_recall)");
    return sub;
  };
  auto* eval_recall = add_eval_sub("recall", "Recall@K and meanRecall@K");
  auto* eval_objects = add_eval_sub("objects", "Object-set diagnostics");
  auto* eval_relations = add_eval_sub("relations", "Relation accuracy by partition");

  std::string robust_clean, robust_out;
  std::vector<std::string> robust_noisy;
  auto* eval_robustness = eval_cmd->add_subcommand("robustness", "Noise deltas vs clean");
  eval_robustness->add_option("--clean", robust_clean, "Clean report JSON")->required();
  eval_robustness->add_option("--noisy", robust_noisy,
                              "kind,range,rate,report.json (repeatable)")->required();
  eval_robustness->add_option("--out", robust_out, "Robustness JSON output");

  // loss
  auto* loss = app.add_subcommand("loss", "Loss numerics");
  loss->require_subcommand(1);
  std::string score_predictions, score_benchmark, score_out;
  double score_tau = 0.0, score_delta = 0.0;
  bool score_tau_gate = false;
  auto* loss_score = loss->add_subcommand(
      "score-transitions", "Transition-consistency of hard predictions (lower is smoother)");
  loss_score->add_option("--predictions", score_predictions, "Predictions JSONL")->required();
  loss_score->add_option("--benchmark", score_benchmark, "Benchmark JSONL")->required();
  loss_score->add_option("--tau", score_tau, "Probability-change gate threshold");
  loss_score->add_flag("--tau-gate", score_tau_gate,
                       "Enable the literal tau gate (off by default for hard labels)");
  loss_score->add_option("--delta", score_delta, "Minimum ground-truth transition mass");
  loss_score->add_option("--out", score_out, "Score JSON output");

  int weights_n = 0, weights_t_end = 0;
  double weights_beta = 0.5;
  std::string weights_counts, weights_out;
  auto* loss_weights = loss->add_subcommand("export-weights",
                                            "Per-token cosine weights for external trainers");
  loss_weights->add_option("--n", weights_n, "Last observed graph index")->required();
  loss_weights->add_option("--t-end", weights_t_end, "Last future graph index T")->required();
  loss_weights->add_option("--beta", weights_beta, "Cosine mix");
  loss_weights->add_option("--token-counts", weights_counts,
                           "K_t per future graph, comma separated")->required();
  loss_weights->add_option("--out", weights_out, "Weight JSON output");

  CLI11_PARSE(app, argc, argv);

  try {
    if (bench_build->parsed()) {
      return run_bench_build(common, corpus_path, fractions_csv, split == "all" ? "" : split,
                             out_path, stats_path);
    }
    if (bench_stats->parsed()) {
      return run_bench_stats(common, stats_benchmark, stats_fraction, stats_out);
    }
    if (bench_oracle->parsed()) {
      return run_bench_oracle(common, oracle_benchmark, oracle_k, oracle_fraction);
    }
    if (bench_noise->parsed()) {
      return run_bench_noise(common, noise_benchmark, noise_kind, noise_range, noise_rate,
                             noise_seed, noise_out);
    }
    if (prompt_render->parsed()) {
      return run_prompt_render(common, render_benchmark, render_video, render_fraction,
                               render_mode, render_object, render_one_shot, render_budget,
                               render_out);
    }
    if (run_anticipate_cmd->parsed()) {
      return run_anticipate(common, anticipate_benchmark, anticipate_mode, anticipate_mock,
                            anticipate_fraction, anticipate_one_shot,
                            anticipate_parallelism, anticipate_out);
    }
    if (eval_recall->parsed() || eval_objects->parsed() || eval_relations->parsed()) {
      const std::string name = eval_recall->parsed()   ? "recall"
                               : eval_objects->parsed() ? "objects"
                                                        : "relations";
      return run_eval(common, name, eval_predictions, eval_benchmark, eval_k,
                      eval_fraction, eval_out, eval_csv);
    }
    if (eval_robustness->parsed()) {
      return run_eval_robustness(common, robust_clean, robust_noisy, robust_out);
    }
    if (loss_score->parsed()) {
      return run_loss_score_transitions(common, score_predictions, score_benchmark,
                                        score_tau, score_tau_gate, score_delta, score_out);
    }
    if (loss_weights->parsed()) {
      return run_loss_export_weights(common, weights_n, weights_t_end, weights_beta,
                                     weights_counts, weights_out);
    }
  } catch (const lsa::LlmError& err) {
    std::cerr << "external service error (" << lsa::to_string(err.kind())
              << "): " << err.what() << "\n";
    return kExitExternal;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}
