// Acceptance suite: one self-contained check per criterion, each printing a
// single PASS/FAIL line. Exit code is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

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
#include "support/generators.hpp"
#include "support/oracles.hpp"
#include "support/paths.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lsa;

namespace {

struct Check {
  std::vector<std::string> failures;
  void expect(bool condition, const std::string& message) {
    if (!condition) failures.push_back(message);
  }
  void near(double actual, double expected, double tolerance, const std::string& label) {
    if (!(std::abs(actual - expected) <= tolerance)) {
      std::ostringstream out;
      out.precision(17);
      out << label << ": " << actual << " != " << expected << " (tol " << tolerance << ")";
      failures.push_back(out.str());
    }
  }
  void exact(double actual, double expected, const std::string& label) {
    if (actual != expected) {
      std::ostringstream out;
      out.precision(17);
      out << label << ": " << actual << " != " << expected << " (exact)";
      failures.push_back(out.str());
    }
  }
};

const Vocabulary& vocab() { return Vocabulary::action_genome(); }

LsaInstance sweep_instance() {
  auto corpus = load_corpus(testsupport::data_path("corpus_sweep.json"), vocab());
  auto instances = build_benchmark(corpus, {0.9});
  if (instances.size() != 1) throw std::runtime_error("fixture corpus must yield 1 instance");
  return instances[0];
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// ---------------------------------------------------------------- criterion 1

void criterion_prompt_fidelity(Check& check) {
  const auto start = std::chrono::steady_clock::now();
  LsaInstance instance = sweep_instance();
  const std::vector<int> future = instance.future_ids();

  const std::vector<std::pair<std::string, std::string>> cases = {
      {"golden/goa_zeroshot.txt",
       build_goa_prompt(instance.observed, future, vocab(), false).text},
      {"golden/goa_oneshot.txt",
       build_goa_prompt(instance.observed, future, vocab(), true).text},
      {"golden/oora_floor_zeroshot.txt",
       build_oora_prompt(instance.observed, "floor", future, vocab(), false).text},
      {"golden/oora_floor_oneshot.txt",
       build_oora_prompt(instance.observed, "floor", future, vocab(), true).text},
      {"golden/oora_broom_zeroshot.txt",
       build_oora_prompt(instance.observed, "broom", future, vocab(), false).text},
      {"golden/oora_broom_oneshot.txt",
       build_oora_prompt(instance.observed, "broom", future, vocab(), true).text},
  };
  for (const auto& [golden, rendered] : cases) {
    check.expect(rendered == testsupport::read_golden(golden),
                 "prompt differs from " + golden);
  }
  check.expect(seconds_since(start) < 1.0, "prompt rendering exceeded 1 s");
}

// ---------------------------------------------------------------- criterion 2

void criterion_parse_fidelity(Check& check) {
  const std::vector<int> future{486, 499, 518};
  const std::vector<std::string> both{"floor", "broom"};

  for (const char* file : {"responses/goa_gpt4o_mini.txt", "responses/goa_gpt4o.txt",
                           "responses/goa_deepseek_v3.txt"}) {
    GoaPrediction p = parse_goa_response(testsupport::read_golden(file), future, vocab());
    check.expect(!p.total_failure, std::string(file) + ": unexpected total failure");
    for (int frame : future) {
      check.expect(p.objects_by_frame.at(frame) == both,
                   std::string(file) + ": wrong objects at frame " + std::to_string(frame));
    }
  }
  GoaPrediction finetuned =
      parse_goa_response(testsupport::read_golden("responses/goa_finetuned.txt"), future, vocab());
  check.expect(finetuned.objects_by_frame.at(486) == both, "fine-tuned goa: frame 486");
  check.expect(finetuned.objects_by_frame.at(499) == both, "fine-tuned goa: frame 499");
  check.expect(finetuned.objects_by_frame.at(518) ==
                   std::vector<std::string>{"floor", "broom", "doorway"},
               "fine-tuned goa: doorway missing at 518");

  struct OoraCase {
    const char* file;
    const char* object;
    std::vector<std::array<const char*, 3>> rows;  // attn, spat, cont per frame
  };
  const std::vector<OoraCase> cases = {
      {"responses/oora_floor_gpt4o_mini.txt", "floor",
       {{"looking_at", "beneath,in_front_of", "standing_on"},
        {"not_looking_at", "beneath,in_front_of", "standing_on"},
        {"unsure", "beneath,in_front_of", "standing_on"}}},
      {"responses/oora_broom_gpt4o_mini.txt", "broom",
       {{"not_looking_at", "in_front_of", "holding"},
        {"looking_at", "in_front_of", "holding"},
        {"looking_at", "on_the_side_of", "holding"}}},
      {"responses/oora_floor_gpt4o.txt", "floor",
       {{"looking_at", "beneath,in_front_of", "standing_on"},
        {"looking_at", "beneath,in_front_of", "standing_on"},
        {"looking_at", "beneath,in_front_of", "standing_on"}}},
      {"responses/oora_broom_gpt4o.txt", "broom",
       {{"looking_at", "in_front_of", "not_contacting"},
        {"looking_at", "in_front_of", "holding"},
        {"not_looking_at", "in_front_of", "holding"}}},
      {"responses/oora_floor_deepseek_v3.txt", "floor",
       {{"looking_at", "beneath,in_front_of", "standing_on"},
        {"looking_at", "beneath,in_front_of", "standing_on"},
        {"looking_at", "beneath,in_front_of", "standing_on"}}},
      {"responses/oora_broom_deepseek_v3.txt", "broom",
       {{"looking_at", "in_front_of", "holding"},
        {"looking_at", "in_front_of", "holding"},
        {"not_looking_at", "in_front_of", "not_contacting"}}},
      {"responses/oora_floor_finetuned.txt", "floor",
       {{"looking_at", "beneath,in_front_of", "standing_on"},
        {"looking_at", "beneath", "standing_on"},
        {"looking_at", "beneath", "standing_on"}}},
      {"responses/oora_broom_finetuned.txt", "broom",
       {{"not_looking_at", "on_the_side_of", "holding"},
        {"not_looking_at", "on_the_side_of", "holding"},
        {"not_looking_at", "on_the_side_of", "holding"}}},
  };
  for (const auto& c : cases) {
    OoraPrediction p =
        parse_oora_response(testsupport::read_golden(c.file), c.object, future, vocab());
    check.expect(!p.total_failure, std::string(c.file) + ": unexpected total failure");
    if (p.states_by_frame.size() != 3) {
      check.expect(false, std::string(c.file) + ": expected 3 frames");
      continue;
    }
    std::size_t row = 0;
    for (const auto& [frame, state] : p.states_by_frame) {
      check.expect(join(state.attention, ",") == c.rows[row][0] &&
                       join(state.spatial, ",") == c.rows[row][1] &&
                       join(state.contact, ",") == c.rows[row][2],
                   std::string(c.file) + ": relations differ at frame " +
                       std::to_string(frame));
      ++row;
    }
  }
  OoraPrediction doorway = parse_oora_response(
      testsupport::read_golden("responses/oora_doorway_finetuned.txt"), "doorway", {518}, vocab());
  check.expect(doorway.states_by_frame.size() == 1 &&
                   doorway.states_by_frame.count(518) == 1,
               "doorway block must map to frame 518 only");
}

// ---------------------------------------------------------------- criterion 3

void criterion_loss_numerics(Check& check) {
  check.near(cosine_weight(1, 0, 10, 0.5), 1.5, 1e-12, "w(n+1) at beta=0.5");
  check.near(cosine_weight(10, 0, 10, 0.5), 0.5, 1e-12, "w(T) at beta=0.5");
  for (double beta : {0.0, 0.3, 0.8, 1.0}) {
    check.near(cosine_weight(1, 0, 9, beta), 1.0 + beta, 1e-12, "w(n+1) = 1+beta");
    check.near(cosine_weight(9, 0, 9, beta), 1.0 - beta, 1e-12, "w(T) = 1-beta");
  }

  const std::vector<std::vector<double>> losses{{1.0, 1.0}, {2.0}};
  check.near(goa_weighted_loss(losses, 0, 2, 0.5), 8.0 / 7.0, 1e-12,
             "weighted-loss fixture 8/7");

  // Histogram fixture [[0.4,0.1],[0.1,0.4]] against uniform 0.25, natural
  // log. Independent scalar evaluation of the two KL sums gives
  // 0.20794415416798363; asserted at the stated 1e-6 tolerance.
  double scalar = 0;
  {
    const double p[4] = {0.4, 0.1, 0.1, 0.4};
    const double q[4] = {0.25, 0.25, 0.25, 0.25};
    double forward = 0, backward = 0;
    for (int i = 0; i < 4; ++i) {
      forward += p[i] * std::log(p[i] / q[i]);
      backward += q[i] * std::log(q[i] / p[i]);
    }
    scalar = 0.5 * (forward + backward);
  }
  check.near(scalar, 0.20794415416798363, 1e-12, "scalar transition-KL oracle");
  const TransitionMatrix pred{{{0.4, 0.1}, {0.1, 0.4}}};
  const TransitionMatrix real{{{0.25, 0.25}, {0.25, 0.25}}};
  check.near(symmetric_kl_divergence(pred, real, 1e-9), scalar, 1e-6,
             "transition_loss symmetric-KL fixture");

  const double p95[1] = {0.95};
  const double p70[1] = {0.7};
  const double p60[1] = {0.6};
  const int pos[1] = {1};
  const int neg[1] = {0};
  check.exact(threshold_margin_loss(p95, pos, 0.9, 0.5), 0.0, "threshold p>gamma_pos");
  check.near(threshold_margin_loss(p70, neg, 0.9, 0.5), 0.2, 1e-15, "threshold fixture 0.2");
  check.near(threshold_margin_loss(p60, pos, 0.9, 0.5), 0.3, 1e-15, "threshold fixture 0.3");

  const double half[1] = {0.5};
  check.near(bce(half, pos), std::log(2.0), 1e-12, "bce(0.5, 1) = ln 2");
}

// ---------------------------------------------------------------- criterion 4

void criterion_gradient_checks(Check& check) {
  const auto start = std::chrono::steady_clock::now();
  testsupport::GraphGenerator gen(987654321);
  LossConfig config;
  config.tau_gate = false;

  auto relative_ok = [](double analytic, double fd) {
    const double scale = std::max({std::abs(analytic), std::abs(fd), 1e-6});
    return std::abs(analytic - fd) / scale <= 1e-5;
  };
  auto central = [](const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2 * h);
  };

  int failures = 0;
  for (int instance = 0; instance < 100; ++instance) {
    const int n = gen.uniform(2, 12);
    std::vector<double> p;
    std::vector<int> y;
    for (int i = 0; i < n; ++i) {
      double value = gen.uniform(100, 880) / 1000.0;
      if (std::abs(value - 0.5) < 0.02) value += 0.05;  // stay off the hinge kink
      p.push_back(value);
      y.push_back(gen.uniform(0, 1));
    }
    const std::vector<double> grad_b = bce_gradient(p, y);
    const std::vector<double> grad_t = threshold_margin_gradient(p, y, 0.9, 0.5);
    for (int i = 0; i < n; ++i) {
      const double fd_b = central(
          [&](double v) {
            std::vector<double> q = p;
            q[static_cast<std::size_t>(i)] = v;
            return bce(q, y);
          },
          p[static_cast<std::size_t>(i)], 1e-6);
      if (!relative_ok(grad_b[static_cast<std::size_t>(i)], fd_b)) ++failures;
      const double fd_t = central(
          [&](double v) {
            std::vector<double> q = p;
            q[static_cast<std::size_t>(i)] = v;
            return threshold_margin_loss(q, y, 0.9, 0.5);
          },
          p[static_cast<std::size_t>(i)], 1e-7);
      if (!relative_ok(grad_t[static_cast<std::size_t>(i)], fd_t)) ++failures;
    }

    RelationTrack track;
    const int length = gen.uniform(3, 9);
    for (int i = 0; i < length; ++i) {
      track.truth.push_back(gen.uniform(0, 1));
      track.prob.push_back(gen.uniform(100, 900) / 1000.0);
    }
    std::vector<RelationTrack> tracks{track};
    const std::vector<std::vector<double>> grad = transition_loss_gradient(tracks, config);
    for (int i = 0; i < length; ++i) {
      const double fd = central(
          [&](double v) {
            std::vector<RelationTrack> perturbed{track};
            perturbed[0].prob[static_cast<std::size_t>(i)] = v;
            return transition_loss(perturbed, config).value;
          },
          track.prob[static_cast<std::size_t>(i)], 1e-6);
      if (!relative_ok(grad[0][static_cast<std::size_t>(i)], fd)) ++failures;
    }
  }
  check.expect(failures == 0,
               std::to_string(failures) + " gradient components outside 1e-5 relative");
  check.expect(seconds_since(start) < 10.0, "gradient checks exceeded 10 s");
}

// ---------------------------------------------------------------- criterion 5

void criterion_metric_oracle(Check& check) {
  testsupport::GraphGenerator gen(555000111);
  // four relation classes spanning the three partitions
  const std::vector<std::pair<std::string, RelationKind>> classes{
      {"looking_at", RelationKind::attention},
      {"beneath", RelationKind::spatial},
      {"holding", RelationKind::contact},
      {"touching", RelationKind::contact}};
  const std::vector<std::string> names{"broom", "table", "floor"};

  auto random_frame = [&](int id) {
    FrameGraph g;
    g.frame_id = id;
    int budget = 6;  // at most 6 triples per frame
    const int objects = gen.uniform(0, 2);
    for (int i = 0; i <= objects && budget > 0; ++i) {
      ObjectState state;
      state.name = names[static_cast<std::size_t>(i)];
      for (const auto& [relation, kind] : classes) {
        if (budget > 0 && gen.uniform(0, 1) == 1) {
          state.relations(kind).push_back(relation);
          --budget;
        }
      }
      if (!state.attention.empty() || !state.spatial.empty() || !state.contact.empty()) {
        g.objects.push_back(std::move(state));
      }
    }
    return g;
  };

  int mismatches = 0;
  for (int instance = 0; instance < 1000; ++instance) {
    std::vector<VideoFrames> videos;
    const int video_count = gen.uniform(1, 2);
    for (int v = 0; v < video_count; ++v) {
      VideoFrames video;
      const int frames = gen.uniform(1, 5);
      for (int i = 0; i < frames; ++i) {
        video.truth.push_back(random_frame(i));
        video.predicted.push_back(random_frame(i));
      }
      videos.push_back(std::move(video));
    }
    for (int k : {1, 2, 5, 10}) {
      const auto fast = recall_at_k(videos, k);
      const auto brute = testsupport::brute_recall_at_k(videos, k);
      if (fast.has_value() != brute.has_value() || (fast && brute && *fast != *brute)) {
        ++mismatches;
      }
      const auto fast_m = mean_recall_at_k(videos, k);
      const auto brute_m = testsupport::brute_mean_recall_at_k(videos, k);
      if (fast_m.has_value() != brute_m.has_value() ||
          (fast_m && brute_m && *fast_m != *brute_m)) {
        ++mismatches;
      }
    }
  }
  check.expect(mismatches == 0,
               std::to_string(mismatches) + " recall values differ from the brute force");
}

// ---------------------------------------------------------------- criterion 6

LsaInstance composition_video(int index, int kind) {
  // kind 0: consistent (12 future triples on the persistent object)
  // kind 1: new object (8 persistent + 4 on an unseen object)
  // kind 2: disappearance (6 persistent triples, one observed object gone)
  const Vocabulary& v = Vocabulary::action_genome();
  auto with_contacts = [&](const std::string& name, int count) {
    ObjectState state;
    state.name = name;
    state.attention = {"looking_at"};
    state.spatial = {"beneath"};
    for (int i = 0; i < count - 2; ++i) {
      state.contact.push_back(v.contact_relations()[static_cast<std::size_t>(i)]);
    }
    return state;
  };
  std::vector<FrameGraph> observed;
  for (int i = 0; i < 4; ++i) {
    FrameGraph g;
    g.frame_id = i;
    g.objects.push_back(with_contacts("table", 3));
    if (kind == 2) g.objects.push_back(with_contacts("pillow", 3));
    observed.push_back(std::move(g));
  }
  FrameGraph future;
  future.frame_id = 4;
  if (kind == 0) {
    future.objects.push_back(with_contacts("table", 12));
  } else if (kind == 1) {
    future.objects.push_back(with_contacts("table", 8));
    future.objects.push_back(with_contacts("shelf", 4));
  } else {
    future.objects.push_back(with_contacts("table", 6));
  }
  LsaInstance instance;
  instance.video_id = "comp_" + std::to_string(index);
  instance.fraction = 0.9;
  instance.observed = merge_sequence(observed, instance.video_id);
  instance.future = merge_sequence({future}, instance.video_id);
  return instance;
}

void criterion_oracle_consistency(Check& check) {
  // random corpora: the ceiling equals recall over explicit oracle
  // predictions (perfect relations, last-frame objects only)
  testsupport::GraphGenerator gen(181818);
  for (int round = 0; round < 50; ++round) {
    std::vector<LsaInstance> instances;
    std::vector<VideoFrames> videos;
    const int count = gen.uniform(1, 4);
    for (int v = 0; v < count; ++v) {
      std::vector<FrameGraph> frames = gen.frame_run(gen.uniform(3, 8));
      if (frames.size() < 3) continue;
      const std::size_t boundary = frames.size() - std::max<std::size_t>(1, frames.size() / 3);
      LsaInstance instance;
      instance.video_id = "r" + std::to_string(v);
      instance.fraction = 0.7;
      instance.observed = merge_sequence(
          std::vector<FrameGraph>(frames.begin(), frames.begin() + static_cast<long>(boundary)));
      instance.future = merge_sequence(
          std::vector<FrameGraph>(frames.begin() + static_cast<long>(boundary), frames.end()));
      if (instance.observed.empty() || instance.future.empty()) continue;

      VideoFrames video;
      video.video_id = instance.video_id;
      video.truth = expand_sequence(instance.future);
      std::set<std::string> persistent;
      for (const auto& obj : instance.observed.last_segment()->graph.objects) {
        persistent.insert(obj.name);
      }
      for (const FrameGraph& truth : video.truth) {
        FrameGraph predicted;
        predicted.frame_id = truth.frame_id;
        for (const auto& obj : truth.objects) {
          if (persistent.count(obj.name) != 0) predicted.objects.push_back(obj);
        }
        video.predicted.push_back(std::move(predicted));
      }
      instances.push_back(std::move(instance));
      videos.push_back(std::move(video));
    }
    if (instances.empty()) continue;
    for (int k : {1, 5, 10, 50}) {
      const auto ceiling = oracle_ceiling(instances, k);
      const auto recall = recall_at_k(videos, k);
      check.expect(ceiling.has_value() == recall.has_value(),
                   "ceiling/recall disagree on scorability");
      if (ceiling && recall) {
        check.exact(*ceiling, *recall, "ceiling vs oracle-prediction recall");
      }
    }
  }

  // the published composition: 61 consistent / 14 new / 25 disappeared
  std::vector<LsaInstance> corpus;
  int index = 0;
  for (int i = 0; i < 61; ++i) corpus.push_back(composition_video(index++, 0));
  for (int i = 0; i < 14; ++i) corpus.push_back(composition_video(index++, 1));
  for (int i = 0; i < 25; ++i) corpus.push_back(composition_video(index++, 2));

  const ObjectDynamicsStats dynamics = compute_object_dynamics(corpus);
  check.near(dynamics.consistent_rate, 0.61, 1e-12, "consistent rate");
  check.near(dynamics.new_object_rate, 0.14, 1e-12, "new-object rate");
  check.near(dynamics.disappeared_rate, 0.25, 1e-12, "disappeared rate");

  const auto ceiling = oracle_ceiling(corpus, 10);
  check.expect(ceiling.has_value(), "composition corpus must be scorable");
  const double expected =
      (61.0 * (10.0 / 12.0) + 14.0 * (8.0 / 12.0) + 25.0 * 1.0) / 100.0;
  check.near(ceiling.value_or(-1), expected, 1e-9, "composition ceiling 511/600");
  check.expect(ceiling.value_or(2) < 1.0, "composition ceiling must be below 1");
}

// ---------------------------------------------------------------- criterion 7

void criterion_round_trip(Check& check) {
  testsupport::GraphGenerator gen(24681012);
  int round_trip_failures = 0;
  for (int i = 0; i < 10000; ++i) {
    FrameGraph g = gen.frame(gen.uniform(0, 100000));
    const auto parsed = parse_frame_text(serialize_frame(g, vocab()), vocab());
    if (parsed.size() != 1 || !(parsed[0].graph == g) || parsed[0].start != g.frame_id) {
      ++round_trip_failures;
    }
  }
  check.expect(round_trip_failures == 0,
               std::to_string(round_trip_failures) + " serialize/parse round trips failed");

  int merge_failures = 0;
  for (int i = 0; i < 400; ++i) {
    const std::vector<FrameGraph> frames = gen.frame_run(gen.uniform(0, 14));
    const GraphSequence merged = merge_sequence(frames);
    const std::vector<FrameGraph> expanded = expand_sequence(merged);
    if (expanded.size() != frames.size()) {
      ++merge_failures;
      continue;
    }
    for (std::size_t f = 0; f < frames.size(); ++f) {
      if (expanded[f].frame_id != frames[f].frame_id ||
          !expanded[f].same_content(frames[f])) {
        ++merge_failures;
      }
    }
    const GraphSequence again = merge_sequence(expanded);
    if (again.segments.size() != merged.segments.size()) ++merge_failures;
    for (std::size_t s = 1; s < merged.segments.size(); ++s) {
      if (merged.segments[s - 1].graph.same_content(merged.segments[s].graph)) {
        ++merge_failures;  // merging must be maximal
      }
    }
  }
  check.expect(merge_failures == 0,
               std::to_string(merge_failures) + " merge/expand property failures");

  // edge cases: empty frame, single frame
  FrameGraph empty;
  empty.frame_id = 3;
  check.expect(serialize_frame(empty, vocab()) == "Frame 3:", "empty frame header");
  const auto parsed_empty = parse_frame_text("Frame 3:", vocab());
  check.expect(parsed_empty.size() == 1 && parsed_empty[0].graph.objects.empty(),
               "empty frame parse");
  const GraphSequence single = merge_sequence({gen.frame(17)});
  check.expect(single.segments.size() == 1 && expand_sequence(single).size() == 1,
               "single-frame merge/expand");
  check.expect(merge_sequence({}).segments.empty(), "empty merge");
}

// ---------------------------------------------------------------- criterion 8

struct CliRun {
  int exit_code = -1;
  std::string stdout_text;
};

CliRun run_cli(const fs::path& dir, const std::string& args) {
  const fs::path out = dir / "stdout.txt";
  const fs::path err = dir / "stderr.txt";
  const std::string command = std::string(testsupport::cli_path()) + " " + args + " > " +
                              out.string() + " 2> " + err.string();
  CliRun run;
  run.exit_code = WEXITSTATUS(std::system(command.c_str()));
  run.stdout_text = read_file(out.string());
  return run;
}

void criterion_end_to_end(Check& check) {
  const auto start = std::chrono::steady_clock::now();
  const fs::path dir = fs::temp_directory_path() / "lsa_acceptance_e2e";
  fs::create_directories(dir);

  // 20 videos, 10 annotated frames each, split 0.5: videos 0..9 keep the
  // last observed graph through the future (echo recall 1), videos 10..19
  // flip the attention relation in every future frame (echo recall 2/3).
  std::vector<VideoRecord> corpus;
  for (int v = 0; v < 20; ++v) {
    VideoRecord video;
    video.video_id = "e2e_" + std::to_string(v);
    video.split = "test";
    for (int i = 0; i < 10; ++i) {
      FrameGraph g;
      g.frame_id = i;
      const bool flipped = v >= 10 && i >= 5;
      g.objects.push_back(ObjectState{"broom",
                                      {flipped ? "not_looking_at" : "looking_at"},
                                      {"in_front_of"},
                                      {"holding"},
                                      std::nullopt});
      video.frames.push_back(std::move(g));
    }
    corpus.push_back(std::move(video));
  }
  const std::string corpus_path = (dir / "corpus.json").string();
  save_corpus(corpus_path, corpus);

  const std::string bench = (dir / "bench.jsonl").string();
  const std::string preds = (dir / "preds.jsonl").string();
  const std::string report = (dir / "report.json").string();
  check.expect(run_cli(dir, "bench build --corpus " + corpus_path +
                                " --fractions 0.5 --out " + bench)
                       .exit_code == 0,
               "bench build failed");
  check.expect(run_cli(dir, "run anticipate --benchmark " + bench +
                                " --mock echo-last-frame --mode without_goa --out " + preds)
                       .exit_code == 0,
               "run anticipate failed");
  check.expect(run_cli(dir, "eval recall --predictions " + preds + " --benchmark " + bench +
                                " --k 10,20,50 --out " + report)
                       .exit_code == 0,
               "eval recall failed");

  // the continuous-object baseline, derived with the same aggregation
  double expected = 0;
  {
    double video_sum = 0;
    for (int v = 0; v < 20; ++v) {
      double frame_sum = 0;
      for (int i = 0; i < 5; ++i) frame_sum += v < 10 ? 1.0 : 2.0 / 3.0;
      video_sum += frame_sum / 5;
    }
    expected = video_sum / 20;
  }
  const json doc = json::parse(read_file(report));
  const json& body = doc.at("fractions").at("0.5");
  for (const char* k : {"10", "20", "50"}) {
    const double actual = body.at("recall").at(k).get<double>();
    check.exact(actual, expected, std::string("R@") + k + " vs continuous-object baseline");
  }
  check.expect(seconds_since(start) < 30.0, "end-to-end run exceeded 30 s");
}

// ---------------------------------------------------------------- criterion 9

void criterion_noise_harness(Check& check) {
  testsupport::GraphGenerator gen(13579);

  // floor-rounded perturbation counts
  for (int frames = 5; frames <= 40; frames += 7) {
    for (double rate : {0.0, 0.15, 0.3, 0.5, 1.0}) {
      std::vector<FrameGraph> observed;
      for (int i = 0; i < frames; ++i) {
        FrameGraph g = gen.frame(i, 3);
        if (g.objects.empty()) {
          g.objects.push_back(
              ObjectState{"table", {"unsure"}, {"behind"}, {"touching"}, std::nullopt});
        }
        observed.push_back(std::move(g));
      }
      LsaInstance instance;
      instance.observed = merge_sequence(observed);
      FrameGraph future;
      future.frame_id = frames + 1;
      future.objects.push_back(
          ObjectState{"broom", {"looking_at"}, {"in"}, {"holding"}, std::nullopt});
      instance.future = merge_sequence({future});

      NoiseSpec spec{NoiseKind::modify, 0.0, 1.0, rate, 99};
      const NoiseResult result = inject_noise(instance, spec, vocab());
      const int expected = static_cast<int>(std::floor(rate * frames));
      check.expect(result.frames_selected == expected,
                   "selected " + std::to_string(result.frames_selected) + " of " +
                       std::to_string(frames) + " at rate " + std::to_string(rate));
    }
  }

  // 10,000 fuzzed frames stay vocabulary-valid; reruns are bit-identical
  int fuzzed_frames = 0;
  std::uint64_t seed = 1;
  std::string first_pass, second_pass;
  while (fuzzed_frames < 10000) {
    std::vector<FrameGraph> observed;
    const int frames = 40;
    for (int i = 0; i < frames; ++i) {
      FrameGraph g = gen.frame(i, 4);
      if (g.objects.empty()) {
        g.objects.push_back(
            ObjectState{"shoe", {"unsure"}, {"behind"}, {"touching"}, std::nullopt});
      }
      observed.push_back(std::move(g));
    }
    LsaInstance instance;
    instance.observed = merge_sequence(observed);
    FrameGraph future;
    future.frame_id = frames + 1;
    future.objects.push_back(
        ObjectState{"broom", {"looking_at"}, {"in"}, {"holding"}, std::nullopt});
    instance.future = merge_sequence({future});

    const NoiseKind kind = (seed % 2 == 0) ? NoiseKind::drop : NoiseKind::modify;
    NoiseSpec spec{kind, 0.0, 1.0, 0.5, seed++};
    const NoiseResult a = inject_noise(instance, spec, vocab());
    const NoiseResult b = inject_noise(instance, spec, vocab());

    std::ostringstream sa, sb;
    for (const FrameGraph& frame : expand_sequence(a.instance.observed)) {
      sa << serialize_frame(frame, vocab()) << '\n';
      ++fuzzed_frames;
      if (find_vocabulary_violation(frame, vocab())) {
        check.expect(false, "vocabulary violation after noise");
      }
    }
    for (const FrameGraph& frame : expand_sequence(b.instance.observed)) {
      sb << serialize_frame(frame, vocab()) << '\n';
    }
    first_pass += sa.str();
    second_pass += sb.str();
    check.expect(a.instance.observed.annotated_ids == instance.observed.annotated_ids,
                 "noise changed frame ids");
  }
  check.expect(first_pass == second_pass, "same-seed noise reruns are not bit-identical");
}

// --------------------------------------------------------------- criterion 10

void criterion_live_smoke(Check& check, bool& skipped) {
  const char* endpoint = std::getenv("LSA_LIVE_ENDPOINT");
  if (endpoint == nullptr || endpoint[0] == '\0') {
    skipped = true;
    return;
  }
  const fs::path dir = fs::temp_directory_path() / "lsa_acceptance_live";
  fs::create_directories(dir);
  std::vector<VideoRecord> corpus;
  for (int v = 0; v < 3; ++v) {
    VideoRecord video;
    video.video_id = "live_" + std::to_string(v);
    video.split = "test";
    for (int i = 0; i < 5; ++i) {
      FrameGraph g;
      g.frame_id = i;
      g.objects.push_back(
          ObjectState{"broom", {"looking_at"}, {"in_front_of"}, {"holding"}, std::nullopt});
      video.frames.push_back(std::move(g));
    }
    corpus.push_back(std::move(video));
  }
  const std::string corpus_path = (dir / "corpus.json").string();
  save_corpus(corpus_path, corpus);
  const std::string bench = (dir / "bench.jsonl").string();
  const std::string preds = (dir / "preds.jsonl").string();
  const std::string report = (dir / "report.json").string();

  RunConfig config;
  config.decode.endpoint = endpoint;
  if (const char* model = std::getenv("LSA_LIVE_MODEL")) config.decode.model = model;
  config.decode.temperature = 0.7;
  config.decode.top_p = 0.4;
  const std::string config_path = (dir / "config.json").string();
  config.save(config_path);

  check.expect(run_cli(dir, "bench build --corpus " + corpus_path +
                                " --fractions 0.5 --out " + bench)
                       .exit_code == 0,
               "bench build failed");
  const CliRun run = run_cli(dir, "--config " + config_path + " run anticipate --benchmark " +
                                      bench + " --mode with_goa --out " + preds);
  check.expect(run.exit_code == 0, "live run anticipate failed");
  check.expect(run_cli(dir, "eval recall --predictions " + preds + " --benchmark " + bench +
                                " --out " + report)
                       .exit_code == 0,
               "eval recall failed");
  const json doc = json::parse(read_file(report));
  check.expect(doc.contains("fractions"), "report is not well-formed");
}

}  // namespace

int main(int argc, char** argv) {
  const int only = argc > 1 ? std::atoi(argv[1]) : 0;
  struct Entry {
    int id;
    const char* label;
    std::function<void(Check&)> body;
  };
  const std::vector<Entry> criteria{
      {1, "golden-prompt fidelity", criterion_prompt_fidelity},
      {2, "golden-parse fidelity", criterion_parse_fidelity},
      {3, "loss numerics", criterion_loss_numerics},
      {4, "gradient checks", criterion_gradient_checks},
      {5, "metric oracle equivalence", criterion_metric_oracle},
      {6, "oracle-ceiling consistency", criterion_oracle_consistency},
      {7, "round-trip and merge properties", criterion_round_trip},
      {8, "end-to-end offline run", criterion_end_to_end},
      {9, "noise harness", criterion_noise_harness},
  };
  int failed = 0;
  for (const auto& entry : criteria) {
    if (only != 0 && entry.id != only) continue;
    Check check;
    try {
      entry.body(check);
    } catch (const std::exception& err) {
      check.failures.push_back(std::string("exception: ") + err.what());
    }
    if (check.failures.empty()) {
      std::cout << "[PASS] criterion " << entry.id << ": " << entry.label << "\n";
    } else {
      ++failed;
      std::cout << "[FAIL] criterion " << entry.id << ": " << entry.label << "\n";
      for (const auto& failure : check.failures) {
        std::cout << "       - " << failure << "\n";
      }
    }
  }
  if (only == 0 || only == 10) {
    Check check;
    bool skipped = false;
    try {
      criterion_live_smoke(check, skipped);
    } catch (const std::exception& err) {
      check.failures.push_back(std::string("exception: ") + err.what());
    }
    if (skipped) {
      std::cout << "[SKIP] criterion 10: live-endpoint smoke test "
                   "(set LSA_LIVE_ENDPOINT and an API key to enable)\n";
    } else if (check.failures.empty()) {
      std::cout << "[PASS] criterion 10: live-endpoint smoke test\n";
    } else {
      ++failed;
      std::cout << "[FAIL] criterion 10: live-endpoint smoke test\n";
      for (const auto& failure : check.failures) std::cout << "       - " << failure << "\n";
    }
  }
  return failed;
}
