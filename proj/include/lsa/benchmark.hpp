#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lsa/scene_graph.hpp"

namespace lsa {

// A video in the interchange format, before observed/future splitting.
struct VideoRecord {
  std::string video_id;
  std::string split;  // "train" or "test"
  std::vector<FrameGraph> frames;
};

// One benchmark instance: observed prefix plus hidden future suffix at a
// given observation fraction. future is never empty.
struct LsaInstance {
  std::string video_id;
  double fraction = 0;
  GraphSequence observed;
  GraphSequence future;

  std::vector<int> future_ids() const { return future.annotated_ids; }
};

struct BuildDiagnostics {
  int videos_in = 0;
  int videos_kept = 0;
  int videos_dropped_short = 0;   // fewer than three annotated frames
  int videos_dropped_split = 0;   // filtered by split
  std::vector<std::string> record_errors;  // per-record message with id
};

// Splits every surviving video at ceil(fraction * frame_count), clamped so
// the future suffix keeps at least one frame. Videos with fewer than three
// annotated frames are dropped; split_filter empty means keep all splits.
// Throws std::invalid_argument on an empty corpus or empty fraction list.
std::vector<LsaInstance> build_benchmark(const std::vector<VideoRecord>& corpus,
                                         const std::vector<double>& fractions,
                                         const std::string& split_filter = "test",
                                         BuildDiagnostics* diagnostics = nullptr);

// Rates over videos: unchanged object set, at least one new object, at
// least one disappeared object (last two are non-exclusive flags).
struct ObjectDynamicsStats {
  double consistent_rate = 0;
  double new_object_rate = 0;
  double disappeared_rate = 0;
  int videos = 0;
};

// Compares the last observed frame's object set against the union over
// future frames, per video. Instances should share one fraction.
ObjectDynamicsStats compute_object_dynamics(std::span<const LsaInstance> instances);

// Maximum Recall@K achievable by a perfect relation predictor restricted to
// objects of the last observed frame. Aggregated exactly like
// eval::recall_at_k: frames with empty ground truth are skipped, frame
// scores average per video, video scores average over the corpus. Returns
// nullopt when no frame is scorable.
std::optional<double> oracle_ceiling(std::span<const LsaInstance> instances, int k);

enum class NoiseKind { drop, modify };

// Seeded perturbation of the observed prefix. `range_lo`/`range_hi` bound
// the fractional position (index / frame count) of eligible observed
// frames; `rate` is the fraction of eligible frames to perturb.
struct NoiseSpec {
  NoiseKind kind = NoiseKind::drop;
  double range_lo = 0.0;
  double range_hi = 1.0;
  double rate = 0.0;
  std::uint64_t seed = 0;
};

struct NoiseResult {
  LsaInstance instance;
  bool no_frames_in_range = false;  // warning: spec selected nothing
  int frames_in_range = 0;
  int frames_selected = 0;
  int frames_changed = 0;  // content actually differs from the original
  // frames_changed over all observed frames, the measured error rate.
  double achieved_error_rate = 0;
};

// drop: removes one uniformly chosen object clause per selected frame.
// modify: resamples every relation of one uniformly chosen object, keeping
// set sizes and partitions. Future ground truth is never touched.
// Throws std::invalid_argument on an invalid spec.
NoiseResult inject_noise(const LsaInstance& instance, const NoiseSpec& spec,
                         const Vocabulary& vocab);

}  // namespace lsa
