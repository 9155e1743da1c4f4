#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lsa/scene_graph.hpp"

namespace lsa {

// A (human, object, relation) triple with the human implicit.
struct Triple {
  std::string object;
  std::string relation;
  friend bool operator==(const Triple&, const Triple&) = default;
  friend auto operator<=>(const Triple&, const Triple&) = default;
};

// Flattens a graph into generation order: objects as stored, relations per
// object in attention -> spatial -> contact order. This order is the only
// available ranking (the predictions carry no confidence scores) and is
// what the top-K truncation applies to.
std::vector<Triple> flatten_triples(const FrameGraph& g);

// Predicted and ground-truth future frames of one video, aligned by id.
struct VideoFrames {
  std::string video_id;
  std::vector<FrameGraph> predicted;
  std::vector<FrameGraph> truth;
};

// Per-frame recall = |top-K predicted triples  matched in GT| / |GT|;
// frames with empty GT are skipped; the video score is the mean over
// scored frames. Returns nullopt when no frame is scorable.
std::optional<double> video_recall_at_k(const VideoFrames& video, int k);

// Macro aggregation: mean of per-video scores over videos with at least one
// scorable frame.
std::optional<double> recall_at_k(std::span<const VideoFrames> videos, int k);

// Per relation class: recall over only GT triples of that class, with the
// same top-K truncation of the full prediction list; macro-averaged frame
// -> video -> corpus. mR@K is the unweighted mean over classes that occur
// in the ground truth.
std::optional<double> mean_recall_at_k(std::span<const VideoFrames> videos, int k);
std::map<std::string, double> per_class_recall_at_k(std::span<const VideoFrames> videos,
                                                    int k);

// Exclusive object-set categories per future frame, plus the share of
// frames with any overlap. The subset case (P strictly inside G) is
// reported on its own rather than folded into partial overlap.
struct ObjectSetMetrics {
  double strict = 0;           // P == G
  double contain = 0;          // P superset of G
  double subset = 0;           // P strict subset of G
  double partial_overlap = 0;  // overlap without containment either way
  double no_overlap = 0;
  double partial_acc = 0;      // any overlap (strict/contain/subset/partial)
  int frames = 0;
};

ObjectSetMetrics object_set_metrics(std::span<const VideoFrames> videos);

// Exact-set accuracy per partition over (frame, object) pairs present in
// both prediction and ground truth; overall is the mean of the three
// partition accuracies.
struct RelationAccuracy {
  double attention = 0;
  double spatial = 0;
  double contact = 0;
  double overall = 0;
  int pairs = 0;
};

RelationAccuracy relation_accuracy(std::span<const VideoFrames> videos);

}  // namespace lsa
