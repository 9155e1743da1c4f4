#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "lsa/vocabulary.hpp"

namespace lsa {

// Pixel rectangle carried as opaque metadata. Never participates in graph
// equality or temporal merging.
struct BoundingBox {
  double x = 0, y = 0, w = 0, h = 0;
  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

// One human-object pair: the object class plus the relation names of each
// partition. Relation lists preserve ingestion order (the canonical text
// shows non-alphabetical orders like "beneath,in_front_of") but compare as
// sets.
struct ObjectState {
  std::string name;
  std::vector<std::string> attention;
  std::vector<std::string> spatial;
  std::vector<std::string> contact;
  std::optional<BoundingBox> bbox;

  const std::vector<std::string>& relations(RelationKind kind) const;
  std::vector<std::string>& relations(RelationKind kind);

  // Structural equality, order- and bbox-sensitive.
  friend bool operator==(const ObjectState&, const ObjectState&) = default;
  // Graph-content equality: same name and same relation sets, ignoring
  // stored order and bbox.
  bool same_content(const ObjectState& other) const;
};

// Scene graph of one annotated frame. Object names are unique per frame.
struct FrameGraph {
  int frame_id = 0;
  std::vector<ObjectState> objects;

  const ObjectState* find(std::string_view name) const;
  friend bool operator==(const FrameGraph&, const FrameGraph&) = default;
  // Equality used for temporal merging: same object set with same relation
  // sets, ignoring object order, relation order, bbox and frame id.
  bool same_content(const FrameGraph& other) const;
};

// Merged form "Frame a..b" (or "Frame a" when a == b). `graph` carries the
// shared content; its frame_id equals `start`.
struct GraphSegment {
  int start = 0;
  int end = 0;
  FrameGraph graph;

  friend bool operator==(const GraphSegment&, const GraphSegment&) = default;
};

// Ordered, non-overlapping segments over a sparse set of annotated frame
// ids. The id list is recorded at build time so expansion is exact.
struct GraphSequence {
  std::string video_id;
  std::vector<GraphSegment> segments;
  std::vector<int> annotated_ids;

  bool empty() const { return segments.empty(); }
  // Content of the last annotated frame, or nullptr when empty.
  const GraphSegment* last_segment() const;
  // Whether any segment's graph contains the object.
  bool contains_object(std::string_view name) const;
};

// Collapses adjacent frames with identical content into segments. Frame
// ids must be strictly increasing; merging is maximal.
// Throws std::invalid_argument on non-increasing ids or duplicate object
// names within a frame.
GraphSequence merge_sequence(const std::vector<FrameGraph>& frames,
                             std::string video_id = {});

// Inverse of merge_sequence over the recorded annotated id set.
std::vector<FrameGraph> expand_sequence(const GraphSequence& sequence);

// Validates every object and relation name of g against the vocabulary.
// Returns the first offending token, or nullopt when valid.
std::optional<std::string> find_vocabulary_violation(const FrameGraph& g,
                                                     const Vocabulary& vocab);

}  // namespace lsa
