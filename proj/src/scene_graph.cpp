#include "lsa/scene_graph.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace lsa {

namespace {

bool same_set(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.size() != b.size()) return false;
  std::vector<std::string> sa = a, sb = b;
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  return sa == sb;
}

}  // namespace

const std::vector<std::string>& ObjectState::relations(RelationKind kind) const {
  switch (kind) {
    case RelationKind::attention: return attention;
    case RelationKind::spatial: return spatial;
    case RelationKind::contact: return contact;
  }
  return attention;
}

std::vector<std::string>& ObjectState::relations(RelationKind kind) {
  switch (kind) {
    case RelationKind::attention: return attention;
    case RelationKind::spatial: return spatial;
    case RelationKind::contact: return contact;
  }
  return attention;
}

bool ObjectState::same_content(const ObjectState& other) const {
  return name == other.name && same_set(attention, other.attention) &&
         same_set(spatial, other.spatial) && same_set(contact, other.contact);
}

const ObjectState* FrameGraph::find(std::string_view name) const {
  for (const auto& obj : objects) {
    if (obj.name == name) return &obj;
  }
  return nullptr;
}

bool FrameGraph::same_content(const FrameGraph& other) const {
  if (objects.size() != other.objects.size()) return false;
  for (const auto& obj : objects) {
    const ObjectState* match = other.find(obj.name);
    if (match == nullptr || !obj.same_content(*match)) return false;
  }
  return true;
}

const GraphSegment* GraphSequence::last_segment() const {
  return segments.empty() ? nullptr : &segments.back();
}

bool GraphSequence::contains_object(std::string_view name) const {
  for (const auto& seg : segments) {
    if (seg.graph.find(name) != nullptr) return true;
  }
  return false;
}

GraphSequence merge_sequence(const std::vector<FrameGraph>& frames,
                             std::string video_id) {
  GraphSequence seq;
  seq.video_id = std::move(video_id);
  seq.annotated_ids.reserve(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const FrameGraph& frame = frames[i];
    if (i > 0 && frame.frame_id <= frames[i - 1].frame_id) {
      throw std::invalid_argument("frame ids must be strictly increasing at id " +
                                  std::to_string(frame.frame_id));
    }
    std::unordered_set<std::string> seen;
    for (const auto& obj : frame.objects) {
      if (!seen.insert(obj.name).second) {
        throw std::invalid_argument("duplicate object '" + obj.name +
                                    "' in frame " + std::to_string(frame.frame_id));
      }
    }
    seq.annotated_ids.push_back(frame.frame_id);
    if (!seq.segments.empty() && seq.segments.back().graph.same_content(frame)) {
      GraphSegment& segment = seq.segments.back();
      segment.end = frame.frame_id;
      // Boxes are metadata outside merge equality; keep the newest ones so
      // nearest-preceding lookups see the most recent detection.
      for (auto& obj : segment.graph.objects) {
        if (const ObjectState* newer = frame.find(obj.name)) obj.bbox = newer->bbox;
      }
    } else {
      seq.segments.push_back(GraphSegment{frame.frame_id, frame.frame_id, frame});
    }
  }
  return seq;
}

std::vector<FrameGraph> expand_sequence(const GraphSequence& sequence) {
  std::vector<FrameGraph> frames;
  frames.reserve(sequence.annotated_ids.size());
  for (const auto& seg : sequence.segments) {
    for (int id : sequence.annotated_ids) {
      if (id < seg.start || id > seg.end) continue;
      FrameGraph frame = seg.graph;
      frame.frame_id = id;
      frames.push_back(std::move(frame));
    }
  }
  return frames;
}

std::optional<std::string> find_vocabulary_violation(const FrameGraph& g,
                                                     const Vocabulary& vocab) {
  for (const auto& obj : g.objects) {
    if (!vocab.has_object(obj.name)) return obj.name;
    for (RelationKind kind :
         {RelationKind::attention, RelationKind::spatial, RelationKind::contact}) {
      for (const auto& rel : obj.relations(kind)) {
        if (!vocab.relation_in(rel, kind)) return rel;
      }
    }
  }
  return std::nullopt;
}

}  // namespace lsa
