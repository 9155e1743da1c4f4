#include "lsa/eval.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

namespace lsa {

namespace {

std::map<int, const FrameGraph*> by_id(const std::vector<FrameGraph>& frames) {
  std::map<int, const FrameGraph*> out;
  for (const auto& frame : frames) out[frame.frame_id] = &frame;
  return out;
}

// Aligned (predicted, truth) frames, in frame-id order.
std::vector<std::pair<const FrameGraph*, const FrameGraph*>> aligned_frames(
    const VideoFrames& video) {
  std::vector<std::pair<const FrameGraph*, const FrameGraph*>> out;
  auto truth = by_id(video.truth);
  for (const auto& frame : video.predicted) {
    auto it = truth.find(frame.frame_id);
    if (it != truth.end()) out.emplace_back(&frame, it->second);
  }
  return out;
}

std::vector<Triple> top_k(const FrameGraph& predicted, int k) {
  std::vector<Triple> triples = flatten_triples(predicted);
  if (static_cast<int>(triples.size()) > k) triples.resize(static_cast<std::size_t>(k));
  return triples;
}

}  // namespace

std::vector<Triple> flatten_triples(const FrameGraph& g) {
  std::vector<Triple> out;
  for (const auto& obj : g.objects) {
    for (RelationKind kind :
         {RelationKind::attention, RelationKind::spatial, RelationKind::contact}) {
      for (const auto& rel : obj.relations(kind)) out.push_back({obj.name, rel});
    }
  }
  return out;
}

std::optional<double> video_recall_at_k(const VideoFrames& video, int k) {
  if (k <= 0) throw std::invalid_argument("k must be positive");
  double sum = 0;
  int scored = 0;
  for (const auto& [predicted, truth] : aligned_frames(video)) {
    const std::vector<Triple> gt = flatten_triples(*truth);
    if (gt.empty()) continue;
    const std::set<Triple> gt_set(gt.begin(), gt.end());
    std::set<Triple> matched;
    for (const Triple& triple : top_k(*predicted, k)) {
      if (gt_set.find(triple) != gt_set.end()) matched.insert(triple);
    }
    sum += static_cast<double>(matched.size()) / static_cast<double>(gt_set.size());
    ++scored;
  }
  if (scored == 0) return std::nullopt;
  return sum / scored;
}

std::optional<double> recall_at_k(std::span<const VideoFrames> videos, int k) {
  double sum = 0;
  int scored = 0;
  for (const auto& video : videos) {
    if (auto value = video_recall_at_k(video, k)) {
      sum += *value;
      ++scored;
    }
  }
  if (scored == 0) return std::nullopt;
  return sum / scored;
}

std::map<std::string, double> per_class_recall_at_k(std::span<const VideoFrames> videos,
                                                    int k) {
  if (k <= 0) throw std::invalid_argument("k must be positive");
  // relation -> (sum of per-video means, videos containing the class)
  std::map<std::string, std::pair<double, int>> corpus;
  for (const auto& video : videos) {
    // relation -> (sum of per-frame recalls, frames containing the class)
    std::map<std::string, std::pair<double, int>> per_video;
    for (const auto& [predicted, truth] : aligned_frames(video)) {
      const std::vector<Triple> gt = flatten_triples(*truth);
      if (gt.empty()) continue;
      const std::vector<Triple> top = top_k(*predicted, k);
      const std::set<Triple> top_set(top.begin(), top.end());
      std::map<std::string, std::pair<int, int>> frame_counts;  // matched, total
      std::set<Triple> seen;
      for (const Triple& triple : gt) {
        if (!seen.insert(triple).second) continue;
        auto& [matched, total] = frame_counts[triple.relation];
        ++total;
        if (top_set.find(triple) != top_set.end()) ++matched;
      }
      for (const auto& [relation, counts] : frame_counts) {
        auto& [sum, frames] = per_video[relation];
        sum += static_cast<double>(counts.first) / counts.second;
        ++frames;
      }
    }
    for (const auto& [relation, entry] : per_video) {
      auto& [sum, count] = corpus[relation];
      sum += entry.first / entry.second;
      ++count;
    }
  }
  std::map<std::string, double> out;
  for (const auto& [relation, entry] : corpus) {
    out[relation] = entry.first / entry.second;
  }
  return out;
}

std::optional<double> mean_recall_at_k(std::span<const VideoFrames> videos, int k) {
  const std::map<std::string, double> per_class = per_class_recall_at_k(videos, k);
  if (per_class.empty()) return std::nullopt;
  double sum = 0;
  for (const auto& [relation, value] : per_class) sum += value;
  return sum / static_cast<double>(per_class.size());
}

ObjectSetMetrics object_set_metrics(std::span<const VideoFrames> videos) {
  ObjectSetMetrics metrics;
  int strict = 0, contain = 0, subset = 0, partial = 0, none = 0;
  for (const auto& video : videos) {
    for (const auto& [predicted, truth] : aligned_frames(video)) {
      std::set<std::string> p, g;
      for (const auto& obj : predicted->objects) p.insert(obj.name);
      for (const auto& obj : truth->objects) g.insert(obj.name);
      ++metrics.frames;
      const bool p_in_g = std::includes(g.begin(), g.end(), p.begin(), p.end());
      const bool g_in_p = std::includes(p.begin(), p.end(), g.begin(), g.end());
      std::vector<std::string> common;
      std::set_intersection(p.begin(), p.end(), g.begin(), g.end(),
                            std::back_inserter(common));
      if (p_in_g && g_in_p) {
        ++strict;
      } else if (g_in_p) {
        ++contain;
      } else if (p_in_g && !p.empty()) {
        ++subset;
      } else if (!common.empty()) {
        ++partial;
      } else {
        ++none;
      }
    }
  }
  if (metrics.frames == 0) return metrics;
  const double total = metrics.frames;
  metrics.strict = strict / total;
  metrics.contain = contain / total;
  metrics.subset = subset / total;
  metrics.partial_overlap = partial / total;
  metrics.no_overlap = none / total;
  metrics.partial_acc = (strict + contain + subset + partial) / total;
  return metrics;
}

RelationAccuracy relation_accuracy(std::span<const VideoFrames> videos) {
  RelationAccuracy acc;
  int correct_attention = 0, correct_spatial = 0, correct_contact = 0;
  auto same_set = [](const std::vector<std::string>& a, const std::vector<std::string>& b) {
    return std::set<std::string>(a.begin(), a.end()) ==
           std::set<std::string>(b.begin(), b.end());
  };
  for (const auto& video : videos) {
    for (const auto& [predicted, truth] : aligned_frames(video)) {
      for (const auto& obj : predicted->objects) {
        const ObjectState* gt = truth->find(obj.name);
        if (gt == nullptr) continue;
        ++acc.pairs;
        if (same_set(obj.attention, gt->attention)) ++correct_attention;
        if (same_set(obj.spatial, gt->spatial)) ++correct_spatial;
        if (same_set(obj.contact, gt->contact)) ++correct_contact;
      }
    }
  }
  if (acc.pairs == 0) return acc;
  acc.attention = static_cast<double>(correct_attention) / acc.pairs;
  acc.spatial = static_cast<double>(correct_spatial) / acc.pairs;
  acc.contact = static_cast<double>(correct_contact) / acc.pairs;
  acc.overall = (acc.attention + acc.spatial + acc.contact) / 3.0;
  return acc;
}

}  // namespace lsa
