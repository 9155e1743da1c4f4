#include "lsa/benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "lsa/util.hpp"

namespace lsa {

namespace {

std::size_t triple_count(const FrameGraph& g) {
  std::size_t n = 0;
  for (const auto& obj : g.objects) {
    n += obj.attention.size() + obj.spatial.size() + obj.contact.size();
  }
  return n;
}

std::set<std::string> object_names(const FrameGraph& g) {
  std::set<std::string> names;
  for (const auto& obj : g.objects) names.insert(obj.name);
  return names;
}

}  // namespace

std::vector<LsaInstance> build_benchmark(const std::vector<VideoRecord>& corpus,
                                         const std::vector<double>& fractions,
                                         const std::string& split_filter,
                                         BuildDiagnostics* diagnostics) {
  if (corpus.empty()) throw std::invalid_argument("empty corpus");
  if (fractions.empty()) throw std::invalid_argument("no observation fractions given");
  for (double f : fractions) {
    if (!(f > 0.0 && f < 1.0)) {
      throw std::invalid_argument("fraction must lie in (0,1): " + std::to_string(f));
    }
  }
  BuildDiagnostics local;
  BuildDiagnostics& diag = diagnostics != nullptr ? *diagnostics : local;
  diag.videos_in = static_cast<int>(corpus.size());

  std::vector<LsaInstance> instances;
  for (const auto& video : corpus) {
    if (!split_filter.empty() && video.split != split_filter) {
      ++diag.videos_dropped_split;
      continue;
    }
    const std::size_t frame_count = video.frames.size();
    if (frame_count < 3) {
      ++diag.videos_dropped_short;
      continue;
    }
    ++diag.videos_kept;
    for (double fraction : fractions) {
      auto boundary = static_cast<std::size_t>(
          std::ceil(fraction * static_cast<double>(frame_count)));
      boundary = std::clamp<std::size_t>(boundary, 1, frame_count - 1);
      std::vector<FrameGraph> observed(video.frames.begin(),
                                       video.frames.begin() + boundary);
      std::vector<FrameGraph> future(video.frames.begin() + boundary,
                                     video.frames.end());
      LsaInstance instance;
      instance.video_id = video.video_id;
      instance.fraction = fraction;
      try {
        instance.observed = merge_sequence(observed, video.video_id);
        instance.future = merge_sequence(future, video.video_id);
      } catch (const std::invalid_argument& err) {
        diag.record_errors.push_back(video.video_id + ": " + err.what());
        break;
      }
      instances.push_back(std::move(instance));
    }
  }
  return instances;
}

ObjectDynamicsStats compute_object_dynamics(std::span<const LsaInstance> instances) {
  ObjectDynamicsStats stats;
  int consistent = 0, with_new = 0, with_disappeared = 0;
  for (const auto& instance : instances) {
    const GraphSegment* last = instance.observed.last_segment();
    if (last == nullptr) continue;
    std::set<std::string> before = object_names(last->graph);
    std::set<std::string> after;
    for (const auto& seg : instance.future.segments) {
      for (const auto& obj : seg.graph.objects) after.insert(obj.name);
    }
    bool any_new = std::any_of(after.begin(), after.end(), [&](const auto& n) {
      return before.find(n) == before.end();
    });
    bool any_gone = std::any_of(before.begin(), before.end(), [&](const auto& n) {
      return after.find(n) == after.end();
    });
    ++stats.videos;
    if (any_new) ++with_new;
    if (any_gone) ++with_disappeared;
    if (!any_new && !any_gone) ++consistent;
  }
  if (stats.videos > 0) {
    stats.consistent_rate = static_cast<double>(consistent) / stats.videos;
    stats.new_object_rate = static_cast<double>(with_new) / stats.videos;
    stats.disappeared_rate = static_cast<double>(with_disappeared) / stats.videos;
  }
  return stats;
}

std::optional<double> oracle_ceiling(std::span<const LsaInstance> instances, int k) {
  if (k <= 0) throw std::invalid_argument("k must be positive");
  double video_sum = 0;
  int scored_videos = 0;
  for (const auto& instance : instances) {
    const GraphSegment* last = instance.observed.last_segment();
    if (last == nullptr) continue;
    std::set<std::string> persistent = object_names(last->graph);
    double frame_sum = 0;
    int scored_frames = 0;
    for (const FrameGraph& frame : expand_sequence(instance.future)) {
      const std::size_t total = triple_count(frame);
      if (total == 0) continue;
      std::size_t reachable = 0;
      for (const auto& obj : frame.objects) {
        if (persistent.find(obj.name) != persistent.end()) {
          reachable += obj.attention.size() + obj.spatial.size() + obj.contact.size();
        }
      }
      const auto numerator = std::min<std::size_t>(reachable, static_cast<std::size_t>(k));
      frame_sum += static_cast<double>(numerator) / static_cast<double>(total);
      ++scored_frames;
    }
    if (scored_frames == 0) continue;
    video_sum += frame_sum / scored_frames;
    ++scored_videos;
  }
  if (scored_videos == 0) return std::nullopt;
  return video_sum / scored_videos;
}

namespace {

// Resamples `count` distinct relations from one partition list.
std::vector<std::string> resample_relations(std::mt19937_64& rng,
                                            const std::vector<std::string>& pool,
                                            std::size_t count) {
  std::vector<int> indices(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) indices[i] = static_cast<int>(i);
  std::vector<int> picked = sample_without_replacement(rng, std::move(indices), count);
  std::vector<std::string> out;
  out.reserve(picked.size());
  for (int idx : picked) out.push_back(pool[static_cast<std::size_t>(idx)]);
  return out;
}

}  // namespace

NoiseResult inject_noise(const LsaInstance& instance, const NoiseSpec& spec,
                         const Vocabulary& vocab) {
  if (spec.rate < 0.0 || spec.rate > 1.0) {
    throw std::invalid_argument("noise rate must lie in [0,1]");
  }
  if (spec.range_lo < 0.0 || spec.range_hi > 1.0 || spec.range_lo > spec.range_hi) {
    throw std::invalid_argument("noise frame range must satisfy 0 <= lo <= hi <= 1");
  }

  std::vector<FrameGraph> frames = expand_sequence(instance.observed);
  const std::size_t total = frames.size();

  NoiseResult result;
  std::vector<int> eligible;
  for (std::size_t j = 0; j < total; ++j) {
    const double pos = static_cast<double>(j) / static_cast<double>(total);
    if (pos >= spec.range_lo && pos < spec.range_hi) eligible.push_back(static_cast<int>(j));
  }
  result.frames_in_range = static_cast<int>(eligible.size());
  if (eligible.empty()) {
    result.instance = instance;
    result.no_frames_in_range = true;
    return result;
  }

  const auto target = static_cast<std::size_t>(
      std::floor(spec.rate * static_cast<double>(eligible.size())));
  std::mt19937_64 rng(spec.seed);
  std::vector<int> selected = sample_without_replacement(rng, eligible, target);
  std::sort(selected.begin(), selected.end());
  result.frames_selected = static_cast<int>(selected.size());

  for (int idx : selected) {
    FrameGraph& frame = frames[static_cast<std::size_t>(idx)];
    const FrameGraph before = frame;
    if (frame.objects.empty()) continue;
    const auto pick = static_cast<std::size_t>(uniform_below(rng, frame.objects.size()));
    if (spec.kind == NoiseKind::drop) {
      frame.objects.erase(frame.objects.begin() + static_cast<std::ptrdiff_t>(pick));
    } else {
      ObjectState& obj = frame.objects[pick];
      obj.attention = resample_relations(rng, vocab.attention_relations(), obj.attention.size());
      obj.spatial = resample_relations(rng, vocab.spatial_relations(), obj.spatial.size());
      obj.contact = resample_relations(rng, vocab.contact_relations(), obj.contact.size());
    }
    if (!frame.same_content(before)) ++result.frames_changed;
  }

  result.instance = instance;
  result.instance.observed = merge_sequence(frames, instance.video_id);
  result.achieved_error_rate =
      total == 0 ? 0.0 : static_cast<double>(result.frames_changed) / static_cast<double>(total);
  return result;
}

}  // namespace lsa
