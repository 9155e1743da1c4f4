#include "lsa/prompts.hpp"

#include <algorithm>

#include "lsa/text_codec.hpp"
#include "lsa/util.hpp"

namespace lsa {

namespace {

constexpr std::string_view kGoaHeader =
    "You are an object prediction assistant for scene understanding. In this task, "
    "you are provided with observed scene information from past frames and a list of "
    "future frame numbers. Your task is to predict the possible objects for the exact "
    "future frames and answer in a fixed format.\n";

constexpr std::string_view kGoaOneShotExample =
    "Example:\n"
    "Observed:\n"
    "Frame 42: object: medicine attention: looking_at, spatial: in_front_of, contact: holding.\n"
    "Frame 87: object: medicine attention: looking_at, spatial: in_front_of, contact: holding.\n"
    "object: cup/glass/bottle attention: looking_at, spatial: in_front_of, contact: holding, touching.\n"
    "Frame 111: object: medicine attention: looking_at, spatial: in_front_of, contact: holding.\n"
    "Future frame numbers to predict objects for: Frame 125, 136\n"
    "Frame 125: medicine, cup/glass/bottle\n"
    "Frame 136: medicine, cup/glass/bottle\n";

constexpr std::string_view kGoaImportant =
    "IMPORTANT: Objects may appear or disappear over time. Consider the following:\n"
    "1. Objects that were recently visible may still be present even if not mentioned\n"
    "2. New objects may appear as the scene changes\n"
    "3. Some objects may disappear from view as time progresses\n"
    "4. The longer the time gap, the more likely the scene has changed significantly\n";

constexpr std::string_view kGoaOutputInstruction =
    "Please output in the following format:\n"
    "Frame <index>: <objects>\n"
    "Each frame should be on a separate line with no additional commentary.\n";

constexpr std::string_view kOoraHeader =
    "You are a scene graph anticipation assistant. In scene graph anticipation, you "
    "are given a series of observed frames containing a specific object. Your task is "
    "to predict how a person will interact with this object in the future.\n"
    "Note:\n"
    "Attention indicates whether the person is looking at the object.\n"
    "Contact indicates whether the person physically touches or interacts with the object.\n"
    "Spatial indicates the relative spatial position of the object with respect to the person.\n";

constexpr std::string_view kOoraOneShotExample =
    "Example: Observed segment for object medicine:\n"
    "Frame 42..207: object: medicine attention: not_looking_at, spatial: in_front_of, contact: holding.\n"
    "Frame 222: object: medicine attention: not_looking_at, spatial: in_front_of, contact: holding.\n"
    "Future frames: Frame 226, 236 for object [medicine]:\n"
    "Frame 226: medicine attention: not_looking_at, spatial: in_front_of, contact: holding.\n"
    "Frame 236: medicine attention: not_looking_at, spatial: in_front_of, contact: holding, eating.\n";

std::string comma_space_list(const std::vector<std::string>& names) {
  return join(names, ", ");
}

std::string frame_id_list(const std::vector<int>& ids, std::string_view item_prefix) {
  std::vector<std::string> parts;
  parts.reserve(ids.size());
  for (int id : ids) parts.push_back(std::string(item_prefix) + std::to_string(id));
  return join(parts, ", ");
}

void check_future_frames(const GraphSequence& observed, const std::vector<int>& future) {
  if (observed.empty()) throw PromptError("observed sequence is empty");
  if (future.empty()) throw PromptError("no future frames requested");
  const int last = observed.annotated_ids.back();
  for (int id : future) {
    if (id <= last) {
      throw PromptError("future frame " + std::to_string(id) +
                        " is not beyond the last observed frame " + std::to_string(last));
    }
  }
}

std::string assemble(const PromptBundle& bundle) {
  std::string text = bundle.prefix;
  for (std::size_t i = 0; i < bundle.observed_blocks.size(); ++i) {
    if (i > 0) text += '\n';
    text += bundle.observed_blocks[i];
  }
  text += bundle.suffix;
  return text;
}

}  // namespace

std::size_t default_token_estimate(const std::string& text) {
  return (text.size() + 3) / 4;
}

PromptBundle build_goa_prompt(const GraphSequence& observed,
                              const std::vector<int>& future_frames,
                              const Vocabulary& vocab, bool one_shot) {
  check_future_frames(observed, future_frames);

  PromptBundle bundle;
  bundle.mode = PromptMode::goa;
  bundle.future_frames = future_frames;
  bundle.one_shot = one_shot;

  bundle.prefix = std::string(kGoaHeader);
  bundle.prefix += '\n';
  if (one_shot) {
    bundle.prefix += kGoaOneShotExample;
    bundle.prefix += '\n';
  }
  bundle.prefix += kGoaImportant;
  bundle.prefix += '\n';
  bundle.prefix += "Available objects: __background__, " + comma_space_list(vocab.objects()) + "\n";
  bundle.prefix += "Observed:\n\n";

  for (const auto& seg : observed.segments) {
    bundle.observed_blocks.push_back(serialize_frame(seg, vocab));
  }

  bundle.suffix = "\n\n";
  bundle.suffix += kGoaOutputInstruction;
  bundle.suffix += '\n';
  bundle.suffix += "Future frame numbers to predict objects for: " +
                   frame_id_list(future_frames, "Frame ") + ":";
  bundle.text = assemble(bundle);
  return bundle;
}

std::vector<GraphSegment> object_history_segments(const GraphSequence& observed,
                                                  const std::string& object) {
  std::vector<GraphSegment> out;
  const std::vector<FrameGraph> frames = expand_sequence(observed);
  bool in_stretch = false;
  for (const auto& frame : frames) {
    const ObjectState* state = frame.find(object);
    if (state == nullptr) {
      in_stretch = false;
      continue;
    }
    FrameGraph restricted;
    restricted.frame_id = frame.frame_id;
    restricted.objects.push_back(*state);
    if (in_stretch && out.back().graph.same_content(restricted)) {
      out.back().end = frame.frame_id;
    } else {
      // Inside a stretch the new run begins right after the previous run's
      // last annotated id; after a gap it begins at its own first id.
      const int start = in_stretch ? out.back().end + 1 : frame.frame_id;
      restricted.frame_id = start;
      out.push_back(GraphSegment{start, frame.frame_id, std::move(restricted)});
    }
    in_stretch = true;
  }
  return out;
}

PromptBundle build_oora_prompt(const GraphSequence& observed,
                               const std::string& object,
                               const std::vector<int>& future_frames,
                               const Vocabulary& vocab, bool one_shot) {
  check_future_frames(observed, future_frames);
  std::vector<GraphSegment> history = object_history_segments(observed, object);
  if (history.empty()) {
    throw PromptError("object '" + object + "' never appears in the observed sequence");
  }

  PromptBundle bundle;
  bundle.mode = PromptMode::oora;
  bundle.target_object = object;
  bundle.future_frames = future_frames;
  bundle.one_shot = one_shot;

  bundle.prefix = std::string(kOoraHeader);
  bundle.prefix += '\n';
  if (one_shot) {
    bundle.prefix += kOoraOneShotExample;
    bundle.prefix += '\n';
  }
  bundle.prefix += "The possible relationship categories are:\n";
  bundle.prefix += "Attention: " + comma_space_list(vocab.attention_relations()) + "\n";
  bundle.prefix += "Spatial: " + comma_space_list(vocab.spatial_relations()) + "\n";
  bundle.prefix += "Contact: " + comma_space_list(vocab.contact_relations()) + "\n";
  bundle.prefix += '\n';
  bundle.prefix += "Observed segment for object [" + object + "]:\n";

  for (const auto& seg : history) {
    bundle.observed_blocks.push_back(serialize_frame(seg, vocab));
  }

  const std::string ids = frame_id_list(future_frames, "");
  bundle.suffix = "\n\n";
  bundle.suffix += "Please generate the scene graph for object [" + object +
                   "] in each of the following future frames: " + ids + ".\n";
  bundle.suffix += "Output one scene graph per frame in the following format:\n";
  bundle.suffix += "Frame <index>: object: " + object +
                   " attention: <attention_relationship>, spatial: <spatial_relationship>, "
                   "contact: <contact_relationship>\n";
  bundle.suffix += "Ensure each frame is on a separate line and no additional commentary is included.\n";
  bundle.suffix += '\n';
  bundle.suffix += "Future frames " + ids + " for object [" + object + "]:";
  bundle.text = assemble(bundle);
  return bundle;
}

PromptBundle truncate_to_budget(const PromptBundle& bundle, std::size_t token_budget,
                                const TokenEstimator& estimator) {
  PromptBundle out = bundle;
  while (estimator(out.text) > token_budget) {
    if (out.observed_blocks.empty()) {
      throw PromptError("prompt scaffold alone exceeds the token budget (" +
                        std::to_string(estimator(out.text)) + " > " +
                        std::to_string(token_budget) + ")");
    }
    out.observed_blocks.erase(out.observed_blocks.begin());
    out.text = assemble(out);
  }
  return out;
}

}  // namespace lsa
