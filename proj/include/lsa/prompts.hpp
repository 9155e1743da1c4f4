#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lsa/scene_graph.hpp"

namespace lsa {

enum class PromptMode { goa, oora };

class PromptError : public std::runtime_error {
public:
  explicit PromptError(const std::string& what) : std::runtime_error(what) {}
};

// Rendered prompt plus the pieces needed to rebuild it under a token
// budget: scaffold prefix/suffix are fixed, observed_blocks may be dropped
// oldest-first.
struct PromptBundle {
  PromptMode mode = PromptMode::goa;
  std::string target_object;  // oora only
  std::vector<int> future_frames;
  bool one_shot = false;
  std::string prefix;
  std::vector<std::string> observed_blocks;
  std::string suffix;
  std::string text;
};

// Estimated token count of a string. The default is the character-count/4
// heuristic; exact BPE counting is model-specific and pluggable.
using TokenEstimator = std::function<std::size_t(const std::string&)>;
std::size_t default_token_estimate(const std::string& text);

// Object-level forecasting prompt: header, optional frozen one-shot
// example, IMPORTANT list, vocabulary line, the merged observed block, the
// output-format instruction and the future-frame cue. future_frames must be
// non-empty and strictly beyond the last observed id.
PromptBundle build_goa_prompt(const GraphSequence& observed,
                              const std::vector<int>& future_frames,
                              const Vocabulary& vocab, bool one_shot);

// Per-object relation prompt. The observed block is restricted to the
// target object and re-merged; see object_history_segments. Throws
// PromptError when the object was never observed.
PromptBundle build_oora_prompt(const GraphSequence& observed,
                               const std::string& object,
                               const std::vector<int>& future_frames,
                               const Vocabulary& vocab, bool one_shot);

// Restriction of `observed` to one object, re-merged over runs of identical
// state. Within a contiguous presence stretch each run's range starts right
// after the previous run's last annotated id (a state is taken to persist
// until the next annotated change), so ranges tile the stretch; a gap in
// presence starts a fresh stretch.
std::vector<GraphSegment> object_history_segments(const GraphSequence& observed,
                                                  const std::string& object);

// Drops oldest observed blocks until the estimate fits the budget. The
// scaffold and future cue are never dropped; if they alone exceed the
// budget this throws PromptError.
PromptBundle truncate_to_budget(const PromptBundle& bundle, std::size_t token_budget,
                                const TokenEstimator& estimator = default_token_estimate);

}  // namespace lsa
