#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lsa/benchmark.hpp"
#include "lsa/llm_client.hpp"
#include "lsa/parse_llm.hpp"
#include "lsa/prompts.hpp"

namespace lsa {

enum class AnticipationMode { with_goa, without_goa };

std::string_view to_string(AnticipationMode mode);
AnticipationMode anticipation_mode_from_string(std::string_view name);

// Diagnostics rolled up across the GOA call and every per-object OORA call.
struct PipelineDiagnostics {
  bool goa_fallback = false;       // GOA failed; continuous-object mode used
  bool goa_parse_failure = false;
  std::vector<std::string> dropped_never_observed;  // GOA-new objects
  std::vector<std::string> oora_parse_failures;     // objects with zero usable lines
  std::vector<std::string> fallback_objects;        // carried last observed state
  std::vector<std::string> client_errors;           // "<object>: <error>"
  std::vector<ParseDiagnostic> parse_diagnostics;
  int prompts_sent = 0;
};

// Integrated prediction for one benchmark instance. Future frame ids match
// the instance's requested ids exactly.
struct PredictionRecord {
  std::string video_id;
  double fraction = 0;
  AnticipationMode mode = AnticipationMode::without_goa;  // effective mode
  std::vector<FrameGraph> future;
  std::string model;
  std::string backend;
  std::string decode_hash;                // sha256 of the decode parameters
  std::vector<std::string> prompt_hashes;
  double latency_ms = 0;
  PipelineDiagnostics diagnostics;
};

struct PipelineOptions {
  AnticipationMode mode = AnticipationMode::with_goa;
  bool one_shot = false;
  std::size_t token_budget = 2000;  // 0 disables truncation
  int parallelism = 1;              // concurrent per-object OORA requests
};

// Runs the two-stage anticipation for one instance: GOA object forecast,
// per-object OORA relation forecasts (one request per object, frames gated
// by where GOA listed the object), then integration. without_goa projects
// the last observed frame's objects over every future frame. GOA total
// failure falls back to without_goa with a flag; per-object client errors
// keep partial results.
PredictionRecord anticipate(const LsaInstance& instance, LlmBackend& backend,
                            const DecodeConfig& decode, const PipelineOptions& options,
                            const Vocabulary& vocab);

// One SGG detection: either per-relation probabilities (binarized at the
// threshold) or already-hard relation labels.
struct SggDetection {
  std::string name;
  std::optional<BoundingBox> bbox;
  std::map<std::string, double> scores;  // relation name -> probability
  std::optional<ObjectState> labels;     // hard labels; scores ignored if set
};

struct SggFrame {
  int frame_id = 0;
  std::vector<SggDetection> detections;
};

struct IngestDiagnostics {
  std::vector<int> empty_frames;          // no detections at all
  std::vector<int> all_below_threshold;   // a detection lost every relation
  std::vector<std::string> unknown_tokens;
};

// Converts detector output to a merged GraphSequence: probability vectors
// binarized at `threshold` (p > threshold is positive), bboxes carried
// through, frames with no person-object pairs kept as empty graphs.
GraphSequence ingest_sgg_text(const std::vector<SggFrame>& frames,
                              const Vocabulary& vocab, double threshold = 0.6,
                              IngestDiagnostics* diagnostics = nullptr);

// Gives each predicted object the bbox of the same-named object in the
// nearest preceding observed frame; objects never observed keep no box.
void map_back_to_boxes(PredictionRecord& record, const GraphSequence& observed);

}  // namespace lsa
