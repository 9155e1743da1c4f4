#include "lsa/pipeline.hpp"

#include <algorithm>
#include <future>
#include <set>
#include <stdexcept>

#include "json.hpp"
#include "lsa/util.hpp"

namespace lsa {

std::string_view to_string(AnticipationMode mode) {
  return mode == AnticipationMode::with_goa ? "with_goa" : "without_goa";
}

AnticipationMode anticipation_mode_from_string(std::string_view name) {
  if (name == "with_goa") return AnticipationMode::with_goa;
  if (name == "without_goa") return AnticipationMode::without_goa;
  throw std::invalid_argument("unknown mode: " + std::string(name));
}

namespace {

std::string hash_decode_config(const DecodeConfig& decode) {
  nlohmann::json j{{"model", decode.model},
                   {"endpoint", decode.endpoint},
                   {"temperature", decode.temperature},
                   {"top_p", decode.top_p},
                   {"max_output_tokens",
                    decode.max_output_tokens ? nlohmann::json(*decode.max_output_tokens)
                                             : nlohmann::json()}};
  return sha256_hex(j.dump());
}

// Last observed state of an object, or nullptr.
const ObjectState* last_observed_state(const GraphSequence& observed,
                                       const std::string& name) {
  for (auto it = observed.segments.rbegin(); it != observed.segments.rend(); ++it) {
    if (const ObjectState* state = it->graph.find(name)) return state;
  }
  return nullptr;
}

struct OoraOutcome {
  std::string object;
  std::vector<int> frames;                // frames the object was scheduled for
  std::optional<OoraPrediction> parsed;   // nullopt on client error
  std::string client_error;
  std::string prompt_hash;
  double latency_ms = 0;
};

OoraOutcome run_oora(const LsaInstance& instance, const std::string& object,
                     const std::vector<int>& frames, LlmBackend& backend,
                     const DecodeConfig& decode, const PipelineOptions& options,
                     const Vocabulary& vocab) {
  OoraOutcome outcome;
  outcome.object = object;
  outcome.frames = frames;
  PromptBundle bundle =
      build_oora_prompt(instance.observed, object, frames, vocab, options.one_shot);
  if (options.token_budget > 0) {
    bundle = truncate_to_budget(bundle, options.token_budget);
  }
  outcome.prompt_hash = sha256_hex(bundle.text);
  try {
    Completion completion = backend.complete(bundle.text, decode);
    outcome.latency_ms = completion.latency_ms;
    outcome.parsed = parse_oora_response(completion.text, object, frames, vocab);
  } catch (const LlmError& error) {
    outcome.client_error = std::string(to_string(error.kind())) + ": " + error.what();
  }
  return outcome;
}

}  // namespace

PredictionRecord anticipate(const LsaInstance& instance, LlmBackend& backend,
                            const DecodeConfig& decode, const PipelineOptions& options,
                            const Vocabulary& vocab) {
  if (instance.observed.empty()) {
    throw std::invalid_argument("instance has no observed frames: " + instance.video_id);
  }
  const std::vector<int> future_ids = instance.future_ids();
  if (future_ids.empty()) {
    throw std::invalid_argument("instance has no future frames: " + instance.video_id);
  }

  PredictionRecord record;
  record.video_id = instance.video_id;
  record.fraction = instance.fraction;
  record.model = decode.model;
  record.backend = backend.name();
  record.decode_hash = hash_decode_config(decode);

  // Stage one: the per-frame object schedule, either forecast by GOA or
  // projected from the last observed frame.
  std::map<int, std::vector<std::string>> schedule;
  AnticipationMode effective = options.mode;
  if (options.mode == AnticipationMode::with_goa) {
    PromptBundle goa =
        build_goa_prompt(instance.observed, future_ids, vocab, options.one_shot);
    if (options.token_budget > 0) goa = truncate_to_budget(goa, options.token_budget);
    record.prompt_hashes.push_back(sha256_hex(goa.text));
    ++record.diagnostics.prompts_sent;
    bool failed = false;
    try {
      Completion completion = backend.complete(goa.text, decode);
      record.latency_ms += completion.latency_ms;
      GoaPrediction prediction = parse_goa_response(completion.text, future_ids, vocab);
      for (auto& d : prediction.diagnostics) {
        record.diagnostics.parse_diagnostics.push_back(std::move(d));
      }
      if (prediction.total_failure) {
        record.diagnostics.goa_parse_failure = true;
        failed = true;
      } else {
        schedule = std::move(prediction.objects_by_frame);
      }
    } catch (const LlmError& error) {
      record.diagnostics.client_errors.push_back(std::string("goa: ") + error.what());
      failed = true;
    }
    if (failed) {
      record.diagnostics.goa_fallback = true;
      effective = AnticipationMode::without_goa;
    }
  }
  if (effective == AnticipationMode::without_goa) {
    const GraphSegment* last = instance.observed.last_segment();
    std::vector<std::string> persistent;
    for (const auto& obj : last->graph.objects) persistent.push_back(obj.name);
    for (int id : future_ids) schedule[id] = persistent;
  }
  record.mode = effective;

  // Target objects in first-appearance order, with their scheduled frames.
  std::vector<std::string> targets;
  std::map<std::string, std::vector<int>> frames_for;
  for (int id : future_ids) {
    auto it = schedule.find(id);
    if (it == schedule.end()) continue;
    for (const auto& name : it->second) {
      auto& frames = frames_for[name];
      if (frames.empty()) targets.push_back(name);
      frames.push_back(id);
    }
  }

  // A GOA-new object has no observed history to prompt with; it is dropped
  // and counted rather than invented.
  std::vector<std::string> queryable;
  for (const auto& name : targets) {
    if (instance.observed.contains_object(name)) {
      queryable.push_back(name);
    } else {
      record.diagnostics.dropped_never_observed.push_back(name);
    }
  }

  // Stage two: one OORA request per object, optionally in parallel.
  std::vector<OoraOutcome> outcomes(queryable.size());
  if (options.parallelism > 1 && queryable.size() > 1) {
    std::vector<std::future<OoraOutcome>> pending;
    pending.reserve(queryable.size());
    for (const auto& name : queryable) {
      pending.push_back(std::async(std::launch::async, [&, name] {
        return run_oora(instance, name, frames_for[name], backend, decode, options, vocab);
      }));
    }
    for (std::size_t i = 0; i < pending.size(); ++i) outcomes[i] = pending[i].get();
  } else {
    for (std::size_t i = 0; i < queryable.size(); ++i) {
      outcomes[i] =
          run_oora(instance, queryable[i], frames_for[queryable[i]], backend, decode,
                   options, vocab);
    }
  }

  // Integration: OORA output wins; total failures fall back to the last
  // observed state; frames an object's response skipped stay without it.
  std::map<std::string, const OoraOutcome*> outcome_for;
  for (const auto& outcome : outcomes) {
    outcome_for[outcome.object] = &outcome;
    record.prompt_hashes.push_back(outcome.prompt_hash);
    record.latency_ms += outcome.latency_ms;
    ++record.diagnostics.prompts_sent;
    if (!outcome.client_error.empty()) {
      record.diagnostics.client_errors.push_back(outcome.object + ": " +
                                                 outcome.client_error);
    }
    if (outcome.parsed) {
      for (const auto& d : outcome.parsed->diagnostics) {
        record.diagnostics.parse_diagnostics.push_back(d);
      }
    }
    const bool unusable = !outcome.parsed || outcome.parsed->total_failure;
    if (unusable) {
      if (outcome.parsed && outcome.parsed->total_failure) {
        record.diagnostics.oora_parse_failures.push_back(outcome.object);
      }
      record.diagnostics.fallback_objects.push_back(outcome.object);
    }
  }

  for (int id : future_ids) {
    FrameGraph frame;
    frame.frame_id = id;
    auto scheduled = schedule.find(id);
    if (scheduled != schedule.end()) {
      for (const auto& name : scheduled->second) {
        auto it = outcome_for.find(name);
        if (it == outcome_for.end()) continue;  // dropped (never observed)
        const OoraOutcome& outcome = *it->second;
        if (outcome.parsed && !outcome.parsed->total_failure) {
          auto state = outcome.parsed->states_by_frame.find(id);
          if (state != outcome.parsed->states_by_frame.end()) {
            frame.objects.push_back(state->second);
          }
          continue;
        }
        if (const ObjectState* last = last_observed_state(instance.observed, name)) {
          ObjectState carried = *last;
          carried.bbox.reset();  // boxes are reattached by map_back_to_boxes
          frame.objects.push_back(std::move(carried));
        }
      }
    }
    record.future.push_back(std::move(frame));
  }
  return record;
}

GraphSequence ingest_sgg_text(const std::vector<SggFrame>& frames,
                              const Vocabulary& vocab, double threshold,
                              IngestDiagnostics* diagnostics) {
  IngestDiagnostics local;
  IngestDiagnostics& diag = diagnostics != nullptr ? *diagnostics : local;
  std::vector<FrameGraph> graphs;
  graphs.reserve(frames.size());
  for (const auto& frame : frames) {
    FrameGraph graph;
    graph.frame_id = frame.frame_id;
    if (frame.detections.empty()) diag.empty_frames.push_back(frame.frame_id);
    for (const auto& detection : frame.detections) {
      if (!vocab.has_object(detection.name)) {
        diag.unknown_tokens.push_back(detection.name);
        continue;
      }
      ObjectState state;
      state.name = detection.name;
      state.bbox = detection.bbox;
      if (detection.labels) {
        state.attention = detection.labels->attention;
        state.spatial = detection.labels->spatial;
        state.contact = detection.labels->contact;
      } else {
        // Binarize in vocabulary order so output is deterministic.
        for (RelationKind kind :
             {RelationKind::attention, RelationKind::spatial, RelationKind::contact}) {
          for (const auto& name : vocab.relations(kind)) {
            auto it = detection.scores.find(name);
            if (it != detection.scores.end() && it->second > threshold) {
              state.relations(kind).push_back(name);
            }
          }
        }
        for (const auto& [name, score] : detection.scores) {
          if (!vocab.has_relation(name)) diag.unknown_tokens.push_back(name);
        }
        if (state.attention.empty() && state.spatial.empty() && state.contact.empty()) {
          diag.all_below_threshold.push_back(frame.frame_id);
        }
      }
      graph.objects.push_back(std::move(state));
    }
    graphs.push_back(std::move(graph));
  }
  return merge_sequence(graphs);
}

void map_back_to_boxes(PredictionRecord& record, const GraphSequence& observed) {
  const std::vector<FrameGraph> frames = expand_sequence(observed);
  for (FrameGraph& future : record.future) {
    for (ObjectState& obj : future.objects) {
      obj.bbox.reset();
      for (auto it = frames.rbegin(); it != frames.rend(); ++it) {
        if (it->frame_id >= future.frame_id) continue;
        if (const ObjectState* seen = it->find(obj.name)) {
          obj.bbox = seen->bbox;
          break;
        }
      }
    }
  }
}

}  // namespace lsa
