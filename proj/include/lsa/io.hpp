#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "lsa/benchmark.hpp"
#include "lsa/pipeline.hpp"

namespace lsa {

// Interchange corpus: a JSON array of videos, each
//   { "video_id": str, "split": "train"|"test",
//     "frames": [ { "frame_id": int, "objects": [
//         { "name": str, "attention": [str], "spatial": [str],
//           "contact": [str], "bbox": [x,y,w,h]? } ] } ] }
// Vocabulary validity is enforced on load.
std::vector<VideoRecord> load_corpus(const std::string& path, const Vocabulary& vocab);
void save_corpus(const std::string& path, const std::vector<VideoRecord>& corpus);

nlohmann::json frame_to_json(const FrameGraph& frame);
FrameGraph frame_from_json(const nlohmann::json& j, const Vocabulary& vocab);

// Benchmark bundle: one LsaInstance per JSONL line, frames stored expanded
// in the interchange frame schema.
void save_benchmark(const std::string& path, const std::vector<LsaInstance>& instances);
std::vector<LsaInstance> load_benchmark(const std::string& path, const Vocabulary& vocab);

// Prediction records, one per JSONL line.
void save_predictions(const std::string& path,
                      const std::vector<PredictionRecord>& records);
std::vector<PredictionRecord> load_predictions(const std::string& path,
                                               const Vocabulary& vocab);
nlohmann::json prediction_to_json(const PredictionRecord& record);
PredictionRecord prediction_from_json(const nlohmann::json& j, const Vocabulary& vocab);

// SGG detector output: a JSON array of
//   { "frame_id": int, "detections": [ { "name": str, "bbox": [..]?,
//       "scores": {rel: p, ...} | "labels": {"attention": [..], ...} } ] }
std::vector<SggFrame> load_sgg_frames(const std::string& path);

}  // namespace lsa
