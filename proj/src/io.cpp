#include "lsa/io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "lsa/util.hpp"

namespace lsa {

using nlohmann::json;

namespace {

json object_to_json(const ObjectState& obj) {
  json j{{"name", obj.name},
         {"attention", obj.attention},
         {"spatial", obj.spatial},
         {"contact", obj.contact}};
  if (obj.bbox) j["bbox"] = {obj.bbox->x, obj.bbox->y, obj.bbox->w, obj.bbox->h};
  return j;
}

ObjectState object_from_json(const json& j, const Vocabulary& vocab) {
  ObjectState obj;
  obj.name = j.at("name").get<std::string>();
  if (!vocab.has_object(obj.name)) {
    throw std::runtime_error("unknown object class '" + obj.name + "'");
  }
  auto read_relations = [&](const char* key, RelationKind kind) {
    std::vector<std::string> names;
    if (j.contains(key)) names = j.at(key).get<std::vector<std::string>>();
    for (const auto& name : names) {
      if (!vocab.relation_in(name, kind)) {
        throw std::runtime_error("unknown " + std::string(key) + " relation '" + name + "'");
      }
    }
    return names;
  };
  obj.attention = read_relations("attention", RelationKind::attention);
  obj.spatial = read_relations("spatial", RelationKind::spatial);
  obj.contact = read_relations("contact", RelationKind::contact);
  if (j.contains("bbox") && !j.at("bbox").is_null()) {
    const auto& b = j.at("bbox");
    if (!b.is_array() || b.size() != 4) throw std::runtime_error("bbox must be [x,y,w,h]");
    obj.bbox = BoundingBox{b[0].get<double>(), b[1].get<double>(), b[2].get<double>(),
                           b[3].get<double>()};
  }
  return obj;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) lines.push_back(line);
  }
  return lines;
}

}  // namespace

json frame_to_json(const FrameGraph& frame) {
  json objects = json::array();
  for (const auto& obj : frame.objects) objects.push_back(object_to_json(obj));
  return json{{"frame_id", frame.frame_id}, {"objects", std::move(objects)}};
}

FrameGraph frame_from_json(const json& j, const Vocabulary& vocab) {
  FrameGraph frame;
  frame.frame_id = j.at("frame_id").get<int>();
  if (frame.frame_id < 0) throw std::runtime_error("negative frame_id");
  for (const auto& obj : j.value("objects", json::array())) {
    frame.objects.push_back(object_from_json(obj, vocab));
  }
  return frame;
}

std::vector<VideoRecord> load_corpus(const std::string& path, const Vocabulary& vocab) {
  json doc = json::parse(read_file(path));
  if (!doc.is_array()) throw std::runtime_error(path + ": corpus must be a JSON array");
  std::vector<VideoRecord> corpus;
  for (const auto& entry : doc) {
    VideoRecord video;
    video.video_id = entry.at("video_id").get<std::string>();
    video.split = entry.value("split", "test");
    try {
      for (const auto& frame : entry.at("frames")) {
        video.frames.push_back(frame_from_json(frame, vocab));
      }
    } catch (const std::exception& err) {
      throw std::runtime_error("video '" + video.video_id + "': " + err.what());
    }
    corpus.push_back(std::move(video));
  }
  return corpus;
}

void save_corpus(const std::string& path, const std::vector<VideoRecord>& corpus) {
  json doc = json::array();
  for (const auto& video : corpus) {
    json frames = json::array();
    for (const auto& frame : video.frames) frames.push_back(frame_to_json(frame));
    doc.push_back(json{{"video_id", video.video_id},
                       {"split", video.split},
                       {"frames", std::move(frames)}});
  }
  write_file(path, doc.dump(2) + "\n");
}

namespace {

json sequence_to_json(const GraphSequence& sequence) {
  json frames = json::array();
  for (const auto& frame : expand_sequence(sequence)) frames.push_back(frame_to_json(frame));
  return frames;
}

GraphSequence sequence_from_json(const json& j, const Vocabulary& vocab,
                                 const std::string& video_id) {
  std::vector<FrameGraph> frames;
  for (const auto& frame : j) frames.push_back(frame_from_json(frame, vocab));
  return merge_sequence(frames, video_id);
}

}  // namespace

void save_benchmark(const std::string& path, const std::vector<LsaInstance>& instances) {
  std::ostringstream out;
  for (const auto& instance : instances) {
    json line{{"video_id", instance.video_id},
              {"fraction", instance.fraction},
              {"observed", sequence_to_json(instance.observed)},
              {"future", sequence_to_json(instance.future)}};
    out << line.dump() << '\n';
  }
  write_file(path, out.str());
}

std::vector<LsaInstance> load_benchmark(const std::string& path, const Vocabulary& vocab) {
  std::vector<LsaInstance> instances;
  for (const auto& line : read_lines(path)) {
    json j = json::parse(line);
    LsaInstance instance;
    instance.video_id = j.at("video_id").get<std::string>();
    instance.fraction = j.at("fraction").get<double>();
    instance.observed = sequence_from_json(j.at("observed"), vocab, instance.video_id);
    instance.future = sequence_from_json(j.at("future"), vocab, instance.video_id);
    instances.push_back(std::move(instance));
  }
  return instances;
}

json prediction_to_json(const PredictionRecord& record) {
  json diagnostics{
      {"goa_fallback", record.diagnostics.goa_fallback},
      {"goa_parse_failure", record.diagnostics.goa_parse_failure},
      {"dropped_never_observed", record.diagnostics.dropped_never_observed},
      {"oora_parse_failures", record.diagnostics.oora_parse_failures},
      {"fallback_objects", record.diagnostics.fallback_objects},
      {"client_errors", record.diagnostics.client_errors},
      {"prompts_sent", record.diagnostics.prompts_sent}};
  json parse = json::array();
  for (const auto& d : record.diagnostics.parse_diagnostics) {
    parse.push_back(json{{"kind", std::string(to_string(d.kind))},
                         {"token", d.token},
                         {"frame_id", d.frame_id}});
  }
  diagnostics["parse"] = std::move(parse);

  json frames = json::array();
  for (const auto& frame : record.future) frames.push_back(frame_to_json(frame));
  return json{{"video_id", record.video_id},
              {"fraction", record.fraction},
              {"mode", std::string(to_string(record.mode))},
              {"future", std::move(frames)},
              {"provenance",
               {{"model", record.model},
                {"backend", record.backend},
                {"decode_hash", record.decode_hash},
                {"prompt_hashes", record.prompt_hashes}}},
              {"latency_ms", record.latency_ms},
              {"diagnostics", std::move(diagnostics)}};
}

PredictionRecord prediction_from_json(const json& j, const Vocabulary& vocab) {
  PredictionRecord record;
  record.video_id = j.at("video_id").get<std::string>();
  record.fraction = j.at("fraction").get<double>();
  record.mode = anticipation_mode_from_string(j.at("mode").get<std::string>());
  for (const auto& frame : j.at("future")) {
    record.future.push_back(frame_from_json(frame, vocab));
  }
  const auto& provenance = j.at("provenance");
  record.model = provenance.value("model", "");
  record.backend = provenance.value("backend", "");
  record.decode_hash = provenance.value("decode_hash", "");
  record.prompt_hashes = provenance.value("prompt_hashes", std::vector<std::string>{});
  record.latency_ms = j.value("latency_ms", 0.0);
  if (j.contains("diagnostics")) {
    const auto& d = j.at("diagnostics");
    record.diagnostics.goa_fallback = d.value("goa_fallback", false);
    record.diagnostics.goa_parse_failure = d.value("goa_parse_failure", false);
    record.diagnostics.dropped_never_observed =
        d.value("dropped_never_observed", std::vector<std::string>{});
    record.diagnostics.oora_parse_failures =
        d.value("oora_parse_failures", std::vector<std::string>{});
    record.diagnostics.fallback_objects =
        d.value("fallback_objects", std::vector<std::string>{});
    record.diagnostics.client_errors = d.value("client_errors", std::vector<std::string>{});
    record.diagnostics.prompts_sent = d.value("prompts_sent", 0);
  }
  return record;
}

void save_predictions(const std::string& path,
                      const std::vector<PredictionRecord>& records) {
  std::ostringstream out;
  for (const auto& record : records) out << prediction_to_json(record).dump() << '\n';
  write_file(path, out.str());
}

std::vector<PredictionRecord> load_predictions(const std::string& path,
                                               const Vocabulary& vocab) {
  std::vector<PredictionRecord> records;
  for (const auto& line : read_lines(path)) {
    records.push_back(prediction_from_json(json::parse(line), vocab));
  }
  return records;
}

std::vector<SggFrame> load_sgg_frames(const std::string& path) {
  json doc = json::parse(read_file(path));
  if (!doc.is_array()) throw std::runtime_error(path + ": detections must be a JSON array");
  std::vector<SggFrame> frames;
  for (const auto& entry : doc) {
    SggFrame frame;
    frame.frame_id = entry.at("frame_id").get<int>();
    for (const auto& det : entry.value("detections", json::array())) {
      SggDetection detection;
      detection.name = det.at("name").get<std::string>();
      if (det.contains("bbox") && !det.at("bbox").is_null()) {
        const auto& b = det.at("bbox");
        detection.bbox = BoundingBox{b[0].get<double>(), b[1].get<double>(),
                                     b[2].get<double>(), b[3].get<double>()};
      }
      if (det.contains("labels")) {
        ObjectState labels;
        labels.name = detection.name;
        const auto& l = det.at("labels");
        labels.attention = l.value("attention", std::vector<std::string>{});
        labels.spatial = l.value("spatial", std::vector<std::string>{});
        labels.contact = l.value("contact", std::vector<std::string>{});
        detection.labels = std::move(labels);
      } else if (det.contains("scores")) {
        for (const auto& [name, value] : det.at("scores").items()) {
          detection.scores[name] = value.get<double>();
        }
      }
      frame.detections.push_back(std::move(detection));
    }
    frames.push_back(std::move(frame));
  }
  return frames;
}

}  // namespace lsa
