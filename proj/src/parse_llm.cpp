#include "lsa/parse_llm.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>
#include <sstream>

#include "lsa/util.hpp"

namespace lsa {

namespace {

std::string normalize_name(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    out += c == ' ' ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

std::string maybe_normalize(std::string token, const ParseOptions& options) {
  return options.normalize_names ? normalize_name(token) : token;
}

// "Frame <id>:" prefix, tolerant of spacing ("Frame486:" included). Returns
// the text after the colon, or nullopt when the line is not a frame line.
// Out-of-range frame numbers make the line unparseable rather than fatal.
std::optional<std::pair<int, std::string>> match_frame_line(const std::string& raw) {
  std::string line = trim(raw);
  constexpr std::string_view kFrame = "Frame";
  if (line.compare(0, kFrame.size(), kFrame) != 0) return std::nullopt;
  std::size_t pos = kFrame.size();
  while (pos < line.size() && line[pos] == ' ') ++pos;
  std::size_t digits = pos;
  while (digits < line.size() && std::isdigit(static_cast<unsigned char>(line[digits]))) ++digits;
  if (digits == pos) return std::nullopt;
  std::size_t colon = digits;
  while (colon < line.size() && line[colon] == ' ') ++colon;
  if (colon >= line.size() || line[colon] != ':') return std::nullopt;
  int id = 0;
  auto [ptr, ec] = std::from_chars(line.data() + pos, line.data() + digits, id);
  if (ec != std::errc() || ptr != line.data() + digits) return std::nullopt;
  return std::make_pair(id, trim(line.substr(colon + 1)));
}

std::vector<std::string> split_trimmed(const std::string& s, char sep) {
  std::vector<std::string> out;
  for (const auto& part : split(s, sep)) {
    std::string token = trim(part);
    if (!token.empty()) out.push_back(std::move(token));
  }
  return out;
}

}  // namespace

std::string_view to_string(ParseDiagnostic::Kind kind) {
  using Kind = ParseDiagnostic::Kind;
  switch (kind) {
    case Kind::unknown_object: return "unknown_object";
    case Kind::unknown_relation: return "unknown_relation";
    case Kind::partition_violation: return "partition_violation";
    case Kind::wrong_object: return "wrong_object";
    case Kind::unparseable_line: return "unparseable_line";
    case Kind::missing_frame: return "missing_frame";
    case Kind::extra_frame: return "extra_frame";
    case Kind::duplicate_frame: return "duplicate_frame";
    case Kind::empty_field: return "empty_field";
  }
  return "?";
}

std::vector<std::string> GoaPrediction::object_union() const {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& [frame, objects] : objects_by_frame) {
    for (const auto& name : objects) {
      if (seen.insert(name).second) out.push_back(name);
    }
  }
  return out;
}

GoaPrediction parse_goa_response(const std::string& text,
                                 const std::vector<int>& requested_frames,
                                 const Vocabulary& vocab,
                                 const ParseOptions& options) {
  GoaPrediction result;
  const std::set<int> requested(requested_frames.begin(), requested_frames.end());
  int parsed_lines = 0;

  std::istringstream stream(text);
  std::string raw;
  while (std::getline(stream, raw)) {
    if (trim(raw).empty()) continue;
    auto frame_line = match_frame_line(raw);
    if (!frame_line) {
      result.diagnostics.push_back(
          {ParseDiagnostic::Kind::unparseable_line, trim(raw), -1});
      continue;
    }
    const auto& [frame_id, body] = *frame_line;
    ++parsed_lines;
    if (requested.find(frame_id) == requested.end()) {
      result.diagnostics.push_back({ParseDiagnostic::Kind::extra_frame, body, frame_id});
      continue;
    }
    std::vector<std::string> objects;
    std::set<std::string> seen;
    for (std::string token : split_trimmed(body, ',')) {
      while (!token.empty() && token.back() == '.') token.pop_back();
      token = maybe_normalize(trim(token), options);
      if (token.empty()) continue;
      if (!vocab.has_object(token)) {
        result.diagnostics.push_back(
            {ParseDiagnostic::Kind::unknown_object, token, frame_id});
        continue;
      }
      if (seen.insert(token).second) objects.push_back(std::move(token));
    }
    if (result.objects_by_frame.find(frame_id) != result.objects_by_frame.end()) {
      result.diagnostics.push_back({ParseDiagnostic::Kind::duplicate_frame, "", frame_id});
    }
    result.objects_by_frame[frame_id] = std::move(objects);  // last occurrence wins
  }

  if (parsed_lines == 0) {
    result.total_failure = true;
    return result;
  }
  for (int frame_id : requested_frames) {
    if (result.objects_by_frame.find(frame_id) == result.objects_by_frame.end()) {
      result.diagnostics.push_back({ParseDiagnostic::Kind::missing_frame, "", frame_id});
      result.objects_by_frame[frame_id] = {};
    }
  }
  return result;
}

namespace {

// Relation list of one partition, validated; violations are diagnosed and
// dropped.
std::vector<std::string> parse_partition(const std::string& body, RelationKind kind,
                                         int frame_id, const Vocabulary& vocab,
                                         const ParseOptions& options,
                                         std::vector<ParseDiagnostic>& diagnostics) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (std::string token : split_trimmed(body, ',')) {
    while (!token.empty() && token.back() == '.') token.pop_back();
    token = maybe_normalize(trim(token), options);
    if (token.empty()) continue;
    auto actual = vocab.relation_kind(token);
    if (!actual) {
      diagnostics.push_back({ParseDiagnostic::Kind::unknown_relation, token, frame_id});
      continue;
    }
    if (*actual != kind) {
      diagnostics.push_back({ParseDiagnostic::Kind::partition_violation, token, frame_id});
      continue;
    }
    if (seen.insert(token).second) out.push_back(std::move(token));
  }
  return out;
}

}  // namespace

OoraPrediction parse_oora_response(const std::string& text,
                                   const std::string& object,
                                   const std::vector<int>& requested_frames,
                                   const Vocabulary& vocab,
                                   const ParseOptions& options) {
  OoraPrediction result;
  result.object = object;
  const std::set<int> requested(requested_frames.begin(), requested_frames.end());
  int parsed_lines = 0;

  std::istringstream stream(text);
  std::string raw;
  while (std::getline(stream, raw)) {
    if (trim(raw).empty()) continue;
    auto frame_line = match_frame_line(raw);
    if (!frame_line) {
      result.diagnostics.push_back(
          {ParseDiagnostic::Kind::unparseable_line, trim(raw), -1});
      continue;
    }
    const auto& [frame_id, body0] = *frame_line;
    std::string body = body0;
    // "object:" prefix is optional; model outputs appear both ways.
    constexpr std::string_view kObject = "object:";
    if (body.compare(0, kObject.size(), kObject) == 0) {
      body = trim(body.substr(kObject.size()));
    }
    const std::size_t attn_pos = body.find("attention:");
    const std::size_t spat_pos = body.find("spatial:");
    const std::size_t cont_pos = body.find("contact:");
    if (attn_pos == std::string::npos || spat_pos == std::string::npos ||
        cont_pos == std::string::npos || attn_pos > spat_pos || spat_pos > cont_pos) {
      result.diagnostics.push_back(
          {ParseDiagnostic::Kind::unparseable_line, trim(raw), frame_id});
      continue;
    }
    std::string named = trim(body.substr(0, attn_pos));
    if (maybe_normalize(named, options) != object) {
      result.diagnostics.push_back({ParseDiagnostic::Kind::wrong_object, named, frame_id});
      continue;
    }
    ++parsed_lines;
    if (requested.find(frame_id) == requested.end()) {
      result.diagnostics.push_back({ParseDiagnostic::Kind::extra_frame, "", frame_id});
      continue;
    }

    auto field = [&](std::size_t from, std::size_t to) {
      std::string value = body.substr(from, to - from);
      std::size_t comma = value.find_last_of(',');
      // The field separator is the comma before the next marker; relation
      // tokens never contain commas, so the last comma is the separator.
      return trim(to == body.size() ? value : value.substr(0, comma));
    };
    ObjectState state;
    state.name = object;
    state.attention = parse_partition(field(attn_pos + 10, spat_pos), RelationKind::attention,
                                      frame_id, vocab, options, result.diagnostics);
    state.spatial = parse_partition(field(spat_pos + 8, cont_pos), RelationKind::spatial,
                                    frame_id, vocab, options, result.diagnostics);
    state.contact = parse_partition(field(cont_pos + 8, body.size()), RelationKind::contact,
                                    frame_id, vocab, options, result.diagnostics);
    for (RelationKind kind :
         {RelationKind::attention, RelationKind::spatial, RelationKind::contact}) {
      if (state.relations(kind).empty()) {
        result.diagnostics.push_back(
            {ParseDiagnostic::Kind::empty_field, std::string(to_string(kind)), frame_id});
      }
    }
    if (result.states_by_frame.find(frame_id) != result.states_by_frame.end()) {
      result.diagnostics.push_back({ParseDiagnostic::Kind::duplicate_frame, "", frame_id});
    }
    result.states_by_frame[frame_id] = std::move(state);
  }

  if (parsed_lines == 0) {
    result.total_failure = true;
    return result;
  }
  for (int frame_id : requested_frames) {
    if (result.states_by_frame.find(frame_id) == result.states_by_frame.end()) {
      result.diagnostics.push_back({ParseDiagnostic::Kind::missing_frame, "", frame_id});
    }
  }
  return result;
}

}  // namespace lsa
