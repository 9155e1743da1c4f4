#include "lsa/text_codec.hpp"

#include <charconv>
#include <sstream>

namespace lsa {

namespace {

void append_relation_list(std::string& out, const std::vector<std::string>& names) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i > 0) out += ',';
    out += names[i];
  }
}

void append_clause(std::string& out, const ObjectState& obj) {
  out += "object: ";
  out += obj.name;
  out += " attention: ";
  append_relation_list(out, obj.attention);
  out += ", spatial: ";
  append_relation_list(out, obj.spatial);
  out += ", contact: ";
  append_relation_list(out, obj.contact);
  out += '.';
}

std::string serialize_range(int start, int end, const FrameGraph& g,
                            const Vocabulary& vocab) {
  if (auto token = find_vocabulary_violation(g, vocab)) {
    throw SerializeError("unknown vocabulary token '" + *token + "' in frame " +
                         std::to_string(start));
  }
  std::string out = "Frame " + std::to_string(start);
  if (end != start) out += ".." + std::to_string(end);
  out += ':';
  for (std::size_t i = 0; i < g.objects.size(); ++i) {
    out += i == 0 ? " " : "\n";
    append_clause(out, g.objects[i]);
  }
  return out;
}

std::string_view rstrip(std::string_view s) {
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

bool parse_int(std::string_view s, int& value) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  return ec == std::errc() && ptr == s.data() + s.size();
}

// Splits a comma-joined relation list; the canonical form has no spaces.
std::vector<std::string> split_relations(std::string_view s, int line) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::size_t pos = 0;
  while (true) {
    std::size_t comma = s.find(',', pos);
    std::string_view token = s.substr(pos, comma == std::string_view::npos
                                               ? std::string_view::npos
                                               : comma - pos);
    if (token.empty()) throw ParseError(line, "empty relation token");
    out.emplace_back(token);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

ObjectState parse_clause(std::string_view clause, int line, const Vocabulary& vocab) {
  constexpr std::string_view kObject = "object: ";
  constexpr std::string_view kAttention = " attention: ";
  constexpr std::string_view kSpatial = ", spatial: ";
  constexpr std::string_view kContact = ", contact: ";
  if (clause.substr(0, kObject.size()) != kObject) {
    throw ParseError(line, "expected 'object: '");
  }
  std::size_t attn_pos = clause.find(kAttention);
  if (attn_pos == std::string_view::npos) throw ParseError(line, "missing 'attention:' field");
  std::size_t spat_pos = clause.find(kSpatial, attn_pos);
  if (spat_pos == std::string_view::npos) throw ParseError(line, "missing 'spatial:' field");
  std::size_t cont_pos = clause.find(kContact, spat_pos);
  if (cont_pos == std::string_view::npos) throw ParseError(line, "missing 'contact:' field");

  ObjectState obj;
  obj.name = std::string(clause.substr(kObject.size(), attn_pos - kObject.size()));
  if (!vocab.has_object(obj.name)) {
    throw ParseError(line, "unknown object '" + obj.name + "'");
  }
  std::string_view attn = clause.substr(attn_pos + kAttention.size(),
                                        spat_pos - attn_pos - kAttention.size());
  std::string_view spat = clause.substr(spat_pos + kSpatial.size(),
                                        cont_pos - spat_pos - kSpatial.size());
  std::string_view cont = clause.substr(cont_pos + kContact.size());
  if (!cont.empty() && cont.back() == '.') cont.remove_suffix(1);

  obj.attention = split_relations(attn, line);
  obj.spatial = split_relations(spat, line);
  obj.contact = split_relations(cont, line);
  for (RelationKind kind :
       {RelationKind::attention, RelationKind::spatial, RelationKind::contact}) {
    for (const auto& rel : obj.relations(kind)) {
      if (!vocab.relation_in(rel, kind)) {
        throw ParseError(line, "unknown " + std::string(to_string(kind)) +
                                   " relation '" + rel + "'");
      }
    }
  }
  return obj;
}

}  // namespace

std::string serialize_frame(const FrameGraph& g, const Vocabulary& vocab) {
  return serialize_range(g.frame_id, g.frame_id, g, vocab);
}

std::string serialize_frame(const GraphSegment& segment, const Vocabulary& vocab) {
  return serialize_range(segment.start, segment.end, segment.graph, vocab);
}

std::string serialize_sequence(const GraphSequence& sequence, const Vocabulary& vocab) {
  std::string out;
  for (std::size_t i = 0; i < sequence.segments.size(); ++i) {
    if (i > 0) out += '\n';
    out += serialize_frame(sequence.segments[i], vocab);
  }
  return out;
}

std::vector<GraphSegment> parse_frame_text(const std::string& text,
                                           const Vocabulary& vocab) {
  std::vector<GraphSegment> segments;
  std::istringstream stream(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(stream, raw)) {
    ++line_no;
    std::string_view line = rstrip(raw);
    if (line.empty()) continue;
    constexpr std::string_view kFrame = "Frame ";
    if (line.substr(0, kFrame.size()) == kFrame) {
      std::string_view header = line.substr(kFrame.size());
      std::size_t colon = header.find(':');
      if (colon == std::string_view::npos) {
        throw ParseError(line_no, "frame header missing ':'");
      }
      std::string_view range = header.substr(0, colon);
      GraphSegment seg;
      std::size_t dots = range.find("..");
      if (dots == std::string_view::npos) {
        if (!parse_int(range, seg.start)) {
          throw ParseError(line_no, "bad frame number '" + std::string(range) + "'");
        }
        seg.end = seg.start;
      } else {
        if (!parse_int(range.substr(0, dots), seg.start) ||
            !parse_int(range.substr(dots + 2), seg.end) || seg.end < seg.start) {
          throw ParseError(line_no, "bad frame range '" + std::string(range) + "'");
        }
      }
      seg.graph.frame_id = seg.start;
      std::string_view rest = header.substr(colon + 1);
      if (!rest.empty()) {
        if (rest.front() != ' ') throw ParseError(line_no, "expected space after ':'");
        rest.remove_prefix(1);
        seg.graph.objects.push_back(parse_clause(rest, line_no, vocab));
      }
      segments.push_back(std::move(seg));
    } else {
      if (segments.empty()) {
        throw ParseError(line_no, "object clause before any frame header");
      }
      ObjectState obj = parse_clause(line, line_no, vocab);
      if (segments.back().graph.find(obj.name) != nullptr) {
        throw ParseError(line_no, "duplicate object '" + obj.name + "' in frame");
      }
      segments.back().graph.objects.push_back(std::move(obj));
    }
  }
  return segments;
}

}  // namespace lsa
