#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "lsa/scene_graph.hpp"

namespace lsa {

// Raised by serialize_frame on a vocabulary violation; names the token.
class SerializeError : public std::runtime_error {
public:
  explicit SerializeError(const std::string& what) : std::runtime_error(what) {}
};

// Raised by the strict parser. `line` is 1-based within the parsed text.
class ParseError : public std::runtime_error {
public:
  ParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  int line() const { return line_; }

private:
  int line_ = 0;
};

// Canonical text form:
//
//   Frame <a>[..<b>]: object: <name> attention: <r1[,r2...]>, spatial: <...>, contact: <...>.
//   object: <name> ...
//
// One object clause per line under its frame header, the first clause on
// the header line; multi-valued relations joined by commas without spaces;
// each clause terminated by a period. An empty graph emits the bare header.
std::string serialize_frame(const FrameGraph& g, const Vocabulary& vocab);
std::string serialize_frame(const GraphSegment& segment, const Vocabulary& vocab);
// All segments, joined by newlines.
std::string serialize_sequence(const GraphSequence& sequence, const Vocabulary& vocab);

// Strict inverse of serialize_frame. Tolerates trailing whitespace and a
// missing final period; anything else malformed raises ParseError with the
// line number. Unknown names raise ParseError naming the token.
std::vector<GraphSegment> parse_frame_text(const std::string& text,
                                           const Vocabulary& vocab);

}  // namespace lsa
