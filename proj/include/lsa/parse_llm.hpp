#pragma once

#include <map>
#include <string>
#include <vector>

#include "lsa/scene_graph.hpp"

namespace lsa {

// What the lenient parsers dropped or repaired, in input order. Nothing is
// discarded silently.
struct ParseDiagnostic {
  enum class Kind {
    unknown_object,
    unknown_relation,
    partition_violation,   // known relation, wrong partition
    wrong_object,          // oora line names a different object
    unparseable_line,
    missing_frame,         // requested frame absent from the response
    extra_frame,           // response frame that was never requested
    duplicate_frame,       // later line replaced an earlier one
    empty_field,
  };
  Kind kind;
  std::string token;  // offending token, or the raw line for unparseable_line
  int frame_id = -1;
};

std::string_view to_string(ParseDiagnostic::Kind kind);

struct ParseOptions {
  // Exact-after-normalization matching: lower-case and spaces mapped to
  // underscores before vocabulary lookup. No fuzzy matching beyond that.
  bool normalize_names = false;
};

// Object forecasts per requested future frame. Frames missing from the
// response are present with an empty object list (and diagnosed).
struct GoaPrediction {
  std::map<int, std::vector<std::string>> objects_by_frame;
  std::vector<ParseDiagnostic> diagnostics;
  bool total_failure = false;  // zero parseable lines

  std::vector<std::string> object_union() const;
};

// Relation forecasts for one object.
struct OoraPrediction {
  std::string object;
  std::map<int, ObjectState> states_by_frame;  // ordered by frame id
  std::vector<ParseDiagnostic> diagnostics;
  bool total_failure = false;
};

// Salvages "Frame <id>: <obj>[, <obj>...]" lines out of arbitrary model
// text. Unknown objects are dropped and diagnosed; duplicate frame lines
// keep the last occurrence.
GoaPrediction parse_goa_response(const std::string& text,
                                 const std::vector<int>& requested_frames,
                                 const Vocabulary& vocab,
                                 const ParseOptions& options = {});

// Salvages "Frame <id>: [object: ]<name> attention: ..., spatial: ...,
// contact: ..." lines. Relations in the wrong partition are dropped and
// diagnosed; the trailing period is optional; frames are reordered by id.
OoraPrediction parse_oora_response(const std::string& text,
                                   const std::string& object,
                                   const std::vector<int>& requested_frames,
                                   const Vocabulary& vocab,
                                   const ParseOptions& options = {});

}  // namespace lsa
