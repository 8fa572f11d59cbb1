#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "seqjudge/diagram.hpp"

namespace seqjudge {

/// Structurally invalid diagram text. Parsing stops at the first one.
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int column, const std::string& message);

  int line() const { return line_; }
  int column() const { return column_; }
  const std::string& detail() const { return detail_; }

 private:
  int line_;
  int column_;
  std::string detail_;
};

struct ParseResult {
  SequenceDiagram diagram;
  std::vector<Warning> warnings;
};

/// Parses the sequence-diagram subset of PlantUML.
///
/// Unknown lines and unsupported directives become trivia attached to the
/// next element; unknown ones also produce a warning. Reversed arrows are
/// normalized so that `sender` is always the originating participant.
ParseResult parse_diagram(std::string_view source);

/// Canonical PlantUML text for a diagram. Total over well-formed ASTs.
std::string serialize_diagram(const SequenceDiagram& d);

/// Structural warnings: unused declared participants, unbalanced
/// activations and empty fragment branches.
std::vector<Warning> lint_diagram(const SequenceDiagram& d);

/// Canonical arrow token for a style, e.g. "->", "-->>" or (reversed) "<--".
std::string arrow_token(const ArrowStyle& a, bool reversed = false);

/// Quotes a participant reference when it is not a bare identifier.
std::string quote_reference(const std::string& name);

}  // namespace seqjudge
