#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "seqjudge/diagram.hpp"

namespace seqjudge {

/// One message with its two participants, in document order.
struct DiagramAtom {
  std::string atom_id;  // "D<ordinal>"
  std::string message_id;
  std::string sender;
  std::string receiver;
  std::string label;
  ArrowStyle arrow;
  std::size_t ordinal = 0;

  bool operator==(const DiagramAtom&) const = default;
};

struct GuardEntry {
  FragmentKind kind = FragmentKind::alt;
  std::optional<std::string> guard;
  bool operator==(const GuardEntry&) const = default;
};

struct AtomContext {
  std::string atom_id;
  std::vector<std::string> preceding;  // rendered messages, document order
  std::vector<std::string> following;
  std::vector<GuardEntry> enclosing_guards;  // innermost last
  std::vector<std::string> attached_notes;
};

struct TextSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  bool operator==(const TextSpan&) const = default;
};

/// One self-contained requirement sentence with at most one action.
struct RequirementAtom {
  std::string atom_id;  // "R<k>"
  std::string text;
  std::optional<TextSpan> source_span;

  bool operator==(const RequirementAtom&) const = default;
};

class UnknownAtom : public std::out_of_range {
 public:
  explicit UnknownAtom(const std::string& id) : std::out_of_range("unknown atom '" + id + "'") {}
};

inline constexpr std::size_t kWholeDiagram = std::numeric_limits<std::size_t>::max();
inline constexpr std::size_t kDefaultContextWindow = 2;

std::vector<DiagramAtom> extract_diagram_atoms(const SequenceDiagram& d);

/// Up to `k` neighbouring messages on each side (crossing fragment
/// boundaries), plus the guards of every enclosing fragment branch and the
/// texts of notes attached to the message.
AtomContext atom_context(const SequenceDiagram& d, std::string_view atom_id,
                         std::size_t k = kDefaultContextWindow);

/// "SENDER -> RECEIVER: LABEL" in canonical forward arrow syntax.
std::string render_atom(const DiagramAtom& a);
std::string render_message(const Message& m);

/// Builds a requirement atom, trimming whitespace and collapsing repeated
/// terminal punctuation. Throws std::invalid_argument on empty text.
RequirementAtom make_requirement_atom(std::size_t index, std::string_view text,
                                      std::string_view document = {});

/// Numeric part of an atom id ("D12" -> 12); npos-like max on malformed ids.
std::size_t atom_index(std::string_view atom_id);

}  // namespace seqjudge
