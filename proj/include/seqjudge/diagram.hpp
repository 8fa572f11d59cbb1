#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace seqjudge {

enum class ParticipantKind { participant, actor, database, boundary, control, entity, collections };

enum class LineStyle { solid, dashed };
enum class ArrowHead { closed, open };
enum class MessageKind { sync, async, return_ };

/// Surface arrow of a message. The semantic kind is derived: dashed lines are
/// returns, solid open heads (`->>`) are async, everything else is sync.
struct ArrowStyle {
  LineStyle line = LineStyle::solid;
  ArrowHead head = ArrowHead::closed;

  MessageKind kind() const {
    if (line == LineStyle::dashed) return MessageKind::return_;
    return head == ArrowHead::open ? MessageKind::async : MessageKind::sync;
  }

  bool operator==(const ArrowStyle&) const = default;
};

struct Participant {
  std::string name;
  std::optional<std::string> alias;
  ParticipantKind kind = ParticipantKind::participant;
  std::optional<int> declaration_line;  // absent for implicit participants
  std::string decoration;  // trailing stereotype/color text on the declaration, opaque

  /// Key used by messages, notes and activations to refer to this participant.
  const std::string& key() const { return alias ? *alias : name; }
  bool declared() const { return declaration_line.has_value(); }

  // Source positions are not structural.
  bool operator==(const Participant& o) const {
    return name == o.name && alias == o.alias && kind == o.kind && declared() == o.declared();
  }
};

struct FragmentPathEntry {
  std::string fragment_id;
  std::size_t branch_index = 0;
  bool operator==(const FragmentPathEntry&) const = default;
};

struct Message {
  std::string id;
  std::string sender;
  std::string receiver;
  std::string label;
  ArrowStyle arrow;
  bool is_self = false;
  bool reversed = false;  // written as `A <- B` in the source
  std::vector<FragmentPathEntry> enclosing_fragments;  // innermost last
  std::vector<std::string> attached_notes;

  bool operator==(const Message&) const = default;
};

enum class NotePosition { left, right, over };

struct Note {
  std::string id;
  NotePosition position = NotePosition::over;
  std::vector<std::string> anchors;
  std::string text;  // lines joined with '\n'
  bool attached_form = false;  // `note left: ...` with no `of`, bound to the previous message
  std::vector<FragmentPathEntry> enclosing_fragments;

  bool operator==(const Note&) const = default;
};

struct Activation {
  std::string id;
  std::string participant;
  bool activate = true;
  std::vector<FragmentPathEntry> enclosing_fragments;

  bool operator==(const Activation&) const = default;
};

struct Divider {
  std::string id;
  std::string text;
  std::vector<FragmentPathEntry> enclosing_fragments;

  bool operator==(const Divider&) const = default;
};

enum class FragmentKind { alt, opt, loop, par, break_, critical, group };

struct Element;

struct FragmentBranch {
  std::optional<std::string> guard;
  std::vector<Element> elements;

  bool operator==(const FragmentBranch& o) const;
};

struct FragmentBlock {
  std::string id;
  FragmentKind kind = FragmentKind::alt;
  std::vector<FragmentBranch> branches;
  std::vector<FragmentPathEntry> enclosing_fragments;

  bool operator==(const FragmentBlock& o) const;
};

using ElementNode = std::variant<Message, FragmentBlock, Note, Activation, Divider>;

struct Element {
  ElementNode node;
  /// Recognized-but-unsupported directives and unknown lines that preceded
  /// this element in the source. Not part of structural equality.
  std::vector<std::string> trivia;

  const std::string& id() const;

  bool operator==(const Element& o) const { return node == o.node; }
};

struct SourceSpan {
  int first_line = 0;
  int last_line = 0;
  bool operator==(const SourceSpan&) const = default;
};

struct SequenceDiagram {
  std::optional<std::string> title;
  std::vector<Participant> participants;
  std::vector<Element> body;
  std::vector<std::string> trailing_trivia;
  std::map<std::string, SourceSpan> source_span_index;

  const Participant* find_participant(const std::string& key) const;

  /// Structural equality: trivia and source positions excluded.
  bool operator==(const SequenceDiagram& o) const {
    return title == o.title && participants == o.participants && body == o.body;
  }
};

struct Warning {
  int line = 0;  // 0 when not tied to a line
  std::string message;
  bool operator==(const Warning&) const = default;
};

std::string to_string(ParticipantKind k);
std::string to_string(FragmentKind k);
std::string to_string(MessageKind k);
std::string to_string(NotePosition p);
std::optional<ParticipantKind> participant_kind_from(std::string_view s);
std::optional<FragmentKind> fragment_kind_from(std::string_view s);

/// Depth-first, document-order walk over every message in the diagram.
std::vector<const Message*> collect_messages(const SequenceDiagram& d);

template <typename Fn>
void for_each_element(const std::vector<Element>& elements, Fn&& fn) {
  for (const auto& e : elements) {
    fn(e);
    if (const auto* f = std::get_if<FragmentBlock>(&e.node)) {
      for (const auto& b : f->branches) for_each_element(b.elements, fn);
    }
  }
}

}  // namespace seqjudge
