#include "seqjudge/diagram.hpp"

#include <array>
#include <utility>

namespace seqjudge {

namespace {

constexpr std::array<std::pair<ParticipantKind, std::string_view>, 7> kParticipantKinds{{
    {ParticipantKind::participant, "participant"},
    {ParticipantKind::actor, "actor"},
    {ParticipantKind::database, "database"},
    {ParticipantKind::boundary, "boundary"},
    {ParticipantKind::control, "control"},
    {ParticipantKind::entity, "entity"},
    {ParticipantKind::collections, "collections"},
}};

constexpr std::array<std::pair<FragmentKind, std::string_view>, 7> kFragmentKinds{{
    {FragmentKind::alt, "alt"},
    {FragmentKind::opt, "opt"},
    {FragmentKind::loop, "loop"},
    {FragmentKind::par, "par"},
    {FragmentKind::break_, "break"},
    {FragmentKind::critical, "critical"},
    {FragmentKind::group, "group"},
}};

void collect(const std::vector<Element>& elements, std::vector<const Message*>& out) {
  for (const auto& e : elements) {
    if (const auto* m = std::get_if<Message>(&e.node)) {
      out.push_back(m);
    } else if (const auto* f = std::get_if<FragmentBlock>(&e.node)) {
      for (const auto& b : f->branches) collect(b.elements, out);
    }
  }
}

}  // namespace

bool FragmentBranch::operator==(const FragmentBranch& o) const {
  return guard == o.guard && elements == o.elements;
}

bool FragmentBlock::operator==(const FragmentBlock& o) const {
  return id == o.id && kind == o.kind && branches == o.branches &&
         enclosing_fragments == o.enclosing_fragments;
}

const std::string& Element::id() const {
  return std::visit([](const auto& n) -> const std::string& { return n.id; }, node);
}

const Participant* SequenceDiagram::find_participant(const std::string& key) const {
  for (const auto& p : participants) {
    if (p.key() == key) return &p;
  }
  return nullptr;
}

std::string to_string(ParticipantKind k) {
  for (const auto& [kind, name] : kParticipantKinds) {
    if (kind == k) return std::string(name);
  }
  return "participant";
}

std::string to_string(FragmentKind k) {
  for (const auto& [kind, name] : kFragmentKinds) {
    if (kind == k) return std::string(name);
  }
  return "group";
}

std::string to_string(MessageKind k) {
  switch (k) {
    case MessageKind::sync: return "sync";
    case MessageKind::async: return "async";
    case MessageKind::return_: return "return";
  }
  return "sync";
}

std::string to_string(NotePosition p) {
  switch (p) {
    case NotePosition::left: return "left";
    case NotePosition::right: return "right";
    case NotePosition::over: return "over";
  }
  return "over";
}

std::optional<ParticipantKind> participant_kind_from(std::string_view s) {
  for (const auto& [kind, name] : kParticipantKinds) {
    if (name == s) return kind;
  }
  return std::nullopt;
}

std::optional<FragmentKind> fragment_kind_from(std::string_view s) {
  for (const auto& [kind, name] : kFragmentKinds) {
    if (name == s) return kind;
  }
  return std::nullopt;
}

std::vector<const Message*> collect_messages(const SequenceDiagram& d) {
  std::vector<const Message*> out;
  collect(d.body, out);
  return out;
}

}  // namespace seqjudge
