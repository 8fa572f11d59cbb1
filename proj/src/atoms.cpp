#include "seqjudge/atoms.hpp"

#include <charconv>
#include <map>

#include "seqjudge/parser.hpp"
#include "text_util.hpp"

namespace seqjudge {

std::vector<DiagramAtom> extract_diagram_atoms(const SequenceDiagram& d) {
  std::vector<DiagramAtom> out;
  for (const Message* m : collect_messages(d)) {
    const std::size_t k = out.size();
    out.push_back({"D" + std::to_string(k), m->id, m->sender, m->receiver, m->label, m->arrow, k});
  }
  return out;
}

std::string render_message(const Message& m) {
  std::string s = quote_reference(m.sender) + " " + arrow_token(m.arrow) + " " +
                  quote_reference(m.receiver);
  if (!m.label.empty()) s += ": " + m.label;
  return s;
}

std::string render_atom(const DiagramAtom& a) {
  std::string s = quote_reference(a.sender) + " " + arrow_token(a.arrow) + " " +
                  quote_reference(a.receiver);
  if (!a.label.empty()) s += ": " + a.label;
  return s;
}

AtomContext atom_context(const SequenceDiagram& d, std::string_view atom_id, std::size_t k) {
  const auto messages = collect_messages(d);
  const std::size_t index = atom_index(atom_id);
  if (index >= messages.size() || atom_id.front() != 'D') {
    throw UnknownAtom(std::string(atom_id));
  }

  AtomContext ctx;
  ctx.atom_id = std::string(atom_id);
  const std::size_t lo = index > k ? index - k : 0;
  for (std::size_t i = lo; i < index; ++i) ctx.preceding.push_back(render_message(*messages[i]));
  const std::size_t remaining = messages.size() - index - 1;
  const std::size_t hi = index + 1 + std::min(k, remaining);
  for (std::size_t i = index + 1; i < hi; ++i) ctx.following.push_back(render_message(*messages[i]));

  std::map<std::string, const FragmentBlock*> fragments;
  std::map<std::string, const Note*> notes;
  for_each_element(d.body, [&](const Element& e) {
    if (const auto* f = std::get_if<FragmentBlock>(&e.node)) fragments[f->id] = f;
    if (const auto* n = std::get_if<Note>(&e.node)) notes[n->id] = n;
  });

  const Message& m = *messages[index];
  for (const auto& entry : m.enclosing_fragments) {
    const FragmentBlock* f = fragments.at(entry.fragment_id);
    ctx.enclosing_guards.push_back({f->kind, f->branches.at(entry.branch_index).guard});
  }
  for (const auto& id : m.attached_notes) ctx.attached_notes.push_back(notes.at(id)->text);
  return ctx;
}

RequirementAtom make_requirement_atom(std::size_t index, std::string_view text,
                                      std::string_view document) {
  std::string t(detail::trim(text));
  auto terminal = [](char c) { return c == '.' || c == '!' || c == '?' || c == ';'; };
  while (t.size() >= 2 && terminal(t.back()) && terminal(t[t.size() - 2])) t.pop_back();
  if (t.empty()) throw std::invalid_argument("empty requirement atom");

  RequirementAtom a{"R" + std::to_string(index), t, std::nullopt};
  if (!document.empty()) {
    auto pos = document.find(t);
    if (pos != std::string_view::npos) a.source_span = TextSpan{pos, pos + t.size()};
  }
  return a;
}

std::size_t atom_index(std::string_view atom_id) {
  std::size_t value = kWholeDiagram;
  if (atom_id.size() < 2) return value;
  auto digits = atom_id.substr(1);
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc{} || ptr != digits.data() + digits.size()) return kWholeDiagram;
  return value;
}

}  // namespace seqjudge
