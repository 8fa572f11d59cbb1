#include "seqjudge/ast_json.hpp"

namespace seqjudge {

using nlohmann::json;

namespace {

json path_json(const std::vector<FragmentPathEntry>& path) {
  json out = json::array();
  for (const auto& p : path) out.push_back({{"fragment_id", p.fragment_id}, {"branch_index", p.branch_index}});
  return out;
}

json elements_json(const std::vector<Element>& elements);

struct NodeJson {
  json operator()(const Message& m) const {
    return {{"type", "message"},
            {"id", m.id},
            {"sender", m.sender},
            {"receiver", m.receiver},
            {"label", m.label},
            {"arrow",
             {{"line", m.arrow.line == LineStyle::dashed ? "dashed" : "solid"},
              {"head", m.arrow.head == ArrowHead::open ? "open" : "closed"},
              {"kind", to_string(m.arrow.kind())}}},
            {"is_self", m.is_self},
            {"reversed", m.reversed},
            {"enclosing_fragments", path_json(m.enclosing_fragments)},
            {"attached_notes", m.attached_notes}};
  }
  json operator()(const FragmentBlock& f) const {
    json branches = json::array();
    for (const auto& b : f.branches) {
      branches.push_back({{"guard", b.guard ? json(*b.guard) : json(nullptr)}, {"elements", elements_json(b.elements)}});
    }
    return {{"type", "fragment"},
            {"id", f.id},
            {"kind", to_string(f.kind)},
            {"branches", branches},
            {"enclosing_fragments", path_json(f.enclosing_fragments)}};
  }
  json operator()(const Note& n) const {
    return {{"type", "note"},
            {"id", n.id},
            {"position", to_string(n.position)},
            {"anchors", n.anchors},
            {"text", n.text},
            {"attached_form", n.attached_form},
            {"enclosing_fragments", path_json(n.enclosing_fragments)}};
  }
  json operator()(const Activation& a) const {
    return {{"type", "activation"},
            {"id", a.id},
            {"participant", a.participant},
            {"activate", a.activate},
            {"enclosing_fragments", path_json(a.enclosing_fragments)}};
  }
  json operator()(const Divider& v) const {
    return {{"type", "divider"},
            {"id", v.id},
            {"text", v.text},
            {"enclosing_fragments", path_json(v.enclosing_fragments)}};
  }
};

json elements_json(const std::vector<Element>& elements) {
  json out = json::array();
  for (const auto& e : elements) out.push_back(std::visit(NodeJson{}, e.node));
  return out;
}

}  // namespace

json diagram_to_json(const SequenceDiagram& d) {
  json participants = json::array();
  for (const auto& p : d.participants) {
    participants.push_back({{"name", p.name},
                            {"alias", p.alias ? json(*p.alias) : json(nullptr)},
                            {"kind", to_string(p.kind)},
                            {"declared", p.declared()},
                            {"declaration_line", p.declaration_line ? json(*p.declaration_line) : json(nullptr)}});
  }
  json spans = json::object();
  for (const auto& [id, s] : d.source_span_index) spans[id] = {{"first_line", s.first_line}, {"last_line", s.last_line}};
  return {{"title", d.title ? json(*d.title) : json(nullptr)},
          {"participants", participants},
          {"body", elements_json(d.body)},
          {"source_spans", spans}};
}

}  // namespace seqjudge
