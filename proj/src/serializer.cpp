#include <algorithm>
#include <map>
#include <set>
#include <string>

#include "seqjudge/parser.hpp"

namespace seqjudge {

std::string arrow_token(const ArrowStyle& a, bool reversed) {
  const std::string shaft = a.line == LineStyle::dashed ? "--" : "-";
  const std::string head = a.head == ArrowHead::open ? (reversed ? "<<" : ">>") : (reversed ? "<" : ">");
  return reversed ? head + shaft : shaft + head;
}

std::string quote_reference(const std::string& name) {
  const bool bare = !name.empty() && std::all_of(name.begin(), name.end(), [](char ch) {
    auto c = static_cast<unsigned char>(ch);
    return std::isalnum(c) != 0 || c == '_' || c == '.' || c >= 0x80;
  });
  return bare ? name : "\"" + name + "\"";
}

namespace {

std::string guard_suffix(const std::optional<std::string>& guard) {
  return guard ? " [" + *guard + "]" : "";
}

// Emits participant declarations so that re-parsing introduces participants
// in exactly the original order: a declaration goes before the element that
// first needs it, or right after the element when that element also
// introduces an earlier implicit participant.
class Writer {
 public:
  explicit Writer(const SequenceDiagram& d) : d_(d) {
    for (std::size_t i = 0; i < d.participants.size(); ++i) index_[d.participants[i].key()] = i;
  }

  std::string run() {
    out_ = "@startuml\n";
    if (d_.title) out_ += "title " + *d_.title + "\n";
    elements(d_.body, 0);
    std::vector<std::string> tail;
    while (next_ < d_.participants.size()) {
      if (d_.participants[next_].declared()) tail.push_back(declaration(d_.participants[next_]));
      ++next_;
    }
    for (const auto& line : tail) out_ += line + "\n";
    for (const auto& t : d_.trailing_trivia) out_ += t + "\n";
    out_ += "@enduml\n";
    return out_;
  }

 private:
  static std::string declaration(const Participant& p) {
    std::string s = to_string(p.kind) + " " + quote_reference(p.name);
    if (p.alias) s += " as " + quote_reference(*p.alias);
    if (!p.decoration.empty()) s += " " + p.decoration;
    return s;
  }

  void line(int depth, const std::string& text) {
    out_.append(static_cast<std::size_t>(depth) * 2, ' ');
    out_ += text;
    out_ += '\n';
  }

  void introduce(const std::vector<std::string>& refs, int depth,
                 std::vector<std::string>& after) {
    bool implicit_seen = false;
    for (const auto& r : refs) {
      auto it = index_.find(r);
      if (it == index_.end() || it->second < next_) continue;
      const std::size_t j = it->second;
      for (; next_ < j; ++next_) {
        if (d_.participants[next_].declared()) line(depth, declaration(d_.participants[next_]));
      }
      const auto& p = d_.participants[j];
      if (p.declared()) {
        if (implicit_seen) {
          after.push_back(declaration(p));
        } else {
          line(depth, declaration(p));
        }
      } else {
        implicit_seen = true;
      }
      next_ = j + 1;
    }
  }

  void elements(const std::vector<Element>& body, int depth) {
    for (const auto& e : body) {
      for (const auto& t : e.trivia) line(depth, t);
      std::vector<std::string> after;
      std::visit([&](const auto& n) { element(n, depth, after); }, e.node);
      for (const auto& a : after) line(depth, a);
    }
  }

  void element(const Message& m, int depth, std::vector<std::string>& after) {
    const std::string& left = m.reversed ? m.receiver : m.sender;
    const std::string& right = m.reversed ? m.sender : m.receiver;
    introduce({left, right}, depth, after);
    std::string s = quote_reference(left) + " " + arrow_token(m.arrow, m.reversed) + " " +
                    quote_reference(right);
    if (!m.label.empty()) s += ": " + m.label;
    line(depth, s);
  }

  void element(const Note& n, int depth, std::vector<std::string>& after) {
    introduce(n.anchors, depth, after);
    std::string head = "note " + to_string(n.position);
    if (!n.attached_form) {
      head += n.position == NotePosition::over ? " " : " of ";
      for (std::size_t i = 0; i < n.anchors.size(); ++i) {
        if (i) head += ", ";
        head += quote_reference(n.anchors[i]);
      }
    }
    if (n.text.find('\n') == std::string::npos) {
      line(depth, head + ": " + n.text);
      return;
    }
    line(depth, head);
    std::size_t start = 0;
    while (true) {
      auto nl = n.text.find('\n', start);
      line(depth + 1, n.text.substr(start, nl == std::string::npos ? std::string::npos : nl - start));
      if (nl == std::string::npos) break;
      start = nl + 1;
    }
    line(depth, "end note");
  }

  void element(const Activation& a, int depth, std::vector<std::string>& after) {
    introduce({a.participant}, depth, after);
    line(depth, (a.activate ? "activate " : "deactivate ") + quote_reference(a.participant));
  }

  void element(const Divider& v, int depth, std::vector<std::string>&) {
    line(depth, "== " + v.text + " ==");
  }

  void element(const FragmentBlock& f, int depth, std::vector<std::string>&) {
    for (std::size_t i = 0; i < f.branches.size(); ++i) {
      const auto& b = f.branches[i];
      line(depth, (i == 0 ? to_string(f.kind) : std::string("else")) + guard_suffix(b.guard));
      elements(b.elements, depth + 1);
    }
    line(depth, "end");
  }

  const SequenceDiagram& d_;
  std::map<std::string, std::size_t> index_;
  std::size_t next_ = 0;
  std::string out_;
};

}  // namespace

std::string serialize_diagram(const SequenceDiagram& d) { return Writer(d).run(); }

std::vector<Warning> lint_diagram(const SequenceDiagram& d) {
  std::vector<Warning> out;
  std::set<std::string> used;
  std::map<std::string, int> depth;
  std::vector<std::string> depth_order;

  auto line_of = [&](const std::string& id) {
    auto it = d.source_span_index.find(id);
    return it == d.source_span_index.end() ? 0 : it->second.first_line;
  };

  for_each_element(d.body, [&](const Element& e) {
    if (const auto* m = std::get_if<Message>(&e.node)) {
      used.insert(m->sender);
      used.insert(m->receiver);
    } else if (const auto* n = std::get_if<Note>(&e.node)) {
      used.insert(n->anchors.begin(), n->anchors.end());
    } else if (const auto* a = std::get_if<Activation>(&e.node)) {
      used.insert(a->participant);
      if (!depth.contains(a->participant)) depth_order.push_back(a->participant);
      int& level = depth[a->participant];
      if (a->activate) {
        ++level;
      } else if (level == 0) {
        out.push_back({line_of(a->id), "deactivate of '" + a->participant + "' without activate"});
      } else {
        --level;
      }
    } else if (const auto* f = std::get_if<FragmentBlock>(&e.node)) {
      for (std::size_t i = 0; i < f->branches.size(); ++i) {
        if (f->branches[i].elements.empty()) {
          out.push_back({line_of(f->id), "empty branch " + std::to_string(i) + " in '" +
                                             to_string(f->kind) + "' fragment"});
        }
      }
    }
  });

  for (const auto& p : d.participants) {
    if (p.declared() && !used.contains(p.key())) {
      out.push_back({*p.declaration_line, "participant '" + p.key() + "' is declared but never used"});
    }
  }
  for (const auto& who : depth_order) {
    if (depth[who] > 0) {
      out.push_back({0, "activation of '" + who + "' without deactivation"});
    }
  }
  return out;
}

}  // namespace seqjudge
