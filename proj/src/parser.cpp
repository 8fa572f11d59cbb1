#include "seqjudge/parser.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <optional>
#include <string>
#include <utility>

#include "text_util.hpp"

namespace seqjudge {

ParseError::ParseError(int line, int column, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) +
                         ": " + message),
      line_(line),
      column_(column),
      detail_(message) {}

namespace {

using detail::lower;
using detail::trim;

bool is_ident_char(unsigned char c) {
  return std::isalnum(c) != 0 || c == '_' || c == '.' || c >= 0x80;
}

// Directives PlantUML understands that carry no structure for us.
constexpr std::array<std::string_view, 17> kKnownTrivia{
    "skinparam", "autonumber", "hide",    "show",     "header", "footer",
    "box",       "endbox",     "newpage", "destroy",  "create", "scale",
    "caption",   "mainframe",  "!theme",  "!pragma",  "|||",
};

struct ArrowToken {
  std::string_view text;
  LineStyle line;
  ArrowHead head;
  bool reversed;
};

// Longest tokens first.
constexpr std::array<ArrowToken, 8> kArrows{{
    {"<<--", LineStyle::dashed, ArrowHead::open, true},
    {"<<-", LineStyle::solid, ArrowHead::open, true},
    {"<--", LineStyle::dashed, ArrowHead::closed, true},
    {"<-", LineStyle::solid, ArrowHead::closed, true},
    {"-->>", LineStyle::dashed, ArrowHead::open, false},
    {"-->", LineStyle::dashed, ArrowHead::closed, false},
    {"->>", LineStyle::solid, ArrowHead::open, false},
    {"->", LineStyle::solid, ArrowHead::closed, false},
}};

struct Scanner {
  std::string_view text;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
  }
  bool at_end() const { return pos >= text.size(); }
  char peek() const { return at_end() ? '\0' : text[pos]; }
  int column() const { return static_cast<int>(pos) + 1; }

  // Quoted string or identifier run.
  std::optional<std::string> operand() {
    if (peek() == '"') {
      auto close = text.find('"', pos + 1);
      if (close == std::string_view::npos) return std::nullopt;
      std::string v(text.substr(pos + 1, close - pos - 1));
      pos = close + 1;
      return v;
    }
    std::size_t start = pos;
    while (!at_end() && is_ident_char(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos == start) return std::nullopt;
    return std::string(text.substr(start, pos - start));
  }

  std::optional<ArrowToken> arrow() {
    for (const auto& a : kArrows) {
      if (text.substr(pos).starts_with(a.text)) {
        pos += a.text.size();
        return a;
      }
    }
    return std::nullopt;
  }

  std::string rest() const { return std::string(trim(text.substr(std::min(pos, text.size())))); }
};

std::string first_word(std::string_view line) {
  std::size_t end = 0;
  while (end < line.size() && line[end] != ' ' && line[end] != '\t' && line[end] != '[' &&
         line[end] != ':')
    ++end;
  return lower(line.substr(0, end));
}

std::optional<std::string> strip_guard(std::string_view raw) {
  auto g = trim(raw);
  if (g.empty()) return std::nullopt;
  if (g.size() >= 2 && g.front() == '[' && g.back() == ']') {
    return std::string(g.substr(1, g.size() - 2));
  }
  return std::string(g);
}

class Parser {
 public:
  explicit Parser(std::string_view source) {
    std::size_t start = 0;
    while (start <= source.size()) {
      auto nl = source.find('\n', start);
      auto line = source.substr(start, nl == std::string_view::npos ? std::string_view::npos
                                                                     : nl - start);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      lines_.emplace_back(line);
      if (nl == std::string_view::npos) break;
      start = nl + 1;
    }
  }

  ParseResult run() {
    bool seen_start = false;
    bool ended = false;
    bool warned_missing_start = false;

    for (index_ = 0; index_ < lines_.size(); ++index_) {
      const std::string& raw = lines_[index_];
      auto line = trim(raw);
      if (line.empty()) continue;

      if (ended) {
        warn("content after @enduml ignored");
        break;
      }
      if (lower(line).starts_with("@startuml")) {
        if (seen_start) warn("repeated @startuml");
        seen_start = true;
        continue;
      }
      if (lower(line).starts_with("@enduml")) {
        ended = true;
        continue;
      }
      if (!seen_start && !warned_missing_start) {
        warn("missing @startuml");
        warned_missing_start = true;
      }
      statement(raw, line);
    }

    if (note_open_) {
      throw ParseError(note_line_, 1, "unclosed note");
    }
    if (!open_.empty()) {
      const auto& f = open_.back();
      throw ParseError(f.line, f.column,
                       "unclosed fragment '" + to_string(f.block.kind) + "'");
    }
    if (seen_start && !ended) warn_at(0, "missing @enduml");

    diagram_.trailing_trivia = std::move(pending_trivia_);
    if (diagram_.body.empty() && diagram_.participants.empty() && !diagram_.title) {
      warnings_.push_back({0, "no content"});
    }
    return {std::move(diagram_), std::move(warnings_)};
  }

 private:
  struct OpenFragment {
    FragmentBlock block;
    std::vector<std::string> trivia;
    int line = 0;
    int column = 1;
  };

  int line_no() const { return static_cast<int>(index_) + 1; }
  void warn(const std::string& msg) { warnings_.push_back({line_no(), msg}); }
  void warn_at(int line, const std::string& msg) { warnings_.push_back({line, msg}); }

  std::vector<Element>& target() {
    return open_.empty() ? diagram_.body : open_.back().block.branches.back().elements;
  }

  std::vector<FragmentPathEntry> path() const {
    std::vector<FragmentPathEntry> out;
    for (const auto& f : open_) out.push_back({f.block.id, f.block.branches.size() - 1});
    return out;
  }

  void forget_last_message() { last_message_.reset(); }

  void push(ElementNode node, int first_line, int last_line) {
    Element e{std::move(node), std::move(pending_trivia_)};
    pending_trivia_.clear();
    diagram_.source_span_index[e.id()] = {first_line, last_line};
    target().push_back(std::move(e));
  }

  Message* last_message() {
    if (!last_message_) return nullptr;
    auto& t = target();
    if (*last_message_ >= t.size()) return nullptr;
    return std::get_if<Message>(&t[*last_message_].node);
  }

  std::string resolve(const std::string& ref) {
    for (const auto& p : diagram_.participants) {
      if (p.key() == ref) return p.key();
    }
    for (const auto& p : diagram_.participants) {
      if (p.alias && p.name == ref) return p.key();
    }
    diagram_.participants.push_back({ref, std::nullopt, ParticipantKind::participant,
                                     std::nullopt, {}});
    return ref;
  }

  void trivia(std::string text, bool unknown) {
    if (unknown) warn("unrecognized line kept as trivia: " + text);
    pending_trivia_.push_back(std::move(text));
  }

  void statement(const std::string& raw, std::string_view line) {
    const int column = static_cast<int>(raw.find_first_not_of(" \t")) + 1;

    if (note_open_) {
      note_line(line);
      return;
    }
    if (line.starts_with("'")) {
      trivia(std::string(line), false);
      return;
    }
    if (line.starts_with("/'")) {
      block_comment(line);
      return;
    }

    const std::string word = first_word(line);
    const std::string lowered = lower(line);

    if (auto kind = participant_kind_from(word)) {
      declaration(*kind, line.substr(word.size()), column);
      return;
    }
    if (word == "title") {
      if (diagram_.title) warn("title redefined");
      diagram_.title = std::string(trim(line.substr(5)));
      forget_last_message();
      return;
    }
    if (word == "note") {
      note(line.substr(4), column);
      return;
    }
    if (word == "activate" || word == "deactivate") {
      activation(word == "activate", line.substr(word.size()), column);
      return;
    }
    if (auto kind = fragment_kind_from(word)) {
      open_fragment(*kind, line.substr(word.size()), column);
      return;
    }
    if (word == "else") {
      else_branch(line.substr(4), column);
      return;
    }
    if (lowered == "end") {
      close_fragment(column);
      return;
    }
    if (lowered == "end box") {
      trivia(std::string(line), false);
      return;
    }
    if (line.size() >= 4 && line.starts_with("==") && line.ends_with("==")) {
      auto text = trim(line.substr(2, line.size() - 4));
      Divider div{"v" + std::to_string(dividers_++), std::string(text), path()};
      push(std::move(div), line_no(), line_no());
      forget_last_message();
      return;
    }
    if (std::find(kKnownTrivia.begin(), kKnownTrivia.end(), word) != kKnownTrivia.end() ||
        line == "..." || line.starts_with("||")) {
      if (word == "skinparam" && line.ends_with("{")) {
        skinparam_block(line);
      } else {
        trivia(std::string(line), false);
      }
      return;
    }
    if (message(raw)) return;
    trivia(std::string(line), true);
  }

  void block_comment(std::string_view first) {
    std::string text(first);
    const int start = line_no();
    while (text.find("'/") == std::string::npos) {
      if (index_ + 1 >= lines_.size()) {
        warn_at(start, "unterminated block comment");
        break;
      }
      ++index_;
      text += "\n" + lines_[index_];
    }
    trivia(std::move(text), false);
  }

  void skinparam_block(std::string_view first) {
    std::string text(first);
    while (index_ + 1 < lines_.size()) {
      ++index_;
      text += "\n" + lines_[index_];
      if (trim(lines_[index_]) == "}") break;
    }
    trivia(std::move(text), false);
  }

  void declaration(ParticipantKind kind, std::string_view rest_in, int column) {
    Scanner s{rest_in};
    s.skip_ws();
    const bool first_quoted = s.peek() == '"';
    auto first = s.operand();
    if (!first) {
      throw ParseError(line_no(), column, "participant declaration without a name");
    }
    std::string name = *first;
    std::optional<std::string> alias;
    s.skip_ws();
    if (s.text.substr(s.pos).starts_with("as ") || s.text.substr(s.pos).starts_with("as\t")) {
      s.pos += 2;
      s.skip_ws();
      const bool second_quoted = s.peek() == '"';
      auto second = s.operand();
      if (!second) {
        throw ParseError(line_no(), column + static_cast<int>(s.pos), "missing alias after 'as'");
      }
      // The unquoted side is the reference key.
      if (!first_quoted && second_quoted) {
        alias = name;
        name = *second;
      } else {
        alias = *second;
      }
    }
    const std::string decoration = s.rest();
    const std::string key = alias ? *alias : name;

    for (auto& p : diagram_.participants) {
      if (p.key() != key) continue;
      if (p.declared()) {
        warn("duplicate declaration of participant '" + key + "' ignored");
        return;
      }
      p.name = name;
      p.alias = alias;
      p.kind = kind;
      p.declaration_line = line_no();
      p.decoration = decoration;
      return;
    }
    diagram_.participants.push_back({name, alias, kind, line_no(), decoration});
  }

  std::vector<std::string> anchors(Scanner& s, int column) {
    std::vector<std::string> out;
    while (true) {
      s.skip_ws();
      auto a = s.operand();
      if (!a) {
        throw ParseError(line_no(), column + static_cast<int>(s.pos), "note anchor expected");
      }
      out.push_back(resolve(*a));
      s.skip_ws();
      if (s.peek() != ',') break;
      ++s.pos;
    }
    return out;
  }

  void note(std::string_view rest_in, int column) {
    Scanner s{rest_in};
    s.skip_ws();
    auto pos_word = s.operand();
    Note n;
    n.id = "n" + std::to_string(notes_++);
    n.enclosing_fragments = path();
    if (pos_word == "left") {
      n.position = NotePosition::left;
    } else if (pos_word == "right") {
      n.position = NotePosition::right;
    } else if (pos_word == "over") {
      n.position = NotePosition::over;
    } else {
      throw ParseError(line_no(), column, "note position must be left, right or over");
    }
    s.skip_ws();
    if (n.position == NotePosition::over) {
      n.anchors = anchors(s, column);
    } else if (s.text.substr(s.pos).starts_with("of")) {
      s.pos += 2;
      n.anchors = anchors(s, column);
      if (n.anchors.size() != 1) {
        throw ParseError(line_no(), column, "left/right note must have exactly one anchor");
      }
    } else {
      const Message* m = last_message();
      if (m == nullptr) {
        throw ParseError(line_no(), column, "note without anchor must follow a message");
      }
      n.attached_form = true;
      n.anchors = {n.position == NotePosition::left ? m->sender : m->receiver};
    }
    s.skip_ws();
    if (s.peek() == '#') {  // background color, not kept
      while (!s.at_end() && s.peek() != ' ' && s.peek() != ':') ++s.pos;
      s.skip_ws();
    }
    if (s.peek() == ':') {
      ++s.pos;
      n.text = s.rest();
      finish_note(std::move(n), line_no());
      return;
    }
    if (!s.at_end()) {
      throw ParseError(line_no(), column + static_cast<int>(s.pos), "unexpected text in note");
    }
    note_open_ = std::move(n);
    note_line_ = line_no();
    note_lines_.clear();
  }

  void note_line(std::string_view line) {
    const auto l = lower(line);
    if (l == "end note" || l == "endnote") {
      Note n = std::move(*note_open_);
      note_open_.reset();
      std::string text;
      for (std::size_t i = 0; i < note_lines_.size(); ++i) {
        if (i) text += '\n';
        text += note_lines_[i];
      }
      n.text = std::move(text);
      finish_note(std::move(n), note_line_);
      return;
    }
    note_lines_.emplace_back(line);
  }

  void finish_note(Note n, int first_line) {
    if (Message* m = last_message()) {
      const bool on_message =
          n.attached_form || std::all_of(n.anchors.begin(), n.anchors.end(), [&](const auto& a) {
            return a == m->sender || a == m->receiver;
          });
      if (on_message) m->attached_notes.push_back(n.id);
    }
    push(std::move(n), first_line, line_no());
  }

  void activation(bool activate, std::string_view rest_in, int column) {
    Scanner s{rest_in};
    s.skip_ws();
    auto who = s.operand();
    if (!who) throw ParseError(line_no(), column, "activation without participant");
    Activation a{"a" + std::to_string(activations_++), resolve(*who), activate, path()};
    push(std::move(a), line_no(), line_no());
    forget_last_message();
  }

  void open_fragment(FragmentKind kind, std::string_view rest, int column) {
    OpenFragment f;
    f.block.id = "f" + std::to_string(fragments_++);
    f.block.kind = kind;
    f.block.enclosing_fragments = path();
    f.block.branches.push_back({strip_guard(rest), {}});
    f.trivia = std::move(pending_trivia_);
    pending_trivia_.clear();
    f.line = line_no();
    f.column = column;
    open_.push_back(std::move(f));
    forget_last_message();
  }

  void else_branch(std::string_view rest, int column) {
    if (open_.empty() ||
        (open_.back().block.kind != FragmentKind::alt && open_.back().block.kind != FragmentKind::par)) {
      throw ParseError(line_no(), column, "'else' outside 'alt'");
    }
    open_.back().block.branches.push_back({strip_guard(rest), {}});
    forget_last_message();
  }

  void close_fragment(int column) {
    if (open_.empty()) throw ParseError(line_no(), column, "'end' without open fragment");
    OpenFragment f = std::move(open_.back());
    open_.pop_back();
    // Trivia seen just before `end` stays pending for the next element.
    auto pending = std::move(pending_trivia_);
    pending_trivia_ = std::move(f.trivia);
    push(std::move(f.block), f.line, line_no());
    pending_trivia_ = std::move(pending);
    forget_last_message();
  }

  bool message(const std::string& raw) {
    Scanner s{raw};
    s.skip_ws();
    const int start_col = s.column();
    auto lhs = s.operand();
    if (!lhs) {
      if (s.arrow()) throw ParseError(line_no(), start_col, "message with missing arrow operand");
      return false;
    }
    s.skip_ws();
    auto arrow = s.arrow();
    if (!arrow) return false;
    if (std::string_view("<>-\\/xo").find(s.peek()) != std::string_view::npos && !s.at_end()) {
      return false;  // unsupported arrow decoration
    }
    s.skip_ws();
    const int rhs_col = s.column();
    auto rhs = s.operand();
    if (!rhs) throw ParseError(line_no(), rhs_col, "message with missing arrow operand");
    s.skip_ws();
    std::string label;
    if (!s.at_end()) {
      if (s.peek() != ':') return false;
      ++s.pos;
      label = s.rest();
    }

    const std::string left = resolve(*lhs);
    const std::string right = resolve(*rhs);
    Message m;
    m.id = "m" + std::to_string(messages_++);
    m.sender = arrow->reversed ? right : left;
    m.receiver = arrow->reversed ? left : right;
    m.label = std::move(label);
    m.arrow = {arrow->line, arrow->head};
    m.is_self = m.sender == m.receiver;
    m.reversed = arrow->reversed;
    m.enclosing_fragments = path();
    push(std::move(m), line_no(), line_no());
    last_message_ = target().size() - 1;
    return true;
  }

  std::vector<std::string> lines_;
  std::size_t index_ = 0;
  SequenceDiagram diagram_;
  std::vector<Warning> warnings_;
  std::vector<OpenFragment> open_;
  std::vector<std::string> pending_trivia_;
  std::optional<std::size_t> last_message_;  // index into target()
  std::optional<Note> note_open_;
  std::vector<std::string> note_lines_;
  int note_line_ = 0;
  int messages_ = 0;
  int fragments_ = 0;
  int notes_ = 0;
  int activations_ = 0;
  int dividers_ = 0;
};

}  // namespace

ParseResult parse_diagram(std::string_view source) { return Parser(source).run(); }

}  // namespace seqjudge
