#include <gtest/gtest.h>

#include "seqjudge/atoms.hpp"
#include "seqjudge/parser.hpp"
#include "test_support.hpp"

namespace seqjudge {
namespace {

SequenceDiagram user_data() { return parse_diagram(test::read_fixture("diagrams/user_data.puml")).diagram; }

TEST(ExtractDiagramAtoms, SingleMessage) {
  auto atoms = extract_diagram_atoms(parse_diagram("Alice -> Bob: Authenticate").diagram);
  ASSERT_EQ(atoms.size(), 1u);
  EXPECT_EQ(atoms[0].atom_id, "D0");
  EXPECT_EQ(atoms[0].sender, "Alice");
  EXPECT_EQ(atoms[0].receiver, "Bob");
  EXPECT_EQ(atoms[0].label, "Authenticate");
}

TEST(ExtractDiagramAtoms, Empty) { EXPECT_TRUE(extract_diagram_atoms(SequenceDiagram{}).empty()); }

TEST(ExtractDiagramAtoms, UserData) {
  auto atoms = extract_diagram_atoms(user_data());
  ASSERT_EQ(atoms.size(), 6u);
  const auto& d3 = atoms[3];
  EXPECT_EQ(d3.atom_id, "D3");
  EXPECT_EQ(d3.sender, "Cat");
  EXPECT_EQ(d3.receiver, "Bob");
  EXPECT_EQ(d3.label, "Return data");
  EXPECT_EQ(d3.arrow.line, LineStyle::dashed);
  EXPECT_EQ(d3.arrow.kind(), MessageKind::return_);
  EXPECT_EQ(atoms[4].receiver, "Cat");
  EXPECT_EQ(atoms[4].label, "Display data");
  EXPECT_EQ(atoms[5].label, "Show error");
}

TEST(ExtractDiagramAtoms, OneAtomPerMessageOverCorpus) {
  for (const auto& path : test::corpus_files()) {
    const auto text = test::read_file(path);
    auto d = parse_diagram(text).diagram;
    auto atoms = extract_diagram_atoms(d);
    EXPECT_EQ(atoms.size(), test::count_message_lines(text)) << path;
    const auto msgs = collect_messages(d);
    ASSERT_EQ(atoms.size(), msgs.size());
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      EXPECT_EQ(atoms[i].ordinal, i);
      EXPECT_EQ(atoms[i].message_id, msgs[i]->id);
      EXPECT_EQ(atoms[i].sender, msgs[i]->sender);
      EXPECT_EQ(atoms[i].receiver, msgs[i]->receiver);
      EXPECT_EQ(atoms[i].label, msgs[i]->label);
      EXPECT_EQ(atoms[i].arrow, msgs[i]->arrow);
    }
  }
}

TEST(AtomContext, GuardsOfShowError) {
  auto d = user_data();
  auto ctx = atom_context(d, "D5", 2);
  ASSERT_EQ(ctx.enclosing_guards.size(), 1u);
  EXPECT_EQ(ctx.enclosing_guards[0].kind, FragmentKind::alt);
  EXPECT_EQ(ctx.enclosing_guards[0].guard, "Exception");
  EXPECT_EQ(ctx.preceding.size(), 2u);
  EXPECT_TRUE(ctx.following.empty());
}

TEST(AtomContext, PrecedingOfReturnData) {
  auto ctx = atom_context(user_data(), "D3", 1);
  ASSERT_EQ(ctx.preceding.size(), 1u);
  EXPECT_EQ(ctx.preceding[0], "Bob -> Cat: Get Alice's data");
  ASSERT_EQ(ctx.following.size(), 1u);
  EXPECT_EQ(ctx.following[0], "Bob -> Cat: Display data");
}

TEST(AtomContext, SingleMessageHasNoNeighbours) {
  auto d = parse_diagram("A -> B: x").diagram;
  for (std::size_t k : {std::size_t{0}, std::size_t{1}, std::size_t{5}, kWholeDiagram}) {
    auto ctx = atom_context(d, "D0", k);
    EXPECT_TRUE(ctx.preceding.empty());
    EXPECT_TRUE(ctx.following.empty());
  }
}

TEST(AtomContext, ZeroWindowKeepsGuardsAndNotes) {
  auto d = parse_diagram(test::read_fixture("diagrams/04_notes.puml")).diagram;
  auto ctx = atom_context(d, "D0", 0);
  EXPECT_TRUE(ctx.preceding.empty());
  EXPECT_TRUE(ctx.following.empty());
  ASSERT_EQ(ctx.attached_notes.size(), 1u);
  EXPECT_EQ(ctx.attached_notes[0], "The patient opens a browser");
}

TEST(AtomContext, CrossesFragmentBoundaries) {
  auto d = parse_diagram(test::read_fixture("diagrams/02_autopilot.puml")).diagram;
  auto ctx = atom_context(d, "D1", 1);
  EXPECT_EQ(ctx.preceding, std::vector<std::string>{"Autopilot -> FlightControl: Request mode change"});
  EXPECT_EQ(ctx.following, std::vector<std::string>{"FlightControl -> Display: Report standby mode"});
  ASSERT_EQ(ctx.enclosing_guards.size(), 1u);
  EXPECT_EQ(ctx.enclosing_guards[0].guard, "Autopilot is requesting support");
}

TEST(AtomContext, UnknownAtom) {
  auto d = user_data();
  EXPECT_THROW(atom_context(d, "D6", 2), UnknownAtom);
  EXPECT_THROW(atom_context(d, "R0", 2), UnknownAtom);
  EXPECT_THROW(atom_context(d, "", 2), UnknownAtom);
}

TEST(AtomContext, UnboundedWindowReproducesSequence) {
  for (const auto& path : test::corpus_files()) {
    auto d = parse_diagram(test::read_file(path)).diagram;
    auto atoms = extract_diagram_atoms(d);
    std::vector<std::string> full;
    for (const auto* m : collect_messages(d)) full.push_back(render_message(*m));
    for (const auto& a : atoms) {
      auto ctx = atom_context(d, a.atom_id, kWholeDiagram);
      std::vector<std::string> joined = ctx.preceding;
      joined.push_back(render_atom(a));
      joined.insert(joined.end(), ctx.following.begin(), ctx.following.end());
      EXPECT_EQ(joined, full) << path << " " << a.atom_id;
    }
  }
}

TEST(RenderAtom, CanonicalForms) {
  auto atoms = extract_diagram_atoms(user_data());
  EXPECT_EQ(render_atom(atoms[0]), "Alice -> Bob: Authenticate");
  EXPECT_EQ(render_atom(atoms[3]), "Cat --> Bob: Return data");
  auto self = extract_diagram_atoms(parse_diagram("Patient -> Patient: Navigate to the website").diagram);
  EXPECT_EQ(render_atom(self[0]), "Patient -> Patient: Navigate to the website");
  auto rev = extract_diagram_atoms(parse_diagram("A <-- B: back").diagram);
  EXPECT_EQ(render_atom(rev[0]), "B --> A: back");
}

TEST(RenderAtom, ReparsesToSameMessage) {
  for (const auto& path : test::corpus_files()) {
    auto d = parse_diagram(test::read_file(path)).diagram;
    for (const auto& a : extract_diagram_atoms(d)) {
      auto single = parse_diagram(render_atom(a)).diagram;
      auto again = extract_diagram_atoms(single);
      ASSERT_EQ(again.size(), 1u) << render_atom(a);
      EXPECT_EQ(again[0].sender, a.sender);
      EXPECT_EQ(again[0].receiver, a.receiver);
      EXPECT_EQ(again[0].label, a.label);
      EXPECT_EQ(again[0].arrow, a.arrow);
    }
  }
}

TEST(RequirementAtom, Construction) {
  const std::string doc = "Alice shall first authenticate with Bob. Then more.";
  auto a = make_requirement_atom(0, "  Alice shall first authenticate with Bob.. ", doc);
  EXPECT_EQ(a.atom_id, "R0");
  EXPECT_EQ(a.text, "Alice shall first authenticate with Bob.");
  ASSERT_TRUE(a.source_span);
  EXPECT_EQ(a.source_span->begin, 0u);
  EXPECT_EQ(a.source_span->end, a.text.size());
  EXPECT_THROW(make_requirement_atom(1, "   "), std::invalid_argument);
  EXPECT_FALSE(make_requirement_atom(2, "not in doc", doc).source_span);
}

}  // namespace
}  // namespace seqjudge
