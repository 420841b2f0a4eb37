#include "srl/core.hpp"

#include "helpers.hpp"

#include <doctest.h>

using namespace srl;

TEST_CASE("validation accepts the worked example") {
  const SrlStructure s = test::example_structure();
  CHECK(validate_srl(s).ok());
}

TEST_CASE("validation flags overlapping arguments") {
  SrlStructure s;
  s.sentence = test::sentence_of({"a", "b", "c", "d"});
  PredicateFrame f;
  f.predicate = 4;
  f.arguments = {{{1, 3}, "A0"}, {{2, 2}, "A1"}};
  s.frames = {f};
  const ValidationReport rep = validate_srl(s);
  REQUIRE_FALSE(rep.ok());
  REQUIRE(rep.violations.size() == 1);
  CHECK(rep.violations.front().kind == "overlapping-arguments");
}

TEST_CASE("validation flags an argument boundary on the predicate") {
  SrlStructure s;
  s.sentence = test::sentence_of({"a", "b", "c"});
  s.frames = {{2, "", {{{2, 3}, "A0"}}}};
  const ValidationReport rep = validate_srl(s);
  REQUIRE_FALSE(rep.ok());
  CHECK(rep.violations.front().kind == "argument-boundary-at-predicate");
  // An argument may still contain the predicate strictly inside.
  SrlStructure ok;
  ok.sentence = test::sentence_of({"a", "b", "c"});
  ok.frames = {{2, "", {{{1, 3}, "A0"}}}};
  CHECK(validate_srl(ok).ok());
}

TEST_CASE("validation of an empty frame list is ok") {
  SrlStructure s;
  s.sentence = test::sentence_of({"x"});
  CHECK(validate_srl(s).ok());
}

TEST_CASE("validation flags duplicates and bad spans") {
  SrlStructure s;
  s.sentence = test::sentence_of({"a", "b"});
  s.frames = {{1, "", {{{1, 3}, "A0"}}}, {1, "", {}}};
  const ValidationReport rep = validate_srl(s);
  bool dup = false, oob = false;
  for (const Violation& v : rep.violations) {
    dup = dup || v.kind == "duplicate-predicate";
    oob = oob || v.kind == "span-out-of-bounds";
  }
  CHECK(dup);
  CHECK(oob);
}

TEST_CASE("span label inventory layout") {
  const LabelInventory inv = build_label_inventory({"A1", "A0"});
  REQUIRE(inv.size() == 5);
  CHECK(inv.label(0).str() == "PRD");
  CHECK(inv.label(1).str() == "B-A0");
  CHECK(inv.label(2).str() == "E-A0");
  CHECK(inv.label(3).str() == "B-A1");
  CHECK(inv.label(4).str() == "E-A1");
  CHECK(inv.root_allowed(0));
  CHECK_FALSE(inv.root_allowed(1));
  CHECK(inv.size() == 1 + 2 * static_cast<int>(inv.roles().size()));
}

TEST_CASE("viterbi alphabet layout") {
  const LabelInventory inv = build_label_inventory({"A0"});
  const auto alpha = inv.viterbi_alphabet();
  REQUIRE(alpha.size() == 4);
  CHECK(alpha[0] == "B-A0");
  CHECK(alpha[1] == "E-A0");
  CHECK(alpha[2] == "O");
  CHECK(alpha[3] == "I");
  CHECK(alpha.size() == 2 * inv.roles().size() + 2);
}

TEST_CASE("empty role set is rejected") {
  CHECK_THROWS_AS(build_label_inventory({}), std::invalid_argument);
}

TEST_CASE("inventory ordering is deterministic") {
  const LabelInventory a = build_label_inventory({"A0", "AM-TMP", "A1"});
  const LabelInventory b = build_label_inventory({"AM-TMP", "A1", "A0"});
  REQUIRE(a.size() == b.size());
  for (int i = 0; i < a.size(); ++i) CHECK(a.label(i) == b.label(i));
}

TEST_CASE("dependency inventory puts senses on Root edges") {
  const LabelInventory inv = LabelInventory::dependency({"02", "01"}, {"A0"});
  REQUIRE(inv.size() == 3);
  CHECK(inv.label(0).str() == "01");
  CHECK(inv.label(1).str() == "02");
  CHECK(inv.label(2).str() == "A0");
  CHECK(inv.root_allowed(0));
  CHECK_FALSE(inv.root_allowed(2));
}

TEST_CASE("graph edge invariants") {
  SemGraph g(3);
  g.add_edge(0, 2, CompositeLabel::prd());
  g.add_edge(2, 1, CompositeLabel::begin("A0"));
  CHECK_THROWS(g.add_edge(2, 2, CompositeLabel::begin("A0")));          // self loop
  CHECK_THROWS(g.add_edge(2, 0, CompositeLabel::begin("A0")));          // Root as modifier
  CHECK_THROWS(g.add_edge(2, 1, CompositeLabel::begin("A1")));          // duplicate pair
  CHECK_THROWS(g.add_edge(2, 3, CompositeLabel::outside()));            // sequence label
  CHECK_THROWS(g.add_edge(0, 3, CompositeLabel::begin("A0")));          // B on Root edge
  CHECK_THROWS(g.add_edge(1, 3, CompositeLabel::prd()));                // PRD off Root
  CHECK(g.edges().size() == 2);
  CHECK(g.root_children() == std::vector<int>{2});
}
