#include "srl/inference.hpp"

#include "srl/check.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <cstring>
#include <random>

using namespace srl;
using num::Index;
using num::Tape;
using num::Tensor;
using num::Val;

TEST_CASE("threshold is strict at one half") {
  Tensor q({3, 3});
  q.at(0, 1) = 0.5;
  q.at(0, 2) = 0.5 + 1e-9;
  q.at(2, 1) = 0.9;
  q.at(1, 1) = 0.99;  // diagonal: never a candidate
  const auto kept = threshold_edges(q);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0] == std::pair<int, int>{0, 2});
  CHECK(kept[1] == std::pair<int, int>{2, 1});
}

TEST_CASE("threshold equals a direct filter on random grids") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int c = 0; c < 50; ++c) {
    const Index n1 = 2 + static_cast<Index>(rng() % 7);
    Tensor q({n1, n1});
    for (Index i = 0; i < q.size(); ++i) q.array()(i) = u(rng);
    const auto kept = threshold_edges(q);
    std::set<std::pair<int, int>> got(kept.begin(), kept.end());
    for (Index i = 0; i < n1; ++i)
      for (Index j = 0; j < n1; ++j) {
        const bool want = j >= 1 && i != j && q.at(i, j) > 0.5;
        CHECK(got.count({static_cast<int>(i), static_cast<int>(j)}) == (want ? 1u : 0u));
      }
  }
}

TEST_CASE("label assignment takes the argmax with inventory-order ties") {
  const LabelInventory inv = build_label_inventory({"A0", "A1"});
  const Index L = inv.size();
  Tensor probs({3, 3, L});
  probs.at3(2, 1, inv.index_of(CompositeLabel::begin("A0"))) = 0.9;
  // exact tie between B-A0 and B-A1 on edge (1, 2)
  probs.at3(1, 2, inv.index_of(CompositeLabel::begin("A0"))) = 0.4;
  probs.at3(1, 2, inv.index_of(CompositeLabel::begin("A1"))) = 0.4;
  probs.at3(0, 2, inv.index_of(CompositeLabel::prd())) = 1.0;
  const SemGraph g = assign_labels({{2, 1}, {1, 2}, {0, 2}}, probs, inv, 2);
  CHECK(g.label_of(2, 1)->str() == "B-A0");
  CHECK(g.label_of(1, 2)->str() == "B-A0");  // tie resolves to the earlier label
  CHECK(g.label_of(0, 2)->str() == "PRD");   // Root edges always carry PRD
}

TEST_CASE("transition matrix collapses to the base pattern") {
  const TransitionMatrix tm(2);
  REQUIRE(tm.states() == 7);
  auto forbidden_base = [](char f, char t) {
    return (f == 'E' && (t == 'E' || t == 'I')) || (f == 'O' && (t == 'E' || t == 'I')) ||
           (f == 'I' && (t == 'B' || t == 'O'));
  };
  for (int from = 0; from < tm.states(); ++from) {
    for (int to = 0; to < tm.states(); ++to) {
      const char kf = tm.kind(from), kt = tm.kind(to);
      if (forbidden_base(kf, kt)) {
        CHECK_FALSE(tm.allowed(from, to));
      } else if ((kt == 'E' || kt == 'I') && (kf == 'B' || kf == 'I')) {
        CHECK(tm.allowed(from, to) == (tm.role_of(from) == tm.role_of(to)));
      } else {
        CHECK(tm.allowed(from, to));
      }
    }
  }
  // starts and ends
  CHECK(tm.start_ok(tm.b_state(0)));
  CHECK(tm.start_ok(tm.o_state()));
  CHECK_FALSE(tm.start_ok(tm.e_state(0)));
  CHECK_FALSE(tm.start_ok(tm.i_state(0)));
  CHECK(tm.end_ok(tm.b_state(1)));
  CHECK(tm.end_ok(tm.e_state(1)));
  CHECK(tm.end_ok(tm.o_state()));
  CHECK_FALSE(tm.end_ok(tm.i_state(1)));
  // cross-role openings stay allowed
  CHECK(tm.allowed(tm.b_state(0), tm.b_state(1)));
  CHECK(tm.allowed(tm.e_state(0), tm.b_state(1)));
}

TEST_CASE("mean field with zero second-order scores is the sigmoid, bitwise") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 1.5);
  const Index n1 = 5;
  Tensor s({n1, n1});
  for (Index i = 0; i < s.size(); ++i) s.array()(i) = g(rng);
  Tape t;
  SecondOrderScores so{t.constant(Tensor({n1, n1, n1})), t.constant(Tensor({n1, n1, n1})),
                       t.constant(Tensor({n1, n1, n1}))};
  std::vector<Val> history;
  Val q = mfvi(t, t.constant(s), so, 3, &history);
  Val direct = cmul(sigmoid(t.constant(s)), t.constant(candidate_mask(n1)));
  REQUIRE(history.size() == 4);
  const Tensor& qv = t.value(q);
  const Tensor& dv = t.value(direct);
  CHECK(std::memcmp(qv.array().data(), dv.array().data(),
                    sizeof(double) * static_cast<size_t>(qv.size())) == 0);
  // iteration zero is the initialization
  CHECK(std::memcmp(t.value(history[0]).array().data(), dv.array().data(),
                    sizeof(double) * static_cast<size_t>(qv.size())) == 0);
}

TEST_CASE("zero iterations return the initialization") {
  Tensor s({3, 3});
  s.at(0, 1) = 1.25;
  Tape t;
  SecondOrderScores so{t.constant(Tensor({3, 3, 3})), t.constant(Tensor({3, 3, 3})),
                       t.constant(Tensor({3, 3, 3}))};
  Val q = mfvi(t, t.constant(s), so, 0);
  CHECK(t.value(q).at(0, 1) == doctest::Approx(1.0 / (1.0 + std::exp(-1.25))).epsilon(1e-15));
}

TEST_CASE("mean field agrees with the scalar oracle") {
  CHECK(check::mfvi_vs_oracle(25, 123).pass);
}

TEST_CASE("repair recovers the conflicting example's corrected sequence") {
  // Words: Some students want to do more .   predicate want@3.
  // Dominant boundaries: B-A0@1 E-A0@2 B-A1@4 E-A1@6.
  const LabelInventory inv = build_label_inventory({"A0", "A1"});
  const int n = 7, k = 3;
  PredicateFrame f;
  f.predicate = k;
  f.arguments = {{{1, 2}, "A0"}, {{4, 6}, "A1"}};
  const check::SyntheticEmissions se = check::emissions_for_frame(f, n, inv, 0.9, 0.05, 0.85);
  const RepairResult rr = viterbi_repair(k, se.edge_prob, se.label_probs, inv);
  const std::vector<std::string> want{"B-A0", "E-A0", "O", "B-A1", "I", "E-A1", "O"};
  CHECK(rr.sequence == want);
  REQUIRE(rr.arguments.size() == 2);
  CHECK(rr.arguments[0] == Argument{{1, 2}, "A0"});
  CHECK(rr.arguments[1] == Argument{{4, 6}, "A1"});
}

TEST_CASE("repair agrees with direct recovery and exhaustive search") {
  CHECK(check::viterbi_direct_equivalence(200, 31).pass);
  CHECK(check::viterbi_vs_enumeration(100, 37).pass);
}

TEST_CASE("decoding with a zero-initialized model yields no frames") {
  auto corpus = std::vector<SrlStructure>{test::example_structure()};
  Model m = test::tiny_model(corpus, Mode::Span, 5);
  for (size_t i = 0; i < m.params.size(); ++i) m.params.tensor(i).set_zero();
  const SrlStructure out = decode_sentence(m, corpus[0].sentence, Order::O1);
  CHECK(out.frames.empty());
  CHECK(validate_srl(out).ok());
}

TEST_CASE("score snapshots keep the symmetric sharing visible") {
  auto corpus = std::vector<SrlStructure>{test::example_structure()};
  Model m = test::tiny_model(corpus, Mode::Span, 51);
  Tape t;
  const ForwardPass fp = run_forward(t, m, token_ids(m.vocab, corpus[0].sentence), Order::O2);
  const ScoreTensors st = collect_score_tensors(t, fp);
  const int n1 = corpus[0].sentence.size() + 1;
  CHECK(st.edge.rows() == n1);
  CHECK(st.label.dim(2) == m.inventory.size());
  CHECK(st.s_sib(2, 1, 3) == st.s_sib(2, 3, 1));
  CHECK(st.s_cop(2, 1, 3) == st.s_cop(3, 1, 2));
  // First-order pass leaves the second-order tensors empty.
  Tape t1;
  const ForwardPass fp1 = run_forward(t1, m, token_ids(m.vocab, corpus[0].sentence), Order::O1);
  CHECK(collect_score_tensors(t1, fp1).sib_ijk.size() == 0);
}

TEST_CASE("decoded structures always validate") {
  auto corpus = std::vector<SrlStructure>{test::example_structure()};
  Model m = test::tiny_model(corpus, Mode::Span, 77);
  std::mt19937_64 rng(78);
  check::FuzzConfig fc;
  fc.max_n = 10;
  for (int c = 0; c < 20; ++c) {
    const SrlStructure s = check::random_structure(rng, fc);
    for (Order o : {Order::O1, Order::O2}) {
      const SrlStructure out = decode_sentence(m, s.sentence, o);
      CHECK(validate_srl(out).ok());
    }
  }
}

TEST_CASE("sentences over the length cap are rejected") {
  auto corpus = std::vector<SrlStructure>{test::example_structure()};
  TrainConfig cfg = test::tiny_config();
  cfg.len_cap = 4;
  Model m = test::tiny_model(corpus, Mode::Span, 5, cfg);
  CHECK_THROWS_AS(decode_sentence(m, corpus[0].sentence, Order::O1), std::invalid_argument);
}

TEST_CASE("adversarial probability grids always decode to legal structures") {
  const LabelInventory inv = build_label_inventory({"A0", "A1", "AM-TMP"});
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int c = 0; c < 200; ++c) {
    const int n = 1 + static_cast<int>(rng() % 9);
    const Index n1 = n + 1;
    Sentence sent;
    for (int w = 0; w < n; ++w) sent.tokens.push_back({"w", "w"});
    Tensor q({n1, n1});
    for (Index i = 0; i < n1; ++i)
      for (Index j = 1; j < n1; ++j)
        if (i != j) q.at(i, j) = u(rng);  // dense high-probability grids: many conflicts
    Tensor lp({n1, n1, inv.size()});
    for (Index i = 0; i < n1; ++i)
      for (Index j = 1; j < n1; ++j) {
        if (i == j) continue;
        double z = 0.0;
        for (int l = 0; l < inv.size(); ++l)
          if (inv.root_allowed(l) == (i == 0)) z += (lp.at3(i, j, l) = u(rng) + 1e-3);
        for (int l = 0; l < inv.size(); ++l) lp.at3(i, j, l) /= z;
      }
    const SrlStructure out = decode_from_scores(q, lp, sent, inv, Mode::Span);
    CHECK(validate_srl(out).ok());
    for (const PredicateFrame& f : out.frames) {
      std::vector<Span> spans;
      for (const Argument& a : f.arguments) spans.push_back(a.span);
      std::sort(spans.begin(), spans.end());
      for (size_t i = 1; i < spans.size(); ++i) CHECK(spans[i - 1].end < spans[i].begin);
    }
  }
}

TEST_CASE("a one-word sentence decodes") {
  auto corpus = std::vector<SrlStructure>{test::example_structure()};
  Model m = test::tiny_model(corpus, Mode::Span, 61);
  Sentence one;
  one.tokens.push_back({"go", "go"});
  for (Order o : {Order::O1, Order::O2}) {
    const SrlStructure out = decode_sentence(m, one, o);
    CHECK(validate_srl(out).ok());
    for (const PredicateFrame& f : out.frames) CHECK(f.arguments.empty());
  }
}

TEST_CASE("repair only touches conflicted predicates") {
  // Predicate 2 is clean, predicate 4 conflicts; the clean frame's
  // arguments must be identical whether or not predicate 4 exists.
  const LabelInventory inv = build_label_inventory({"A0", "A1"});
  const Sentence sent = test::sentence_of({"a", "b", "c", "d", "e", "f"});
  const Index n1 = 7;
  const Index L = inv.size();
  auto base_grids = [&](bool with_conflict) {
    Tensor q({n1, n1});
    Tensor lp({n1, n1, L});
    for (Index i = 0; i < n1; ++i)
      for (Index j = 1; j < n1; ++j)
        for (Index l = 0; l < L; ++l)
          lp.at3(i, j, l) = inv.root_allowed(static_cast<int>(l)) == (i == 0)
                                ? 1.0 / (i == 0 ? 1 : L - 1)
                                : 0.0;
    q.at(0, 2) = 0.95;
    q.at(2, 1) = 0.92;
    q.at(2, 3) = 0.88;
    q.at(2, 5) = 0.89;
    auto favor = [&](Index i, Index j, const CompositeLabel& l, double p) {
      for (Index ll = 0; ll < L; ++ll)
        if (!inv.root_allowed(static_cast<int>(ll)))
          lp.at3(i, j, ll) = (1.0 - p) / (L - 2);
      lp.at3(i, j, inv.index_of(l)) = p;
    };
    favor(2, 1, CompositeLabel::begin("A0"), 0.9);
    favor(2, 3, CompositeLabel::begin("A1"), 0.9);
    favor(2, 5, CompositeLabel::end("A1"), 0.9);
    if (with_conflict) {
      q.at(0, 4) = 0.94;
      q.at(4, 1) = 0.9;
      q.at(4, 3) = 0.9;
      favor(4, 1, CompositeLabel::end("A0"), 0.9);
      favor(4, 3, CompositeLabel::end("A0"), 0.9);
    }
    return std::pair<Tensor, Tensor>(q, lp);
  };

  auto [q1, lp1] = base_grids(true);
  const SrlStructure with = decode_from_scores(q1, lp1, sent, inv, Mode::Span);
  auto [q2, lp2] = base_grids(false);
  const SrlStructure without = decode_from_scores(q2, lp2, sent, inv, Mode::Span);

  REQUIRE(with.frames.size() == 2);
  REQUIRE(without.frames.size() == 1);
  CHECK(with.frames[0].predicate == 2);
  CHECK(with.frames[0].arguments == without.frames[0].arguments);
  REQUIRE(with.frames[0].arguments.size() == 2);
  CHECK(with.frames[0].arguments[0] == Argument{{1, 1}, "A0"});
  CHECK(with.frames[0].arguments[1] == Argument{{3, 5}, "A1"});
  CHECK(validate_srl(with).ok());
}
