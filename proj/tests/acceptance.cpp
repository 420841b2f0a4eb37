// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Expects the toy corpus directory as argv[1].

#include "srl/check.hpp"
#include "srl/gradcheck.hpp"
#include "srl/inference.hpp"
#include "srl/io.hpp"
#include "srl/training.hpp"
#include "srl/transform.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <random>
#include <set>
#include <string>
#include <vector>

using namespace srl;
using num::Index;
using num::Tape;
using num::Tensor;
using num::Val;

namespace {

int g_failures = 0;

void report(int criterion, const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", criterion, name.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SrlStructure example_structure() {
  SrlStructure s;
  for (const char* w : {"They", "want", "to", "do", "more", "."}) s.sentence.tokens.push_back({w, w});
  s.frames = {{2, "", {{{1, 1}, "A0"}, {{3, 5}, "A1"}}}, {4, "", {{{1, 1}, "A0"}, {{5, 5}, "A1"}}}};
  return s;
}

// --- 1: fuzzed round trips ----------------------------------------------------

void criterion_roundtrip() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto span = check::roundtrip_span(10000, 1001);
  const auto dep = check::roundtrip_dep(10000, 1002);
  const double secs = seconds_since(t0);
  const bool pass = span.pass && dep.pass && secs < 10.0;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "10000 span + 10000 dependency cases in %.2fs", secs);
  report(1, "round-trip transformation", pass,
         pass ? buf : (span.pass ? (dep.pass ? buf : dep.detail.c_str()) : span.detail.c_str()));
}

// --- 2: worked example exactness ----------------------------------------------

void criterion_worked_example() {
  const SrlStructure s = example_structure();
  const SemGraph g = srl_to_graph(s);
  const std::set<std::string> want{"0>2:PRD", "2>1:B-A0", "2>3:B-A1", "2>5:E-A1",
                                   "0>4:PRD", "4>1:B-A0", "4>5:B-A1"};
  std::set<std::string> got;
  for (const GraphEdge& e : g.edges())
    got.insert(std::to_string(e.head) + ">" + std::to_string(e.mod) + ":" + e.label.str());
  bool pass = got == want;
  auto [back, reports] = graph_to_srl(g, s.sentence);
  pass = pass && reports.empty() && back.normalized() == s.normalized();
  report(2, "worked example converts exactly in both directions", pass,
         pass ? "7 edges and 2 frames match" : "edge or frame set mismatch");
}

// --- 3: mean-field oracle -------------------------------------------------------

void criterion_mfvi() {
  const auto r = check::mfvi_vs_oracle(100, 2001);

  // Zeroed second-order scores: the final posterior is the plain sigmoid,
  // bit for bit.
  std::mt19937_64 rng(2002);
  std::normal_distribution<double> gauss(0.0, 1.2);
  bool bitwise = true;
  for (int c = 0; c < 20 && bitwise; ++c) {
    const Index n1 = 2 + static_cast<Index>(rng() % 5);
    Tensor s({n1, n1});
    for (Index i = 0; i < s.size(); ++i) s.array()(i) = gauss(rng);
    Tape t;
    SecondOrderScores so{t.constant(Tensor({n1, n1, n1})), t.constant(Tensor({n1, n1, n1})),
                         t.constant(Tensor({n1, n1, n1}))};
    Val q = mfvi(t, t.constant(s), so, 3);
    Val direct = cmul(sigmoid(t.constant(s)), t.constant(candidate_mask(n1)));
    bitwise = std::memcmp(t.value(q).array().data(), t.value(direct).array().data(),
                          sizeof(double) * static_cast<size_t>(t.value(q).size())) == 0;
  }
  const bool pass = r.pass && bitwise;
  report(3, "mean-field posterior matches the scalar oracle", pass,
         pass ? "100 cases within 1e-12; zeroed scores bit-exact"
              : (r.pass ? "bitwise sigmoid reduction failed" : r.detail));
}

// --- 4: repair vs exhaustive enumeration ---------------------------------------

void criterion_viterbi_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = check::viterbi_vs_enumeration(500, 3001);
  const double secs = seconds_since(t0);
  const bool pass = r.pass && secs < 60.0;
  char buf[96];
  std::snprintf(buf, sizeof(buf), "500 cases in %.2fs", secs);
  report(4, "repair path score equals exhaustive enumeration", pass, pass ? buf : r.detail);
}

// --- 5: the conflicting example's corrected sequence ----------------------------

void criterion_repair_example() {
  const LabelInventory inv = build_label_inventory({"A0", "A1"});
  PredicateFrame f;
  f.predicate = 3;  // want, with Root at 0
  f.arguments = {{{1, 2}, "A0"}, {{4, 6}, "A1"}};
  const check::SyntheticEmissions se = check::emissions_for_frame(f, 7, inv, 0.9, 0.05, 0.85);
  const RepairResult rr = viterbi_repair(3, se.edge_prob, se.label_probs, inv);
  const std::vector<std::string> want{"B-A0", "E-A0", "O", "B-A1", "I", "E-A1", "O"};
  std::string got;
  for (const std::string& s : rr.sequence) got += (got.empty() ? "" : " ") + s;
  report(5, "conflicting example repairs to the corrected sequence", rr.sequence == want, got);
}

// --- 6: gradient checks ----------------------------------------------------------

void criterion_gradients() {
  SrlStructure s;
  for (const char* w : {"ab", "cd", "ef"}) s.sentence.tokens.push_back({w, w});
  s.frames = {{2, "", {{{1, 1}, "A0"}, {{3, 3}, "A1"}}}};
  std::vector<SrlStructure> corpus{s};

  TrainConfig cfg;
  cfg.mode = Mode::Span;
  cfg.word_dim = 3;
  cfg.lemma_dim = 2;
  cfg.char_dim = 2;
  cfg.char_hidden = 2;
  cfg.hidden = 3;
  cfg.layers = 2;
  cfg.edge_mlp = 3;
  cfg.label_mlp = 3;
  cfg.second_mlp = 2;
  cfg.mfvi_iters = 3;

  Vocab vocab = Vocab::build(corpus, 1);
  LabelInventory inv = LabelInventory::span({"A0", "A1"});
  Model m = Model::init(cfg.model_config(), std::move(vocab), std::move(inv), 7);
  const SemGraph gold = srl_to_graph(s);
  const auto ids = token_ids(m.vocab, s.sentence);
  std::vector<Tensor*> ptrs;
  for (size_t i = 0; i < m.params.size(); ++i) ptrs.push_back(&m.params.tensor(i));

  // The step is sized so cancellation noise in the differences stays well
  // under the tolerance even on near-zero gradient components; no rectifier
  // boundary sits within the step at this seed.
  double worst = 0.0;
  for (Order order : {Order::O1, Order::O2}) {
    auto build = [&](Tape& t) { return sentence_loss(t, m, ids, gold, order, 0.06); };
    worst = std::max(worst, num::finite_diff_check(build, ptrs, 3e-4));
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "max relative error %.3g over %zu parameters, both orders",
                worst, ptrs.size());
  report(6, "full-loss gradients match central finite differences", worst < 1e-4, buf);
}

// --- 7: toy-corpus overfit --------------------------------------------------------

struct OverfitOutcome {
  bool ok = false;
  double train_f1 = 0.0;
  double dev_f1 = 0.0;
  int epochs = 0;
  double secs = 0.0;
  Model model;
};

OverfitOutcome overfit(const std::vector<SrlStructure>& train_set,
                       const std::vector<SrlStructure>& dev_set, Order order) {
  TrainConfig cfg;
  cfg.mode = Mode::Span;
  cfg.order = order;
  cfg.epochs = 300;
  cfg.batch_tokens = 64;
  cfg.learning_rate = 2e-3;
  cfg.seed = 7;
  cfg.unk_rate = 0.0;
  cfg.word_dim = 24;
  cfg.lemma_dim = 12;
  cfg.char_dim = 8;
  cfg.char_hidden = 6;
  cfg.hidden = 24;
  cfg.layers = 1;
  cfg.edge_mlp = 24;
  cfg.label_mlp = 24;
  cfg.second_mlp = 8;
  cfg.early_stop_train_f1 = 99.0;
  cfg.workers = 1;

  const auto t0 = std::chrono::steady_clock::now();
  TrainResult r = train(train_set, dev_set, cfg);
  OverfitOutcome out;
  out.secs = seconds_since(t0);
  out.epochs = static_cast<int>(r.log.size());
  out.train_f1 = r.log.back().train_f1;
  if (out.train_f1 < 0.0) {
    std::vector<SrlStructure> pred;
    for (const SrlStructure& s : train_set) pred.push_back(decode_sentence(r.model, s.sentence, order));
    out.train_f1 = evaluate_f1(pred, train_set).f1;
  }
  {
    std::vector<SrlStructure> pred;
    for (const SrlStructure& s : dev_set) pred.push_back(decode_sentence(r.model, s.sentence, order));
    out.dev_f1 = evaluate_f1(pred, dev_set).f1;
  }
  out.ok = out.train_f1 >= 99.0 && out.epochs <= 300 && out.secs < 300.0;
  out.model = std::move(r.model);
  return out;
}

Model criterion_overfit(const std::string& toy_dir) {
  const auto train_set = io::read_corpus(toy_dir + "/train.conll", {Mode::Span, true});
  const auto dev_set = io::read_corpus(toy_dir + "/dev.conll", {Mode::Span, true});
  OverfitOutcome o1 = overfit(train_set, dev_set, Order::O1);
  OverfitOutcome o2 = overfit(train_set, dev_set, Order::O2);
  const bool sanity = o2.dev_f1 >= o1.dev_f1 - 2.0;
  const bool pass = o1.ok && o2.ok && sanity;
  char buf[192];
  std::snprintf(buf, sizeof(buf),
                "O1 train %.2f (%d ep, %.0fs) dev %.2f; O2 train %.2f (%d ep, %.0fs) dev %.2f",
                o1.train_f1, o1.epochs, o1.secs, o1.dev_f1, o2.train_f1, o2.epochs, o2.secs,
                o2.dev_f1);
  report(7, "toy-corpus overfit for both orders", pass, buf);
  return std::move(o2.model);
}

// --- 8: relative decoding throughput ----------------------------------------------

double decode_rate(const Model& m, const std::vector<Sentence>& sentences, Order order) {
  // warmup
  for (size_t i = 0; i < std::min<size_t>(sentences.size(), 32); ++i)
    (void)decode_sentence(m, sentences[i], order);
  std::vector<double> rates;
  for (int rep = 0; rep < 3; ++rep) {
    const auto t0 = std::chrono::steady_clock::now();
    for (const Sentence& s : sentences) (void)decode_sentence(m, s, order);
    rates.push_back(static_cast<double>(sentences.size()) / seconds_since(t0));
  }
  std::sort(rates.begin(), rates.end());
  return rates[1];
}

void criterion_throughput(const Model& model) {
  std::mt19937_64 rng(8001);
  std::vector<std::string> words = model.vocab.words();
  words.erase(words.begin(), words.begin() + 2);  // drop pad/unk
  std::vector<Sentence> sentences;
  for (int i = 0; i < 1000; ++i) {
    Sentence s;
    const int n = 5 + static_cast<int>(rng() % 11);
    for (int w = 0; w < n; ++w) {
      const std::string& t = words[rng() % words.size()];
      s.tokens.push_back({t, t});
    }
    sentences.push_back(std::move(s));
  }
  const std::vector<Sentence> half(sentences.begin(), sentences.begin() + 500);

  const double o1_full = decode_rate(model, sentences, Order::O1);
  const double o2_full = decode_rate(model, sentences, Order::O2);
  const double o1_half = decode_rate(model, half, Order::O1);
  const double o2_half = decode_rate(model, half, Order::O2);

  const double rel = o2_full / o1_full;
  const double lin1 = o1_full / o1_half;
  const double lin2 = o2_full / o2_half;
  const bool pass = rel >= 0.5 && lin1 >= 0.8 && lin1 <= 1.25 && lin2 >= 0.8 && lin2 <= 1.25;
  char buf[192];
  std::snprintf(buf, sizeof(buf),
                "O1 %.0f sents/s, O2 %.0f sents/s (O2/O1 %.2f); 1000-vs-500 rate ratios %.2f / %.2f",
                o1_full, o2_full, rel, lin1, lin2);
  report(8, "second-order decoding stays within the throughput bound", pass, buf);
}

// --- 9: loss arithmetic -------------------------------------------------------------

void criterion_losses() {
  bool pass = true;
  std::string detail = "closed forms within 1e-9; interpolation exact";

  const SrlStructure s = example_structure();
  const SemGraph gold = srl_to_graph(s);
  {
    Tensor p({7, 7});
    p.array().setConstant(0.5);
    Tape t;
    const double loss = t.value(edge_loss(t, t.constant(p), gold)).value();
    if (std::abs(loss - 36.0 * std::log(2.0)) > 1e-9) {
      pass = false;
      detail = "uniform edge loss mismatch";
    }
  }
  {
    const LabelInventory inv = build_label_inventory({"A0", "A1"});
    SrlStructure small;
    for (const char* w : {"a", "b", "c", "d", "e"}) small.sentence.tokens.push_back({w, w});
    small.frames = {{2, "", {{{1, 1}, "A0"}, {{3, 5}, "A1"}}}};
    const SemGraph g4 = srl_to_graph(small);
    Tensor p({6, 6, inv.size()});
    p.array().setConstant(0.2);
    Tape t;
    const double loss = t.value(label_loss(t, t.constant(p), g4, inv)).value();
    if (std::abs(loss - 4.0 * std::log(5.0)) > 1e-9) {
      pass = false;
      detail = "uniform label loss mismatch";
    }
  }
  {
    Tape t;
    auto scalar = [&](double v) { return t.constant(Tensor::scalar(v)); };
    if (t.value(total_loss(scalar(1.0), scalar(1.0), 0.06)).value() != 1.0 ||
        t.value(total_loss(scalar(10.0), scalar(0.0), 0.06)).value() != 0.6) {
      pass = false;
      detail = "interpolation not exact";
    }
  }
  report(9, "loss arithmetic matches the closed forms", pass, detail);
}

// --- 10: evaluation metric ------------------------------------------------------------

void criterion_metric() {
  bool pass = true;
  std::string detail;
  const SrlStructure ex = example_structure();
  const F1Result perfect = evaluate_f1({ex}, {ex});
  char formatted[64];
  std::snprintf(formatted, sizeof(formatted), "P %.2f R %.2f F1 %.2f", perfect.precision,
                perfect.recall, perfect.f1);
  if (std::string(formatted) != "P 100.00 R 100.00 F1 100.00") pass = false;

  SrlStructure gold;
  for (const char* w : {"a", "b", "c", "d"}) gold.sentence.tokens.push_back({w, w});
  gold.frames = {{2, "", {{{1, 1}, "A0"}, {{3, 4}, "A1"}}}};
  SrlStructure pred = gold;
  pred.frames[0].arguments = {{{1, 1}, "A0"}, {{3, 3}, "A1"}};
  const F1Result r = evaluate_f1({pred}, {gold});
  if (r.correct != 2 || r.predicted != 3 || r.gold != 3) pass = false;
  if (std::abs(r.f1 - 100.0 * 2.0 / 3.0) > 1e-12) pass = false;

  SrlStructure empty;
  empty.sentence = gold.sentence;
  const F1Result z = evaluate_f1({empty}, {gold});
  if (z.precision != 0.0 || z.recall != 0.0 || z.f1 != 0.0) pass = false;

  detail = std::string(formatted) + "; hand-counted 2-of-3 case exact; empty predictions are zero";
  report(10, "tuple metric matches hand counts", pass, detail);
}

}  // namespace

int main(int argc, char** argv) {
  const std::string toy_dir = argc > 1 ? argv[1] : "data/toy";
  criterion_roundtrip();
  criterion_worked_example();
  criterion_mfvi();
  criterion_viterbi_oracle();
  criterion_repair_example();
  criterion_gradients();
  Model model = criterion_overfit(toy_dir);
  criterion_throughput(model);
  criterion_losses();
  criterion_metric();
  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
