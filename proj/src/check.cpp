#include "srl/check.hpp"

#include "srl/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace srl::check {

using num::Index;
using num::Tape;
using num::Tensor;
using num::Val;

namespace {

const char* kWordPool[] = {"time", "year", "people", "way",  "day",   "man",   "thing",
                           "woman", "life", "child",  "world", "school", "state", "family",
                           "student", "group", "country", "problem", "hand", "part", "place",
                           "case",  "week", "company", "system", "program", "question", "work",
                           "night", "point", "home", "water", "room", "mother", "area", "money",
                           "story", "fact", "month", "lot"};

Sentence random_sentence(std::mt19937_64& rng, int n) {
  Sentence s;
  for (int i = 0; i < n; ++i) {
    const std::string w = kWordPool[rng() % std::size(kWordPool)];
    s.tokens.push_back({w, w});
  }
  return s;
}

std::vector<Span> random_spans(std::mt19937_64& rng, int n, int count, int max_width,
                               int avoid_position = -1) {
  std::vector<Span> spans;
  for (int attempt = 0; attempt < 8 * count && static_cast<int>(spans.size()) < count; ++attempt) {
    const int b = 1 + static_cast<int>(rng() % static_cast<uint64_t>(n));
    const int w = 1 + static_cast<int>(rng() % static_cast<uint64_t>(max_width));
    const int e = std::min(b + w - 1, n);
    if (avoid_position >= 1 && b <= avoid_position && avoid_position <= e) continue;
    bool clash = false;
    for (const Span& sp : spans)
      if (!(e < sp.begin || sp.end < b)) clash = true;
    if (!clash) spans.push_back({b, e});
  }
  std::sort(spans.begin(), spans.end());
  return spans;
}

std::vector<int> random_distinct(std::mt19937_64& rng, int n, int count) {
  std::vector<int> all(static_cast<size_t>(n));
  std::iota(all.begin(), all.end(), 1);
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(static_cast<size_t>(std::min(count, n)));
  std::sort(all.begin(), all.end());
  return all;
}

}  // namespace

SrlStructure random_structure(std::mt19937_64& rng, const FuzzConfig& cfg) {
  const int n = 1 + static_cast<int>(rng() % static_cast<uint64_t>(cfg.max_n));
  SrlStructure s;
  s.sentence = random_sentence(rng, n);
  const int nf = static_cast<int>(rng() % static_cast<uint64_t>(cfg.max_frames + 1));
  for (int k : random_distinct(rng, n, nf)) {
    PredicateFrame f;
    f.predicate = k;
    const int na = static_cast<int>(rng() % static_cast<uint64_t>(cfg.max_args + 1));
    std::vector<std::string> roles = cfg.roles;
    std::shuffle(roles.begin(), roles.end(), rng);
    const std::vector<Span> spans = random_spans(rng, n, na, 3, k);
    for (size_t a = 0; a < spans.size(); ++a) f.arguments.push_back({spans[a], roles[a]});
    s.frames.push_back(std::move(f));
  }
  return s;
}

SrlStructure random_dep_structure(std::mt19937_64& rng, const FuzzConfig& cfg) {
  const int n = 1 + static_cast<int>(rng() % static_cast<uint64_t>(cfg.max_n));
  SrlStructure s;
  s.sentence = random_sentence(rng, n);
  const char* senses[] = {"01", "02", "03"};
  const int nf = static_cast<int>(rng() % static_cast<uint64_t>(cfg.max_frames + 1));
  for (int k : random_distinct(rng, n, nf)) {
    PredicateFrame f;
    f.predicate = k;
    f.sense = senses[rng() % 3];
    const int na = static_cast<int>(rng() % static_cast<uint64_t>(cfg.max_args + 1));
    for (const Span& sp : random_spans(rng, n, na, 1, k))
      f.arguments.push_back({sp, cfg.roles[rng() % cfg.roles.size()]});
    s.frames.push_back(std::move(f));
  }
  return s;
}

std::vector<BoundaryEvent> frame_events(const PredicateFrame& f) {
  std::vector<BoundaryEvent> ev;
  for (const Argument& a : f.arguments) {
    ev.push_back({a.span.begin, true, a.role});
    if (a.span.end > a.span.begin) ev.push_back({a.span.end, false, a.role});
  }
  std::sort(ev.begin(), ev.end(),
            [](const BoundaryEvent& a, const BoundaryEvent& b) { return a.position < b.position; });
  return ev;
}

// ---- oracles ---------------------------------------------------------------

Eigen::MatrixXd mfvi_scalar_oracle(const Eigen::MatrixXd& edge_scores,
                                   const std::function<double(int, int, int)>& sib,
                                   const std::function<double(int, int, int)>& cop,
                                   const std::function<double(int, int, int)>& grd, int iters) {
  const int n1 = static_cast<int>(edge_scores.rows());
  auto sigma = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n1, n1);
  for (int i = 0; i < n1; ++i)
    for (int j = 1; j < n1; ++j)
      if (i != j) q(i, j) = sigma(edge_scores(i, j));
  for (int t = 0; t < iters; ++t) {
    Eigen::MatrixXd next = Eigen::MatrixXd::Zero(n1, n1);
    for (int i = 0; i < n1; ++i) {
      for (int j = 1; j < n1; ++j) {
        if (i == j) continue;
        double msg = 0.0;
        for (int k = 0; k < n1; ++k) {
          if (k == i || k == j) continue;
          if (k >= 1) msg += q(i, k) * sib(i, j, k) + q(j, k) * grd(i, j, k);
          msg += q(k, j) * cop(i, j, k);
        }
        next(i, j) = sigma(edge_scores(i, j) + msg);
      }
    }
    q = next;
  }
  return q;
}

double enumerate_best_path(const Eigen::MatrixXd& log_emissions, const TransitionMatrix& tm) {
  const int n = static_cast<int>(log_emissions.rows()) - 1;
  const int S = tm.states();
  const double ninf = -std::numeric_limits<double>::infinity();
  double best = ninf;
  std::function<void(int, int, double)> dfs = [&](int pos, int state, double acc) {
    acc = acc + log_emissions(pos, state);
    if (acc == ninf) return;
    if (pos == n) {
      if (tm.end_ok(state) && acc > best) best = acc;
      return;
    }
    for (int s = 0; s < S; ++s)
      if (tm.allowed(state, s)) dfs(pos + 1, s, acc);
  };
  for (int s = 0; s < S; ++s)
    if (tm.start_ok(s)) dfs(1, s, 0.0);
  return best;
}

Eigen::MatrixXd repair_emissions(int predicate, const Eigen::VectorXd& edge_prob,
                                 const Eigen::MatrixXd& label_probs, const LabelInventory& inv,
                                 const TransitionMatrix& tm) {
  const int n = static_cast<int>(edge_prob.size()) - 1;
  const int R = static_cast<int>(inv.roles().size());
  const double ninf = -std::numeric_limits<double>::infinity();
  Eigen::MatrixXd emis(n + 1, tm.states());
  auto safe_log = [&](double x) { return x > 0.0 ? std::log(x) : ninf; };
  for (int m = 1; m <= n; ++m) {
    const double pe = m == predicate ? 0.0 : edge_prob(m);
    for (int r = 0; r < R; ++r) {
      const int bi = inv.index_of(CompositeLabel::begin(inv.roles()[static_cast<size_t>(r)]));
      const int ei = inv.index_of(CompositeLabel::end(inv.roles()[static_cast<size_t>(r)]));
      emis(m, tm.b_state(r)) = safe_log(pe) + safe_log(label_probs(m, bi));
      emis(m, tm.e_state(r)) = safe_log(pe) + safe_log(label_probs(m, ei));
      emis(m, tm.i_state(r)) = pe < 1.0 ? std::log1p(-pe) : ninf;
    }
    emis(m, tm.o_state()) = pe < 1.0 ? std::log1p(-pe) : ninf;
  }
  return emis;
}

bool sequence_is_legal(const std::vector<int>& states, const TransitionMatrix& tm,
                       std::string* why) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  if (states.empty()) return true;
  int pending = -1;  // role of the open B/I run
  char prev = 0;
  for (size_t m = 0; m < states.size(); ++m) {
    const char k = tm.kind(states[m]);
    const int r = tm.role_of(states[m]);
    if (m == 0) {
      if (k != 'B' && k != 'O') return fail("bad start state");
    } else {
      if (prev == 'E' && (k == 'E' || k == 'I')) return fail("E followed by E/I");
      if (prev == 'O' && (k == 'E' || k == 'I')) return fail("O followed by E/I");
      if (prev == 'I' && (k == 'B' || k == 'O')) return fail("I followed by B/O");
    }
    switch (k) {
      case 'B': pending = r; break;
      case 'I':
        if (pending != r) return fail("I without a matching open B");
        break;
      case 'E':
        if (pending != r) return fail("E without a matching same-role open");
        pending = -1;
        break;
      default: pending = -1; break;
    }
    prev = k;
  }
  if (prev == 'I') return fail("sequence ends inside an argument");
  return true;
}

SyntheticEmissions emissions_for_frame(const PredicateFrame& f, int n, const LabelInventory& inv,
                                       double edge_hi, double edge_lo, double label_conf) {
  SyntheticEmissions out;
  out.edge_prob = Eigen::VectorXd::Constant(n + 1, edge_lo);
  out.edge_prob(0) = 0.0;
  std::vector<int> want_label(static_cast<size_t>(n + 1), -1);
  for (const Argument& a : f.arguments) {
    out.edge_prob(a.span.begin) = edge_hi;
    want_label[static_cast<size_t>(a.span.begin)] = inv.index_of(CompositeLabel::begin(a.role));
    if (a.span.end > a.span.begin) {
      out.edge_prob(a.span.end) = edge_hi;
      want_label[static_cast<size_t>(a.span.end)] = inv.index_of(CompositeLabel::end(a.role));
    }
  }
  const int L = inv.size();
  int permitted = 0;
  for (int l = 0; l < L; ++l)
    if (!inv.root_allowed(l)) ++permitted;
  out.label_probs = Eigen::MatrixXd::Zero(n + 1, L);
  for (int m = 1; m <= n; ++m) {
    for (int l = 0; l < L; ++l) {
      if (inv.root_allowed(l)) continue;
      if (want_label[static_cast<size_t>(m)] < 0)
        out.label_probs(m, l) = 1.0 / permitted;
      else if (l == want_label[static_cast<size_t>(m)])
        out.label_probs(m, l) = label_conf;
      else
        out.label_probs(m, l) = (1.0 - label_conf) / (permitted - 1);
    }
  }
  return out;
}

// ---- property suites ---------------------------------------------------------

namespace {

PropertyResult make_result(const std::string& name, int cases, const std::string& failure) {
  PropertyResult r;
  r.name = name;
  r.pass = failure.empty();
  r.detail = failure.empty() ? std::to_string(cases) + " cases" : failure;
  return r;
}

}  // namespace

PropertyResult roundtrip_span(int cases, uint64_t seed) {
  std::mt19937_64 rng(seed);
  FuzzConfig cfg;
  std::string failure;
  for (int c = 0; c < cases && failure.empty(); ++c) {
    const SrlStructure s = random_structure(rng, cfg);
    const SemGraph g = srl_to_graph(s);
    // Edge count: one Root edge per frame, one or two edges per argument.
    size_t expect = s.frames.size();
    for (const PredicateFrame& f : s.frames)
      for (const Argument& a : f.arguments) expect += a.span.width() == 1 ? 1 : 2;
    if (g.edges().size() != expect) {
      failure = "case " + std::to_string(c) + ": edge count mismatch";
      break;
    }
    auto [back, reports] = graph_to_srl(g, s.sentence);
    if (!reports.empty())
      failure = "case " + std::to_string(c) + ": unexpected conflicts";
    else if (!(back.normalized() == s.normalized()))
      failure = "case " + std::to_string(c) + ": round trip mismatch";
  }
  return make_result("span round trip", cases, failure);
}

PropertyResult roundtrip_dep(int cases, uint64_t seed) {
  std::mt19937_64 rng(seed);
  FuzzConfig cfg;
  std::string failure;
  for (int c = 0; c < cases && failure.empty(); ++c) {
    const SrlStructure s = random_dep_structure(rng, cfg);
    const SemGraph g = dep_srl_to_graph(s);
    const SrlStructure back = graph_to_dep_srl(g, s.sentence);
    if (!(back.normalized() == s.normalized()))
      failure = "case " + std::to_string(c) + ": round trip mismatch";
  }
  return make_result("dependency round trip", cases, failure);
}

PropertyResult viterbi_direct_equivalence(int cases, uint64_t seed) {
  std::mt19937_64 rng(seed);
  FuzzConfig cfg;
  cfg.max_n = 12;
  const LabelInventory inv =
      LabelInventory::span(std::set<std::string>(cfg.roles.begin(), cfg.roles.end()));
  std::string failure;
  for (int c = 0; c < cases && failure.empty(); ++c) {
    const int n = 2 + static_cast<int>(rng() % 11);
    const int k = 1 + static_cast<int>(rng() % static_cast<uint64_t>(n));
    PredicateFrame f;
    f.predicate = k;
    std::vector<std::string> roles = cfg.roles;
    std::shuffle(roles.begin(), roles.end(), rng);
    const std::vector<Span> spans =
        random_spans(rng, n, static_cast<int>(rng() % 4), 3, k);
    for (size_t a = 0; a < spans.size(); ++a) f.arguments.push_back({spans[a], roles[a]});

    const auto direct = recover_arguments(frame_events(f));
    if (!direct.second.empty()) continue;  // generator guarantees this

    const SyntheticEmissions se = emissions_for_frame(f, n, inv);
    const RepairResult rr = viterbi_repair(k, se.edge_prob, se.label_probs, inv);
    std::vector<Argument> want = direct.first, got = rr.arguments;
    std::sort(want.begin(), want.end());
    std::sort(got.begin(), got.end());
    if (want != got) failure = "case " + std::to_string(c) + ": repaired arguments differ";
  }
  return make_result("repair matches direct recovery on conflict-free input", cases, failure);
}

PropertyResult viterbi_vs_enumeration(int cases, uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::set<std::string> roles{"A0", "A1"};
  const LabelInventory inv = LabelInventory::span(roles);
  const TransitionMatrix tm(2);
  std::uniform_real_distribution<double> unit(0.01, 0.99);
  std::string failure;
  for (int c = 0; c < cases && failure.empty(); ++c) {
    const int n = 2 + static_cast<int>(rng() % 7);  // up to 8 words
    const int k = 1 + static_cast<int>(rng() % static_cast<uint64_t>(n));
    Eigen::VectorXd edge_prob(n + 1);
    edge_prob.setZero();
    for (int m = 1; m <= n; ++m) edge_prob(m) = unit(rng);
    Eigen::MatrixXd label_probs = Eigen::MatrixXd::Zero(n + 1, inv.size());
    for (int m = 1; m <= n; ++m) {
      double z = 0.0;
      std::vector<double> w(static_cast<size_t>(inv.size()), 0.0);
      for (int l = 0; l < inv.size(); ++l)
        if (!inv.root_allowed(l)) z += (w[static_cast<size_t>(l)] = unit(rng));
      for (int l = 0; l < inv.size(); ++l) label_probs(m, l) = w[static_cast<size_t>(l)] / z;
    }
    const RepairResult rr = viterbi_repair(k, edge_prob, label_probs, inv);
    const Eigen::MatrixXd emis = repair_emissions(k, edge_prob, label_probs, inv, tm);
    const double brute = enumerate_best_path(emis, tm);
    if (rr.log_score != brute) {
      std::ostringstream os;
      os << "case " << c << ": dp score " << rr.log_score << " vs enumeration " << brute;
      failure = os.str();
      break;
    }
    // Re-derive the state path from the printed sequence and check legality
    // with the independent rules.
    std::vector<int> states;
    for (int m = 0; m < n; ++m) {
      const std::string& name = rr.sequence[static_cast<size_t>(m)];
      if (name == "O") {
        states.push_back(tm.o_state());
      } else if (name == "I") {
        // An I must continue the open role of the preceding state.
        const int prev = states.back();
        states.push_back(tm.i_state(tm.role_of(prev)));
      } else {
        const std::string role = name.substr(2);
        const auto it = std::find(inv.roles().begin(), inv.roles().end(), role);
        const int r = static_cast<int>(it - inv.roles().begin());
        states.push_back(name[0] == 'B' ? tm.b_state(r) : tm.e_state(r));
      }
    }
    std::string why;
    if (!sequence_is_legal(states, tm, &why))
      failure = "case " + std::to_string(c) + ": illegal output (" + why + ")";
  }
  return make_result("repair matches exhaustive enumeration", cases, failure);
}

PropertyResult mfvi_vs_oracle(int cases, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.5, 1.5);
  std::string failure;
  for (int c = 0; c < cases && failure.empty(); ++c) {
    const int n = 1 + static_cast<int>(rng() % 5);
    const Index n1 = n + 1;
    Tensor s({n1, n1}), sib({n1, n1, n1}), cop({n1, n1, n1}), grd({n1, n1, n1});
    for (Index i = 0; i < s.size(); ++i) s.array()(i) = unit(rng);
    for (Index i = 0; i < n1; ++i)
      for (Index j = 0; j < n1; ++j)
        for (Index k = 0; k < n1; ++k) {
          grd.at3(i, j, k) = unit(rng);
          if (j < k) {
            const double vs = unit(rng);
            sib.at3(i, j, k) = vs;
            sib.at3(i, k, j) = vs;  // shared symmetric entries
          }
          if (j < k) {
            const double vc = unit(rng);
            cop.at3(i, j, k) = vc;
            cop.at3(i, k, j) = vc;
          }
        }
    Tape tape;
    SecondOrderScores so{tape.constant(sib), tape.constant(cop), tape.constant(grd)};
    Val q = mfvi(tape, tape.constant(s), so, 3);
    const Eigen::MatrixXd oracle = mfvi_scalar_oracle(
        s.mat(), [&](int i, int j, int k) { return sib.at3(i, j, k); },
        [&](int i, int j, int k) { return cop.at3(j, i, k); },
        [&](int i, int j, int k) { return grd.at3(j, i, k); }, 3);
    const Tensor& got = tape.value(q);
    double max_diff = 0.0;
    for (Index i = 0; i < n1; ++i)
      for (Index j = 1; j < n1; ++j)
        if (i != j) max_diff = std::max(max_diff, std::abs(got.at(i, j) - oracle(i, j)));
    if (max_diff > 1e-12)
      failure = "case " + std::to_string(c) + ": max deviation " + std::to_string(max_diff);
  }
  return make_result("mean-field matches scalar oracle", cases, failure);
}

std::vector<PropertyResult> run_all(int fuzz_cases, uint64_t seed) {
  return {roundtrip_span(fuzz_cases, seed),
          roundtrip_dep(fuzz_cases, seed + 1),
          viterbi_direct_equivalence(1000, seed + 2),
          viterbi_vs_enumeration(500, seed + 3),
          mfvi_vs_oracle(100, seed + 4)};
}

}  // namespace srl::check
