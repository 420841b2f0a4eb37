#include "srl/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace srl {

using num::Index;
using num::Tape;
using num::Tensor;
using num::Val;

Val mfvi(Tape& t, Val edge_scores, const SecondOrderScores& so, int iters,
         std::vector<Val>* history) {
  if (iters < 0) throw std::invalid_argument("mfvi: negative iteration count");
  const Index n1 = t.value(edge_scores).rows();
  Val mask = t.constant(candidate_mask(n1));
  Val q = cmul(sigmoid(edge_scores), mask);
  if (history) history->push_back(q);
  for (int it = 0; it < iters; ++it) {
    Val msg = so_messages(q, so.sib_ijk, so.cop_jik, so.grd_jik);
    q = cmul(sigmoid(add(edge_scores, msg)), mask);
    if (history) history->push_back(q);
  }
  return q;
}

PosteriorQ mfvi_posteriors(Tape& t, Val edge_scores, const SecondOrderScores& so, int iters) {
  std::vector<Val> history;
  mfvi(t, edge_scores, so, iters, &history);
  PosteriorQ q;
  for (Val v : history) q.iterates.push_back(t.value(v));
  return q;
}

std::vector<std::pair<int, int>> threshold_edges(const Tensor& q) {
  std::vector<std::pair<int, int>> out;
  const Index n1 = q.rows();
  for (Index i = 0; i < n1; ++i)
    for (Index j = 1; j < n1; ++j)
      if (i != j && q.at(i, j) > 0.5) out.emplace_back(static_cast<int>(i), static_cast<int>(j));
  return out;
}

SemGraph assign_labels(const std::vector<std::pair<int, int>>& edges, const Tensor& label_probs,
                       const LabelInventory& inv, int n) {
  SemGraph g(n);
  const Index L = label_probs.shape().back();
  for (auto [i, j] : edges) {
    int best = -1;
    double best_p = -1.0;
    for (Index l = 0; l < L; ++l) {
      const double p = label_probs.at3(i, j, l);
      if (p > best_p) {
        best_p = p;
        best = static_cast<int>(l);
      }
    }
    g.add_edge(i, j, inv.label(best));
  }
  return g;
}

// ---- transition matrix -----------------------------------------------------

TransitionMatrix::TransitionMatrix(int role_count) : roles_(role_count) {
  if (role_count < 1) throw std::invalid_argument("transition matrix: no roles");
}

char TransitionMatrix::kind(int s) const {
  if (s < 2 * roles_) return s % 2 == 0 ? 'B' : 'E';
  return s == o_state() ? 'O' : 'I';
}

int TransitionMatrix::role_of(int s) const {
  if (s < 2 * roles_) return s / 2;
  if (s == o_state()) return -1;
  return s - o_state() - 1;
}

bool TransitionMatrix::allowed(int from, int to) const {
  const char kf = kind(from), kt = kind(to);
  // Base pattern over collapsed kinds.
  if (kf == 'E' && (kt == 'E' || kt == 'I')) return false;
  if (kf == 'O' && (kt == 'E' || kt == 'I')) return false;
  if (kf == 'I' && (kt == 'B' || kt == 'O')) return false;
  // Role refinements keep open arguments typed.
  if (kt == 'E' && (kf == 'B' || kf == 'I')) return role_of(from) == role_of(to);
  if (kt == 'I' && (kf == 'B' || kf == 'I')) return role_of(from) == role_of(to);
  return true;
}

bool TransitionMatrix::start_ok(int s) const {
  const char k = kind(s);
  return k == 'B' || k == 'O';
}

bool TransitionMatrix::end_ok(int s) const { return kind(s) != 'I'; }

std::string TransitionMatrix::state_name(int s, const std::vector<std::string>& roles) const {
  switch (kind(s)) {
    case 'B': return "B-" + roles.at(static_cast<size_t>(role_of(s)));
    case 'E': return "E-" + roles.at(static_cast<size_t>(role_of(s)));
    case 'O': return "O";
    default: return "I";
  }
}

// ---- constrained Viterbi ----------------------------------------------------

RepairResult viterbi_repair(int predicate, const Eigen::VectorXd& edge_prob,
                            const Eigen::MatrixXd& label_probs, const LabelInventory& inv) {
  const int n = static_cast<int>(edge_prob.size()) - 1;
  const int R = static_cast<int>(inv.roles().size());
  TransitionMatrix tm(R);
  const int S = tm.states();
  const double ninf = -std::numeric_limits<double>::infinity();

  // Label-inventory indices of B-r / E-r, in role order.
  std::vector<int> b_idx(static_cast<size_t>(R)), e_idx(static_cast<size_t>(R));
  for (int r = 0; r < R; ++r) {
    b_idx[static_cast<size_t>(r)] = inv.index_of(CompositeLabel::begin(inv.roles()[static_cast<size_t>(r)]));
    e_idx[static_cast<size_t>(r)] = inv.index_of(CompositeLabel::end(inv.roles()[static_cast<size_t>(r)]));
  }

  Eigen::MatrixXd emis(n + 1, S);
  for (int m = 1; m <= n; ++m) {
    const double pe = m == predicate ? 0.0 : edge_prob(m);
    const double lp = pe > 0.0 ? std::log(pe) : ninf;
    const double l1p = pe < 1.0 ? std::log1p(-pe) : ninf;
    for (int r = 0; r < R; ++r) {
      const double pb = label_probs(m, b_idx[static_cast<size_t>(r)]);
      const double pev = label_probs(m, e_idx[static_cast<size_t>(r)]);
      emis(m, tm.b_state(r)) = lp + (pb > 0.0 ? std::log(pb) : ninf);
      emis(m, tm.e_state(r)) = lp + (pev > 0.0 ? std::log(pev) : ninf);
      emis(m, tm.i_state(r)) = l1p;
    }
    emis(m, tm.o_state()) = l1p;
  }

  Eigen::MatrixXd dp = Eigen::MatrixXd::Constant(n + 1, S, ninf);
  Eigen::MatrixXi back = Eigen::MatrixXi::Constant(n + 1, S, -1);
  for (int s = 0; s < S; ++s)
    if (tm.start_ok(s)) dp(1, s) = emis(1, s);
  for (int m = 2; m <= n; ++m) {
    for (int s = 0; s < S; ++s) {
      double best = ninf;
      int arg = -1;
      for (int p = 0; p < S; ++p) {
        if (!tm.allowed(p, s) || dp(m - 1, p) == ninf) continue;
        if (dp(m - 1, p) > best) {  // strict: ties keep the earlier state
          best = dp(m - 1, p);
          arg = p;
        }
      }
      if (arg >= 0) {
        dp(m, s) = best + emis(m, s);
        back(m, s) = arg;
      }
    }
  }

  double best = ninf;
  int cur = -1;
  for (int s = 0; s < S; ++s) {
    if (!tm.end_ok(s)) continue;
    if (dp(n, s) > best) {
      best = dp(n, s);
      cur = s;
    }
  }
  if (cur < 0) throw std::runtime_error("viterbi: no legal path");  // all-O is always legal

  std::vector<int> path(static_cast<size_t>(n + 1), -1);
  for (int m = n; m >= 1; --m) {
    path[static_cast<size_t>(m)] = cur;
    cur = back(m, cur);
  }

  RepairResult out;
  out.log_score = best;
  out.sequence.reserve(static_cast<size_t>(n));
  for (int m = 1; m <= n; ++m)
    out.sequence.push_back(tm.state_name(path[static_cast<size_t>(m)], inv.roles()));

  // Path -> arguments: B-r alone is one word; B-r I_r* E-r spans to the E.
  for (int m = 1; m <= n;) {
    const int s = path[static_cast<size_t>(m)];
    if (tm.kind(s) != 'B') {
      ++m;
      continue;
    }
    const int r = tm.role_of(s);
    int q = m + 1;
    while (q <= n && path[static_cast<size_t>(q)] == tm.i_state(r)) ++q;
    if (q <= n && path[static_cast<size_t>(q)] == tm.e_state(r)) {
      out.arguments.push_back({{m, q}, inv.roles()[static_cast<size_t>(r)]});
      m = q + 1;
    } else {
      out.arguments.push_back({{m, m}, inv.roles()[static_cast<size_t>(r)]});
      ++m;
    }
  }
  return out;
}

// ---- pipeline ---------------------------------------------------------------

ForwardPass run_forward(Tape& t, const Model& m, const std::vector<TokenIds>& ids, Order order,
                        double dropout, std::mt19937_64* rng) {
  ForwardPass fp;
  std::vector<Val> h = encode(t, m.params, m.cfg.encoder(), ids, dropout, rng);
  fp.H = concat_cols(h);
  fp.edges = score_edges(t, m.params, fp.H);
  fp.labels = score_labels(t, m.params, fp.H, m.inventory);
  if (order == Order::O2) {
    fp.second = score_second_order(t, m.params, fp.H);
    fp.p_final = mfvi(t, fp.edges.scores, *fp.second, m.cfg.mfvi_iters, &fp.q_history);
  } else {
    const Index n1 = t.value(fp.H).cols();
    fp.p_final = cmul(fp.edges.probs, t.constant(candidate_mask(n1)));
  }
  return fp;
}

ScoreTensors collect_score_tensors(const Tape& t, const ForwardPass& fp) {
  ScoreTensors st;
  st.edge = t.value(fp.edges.scores);
  st.label = t.value(fp.labels.scores);
  if (fp.second) {
    st.sib_ijk = t.value(fp.second->sib_ijk);
    st.cop_jik = t.value(fp.second->cop_jik);
    st.grd_jik = t.value(fp.second->grd_jik);
  }
  return st;
}

SrlStructure decode_from_scores(const Tensor& q, const Tensor& lp, const Sentence& sentence,
                                const LabelInventory& inv, Mode mode) {
  const int n = sentence.size();
  SemGraph g = assign_labels(threshold_edges(q), lp, inv, n);

  if (mode == Mode::Dependency) return graph_to_dep_srl(g, sentence);

  auto [structure, reports] = graph_to_srl(g, sentence);
  for (const ConflictReport& rep : reports) {
    const int k = rep.predicate;
    Eigen::VectorXd edge_prob(n + 1);
    edge_prob.setZero();
    for (int j = 1; j <= n; ++j)
      if (j != k) edge_prob(j) = q.at(k, j);
    Eigen::MatrixXd label_probs(n + 1, inv.size());
    label_probs.setZero();
    for (int j = 1; j <= n; ++j)
      for (int l = 0; l < inv.size(); ++l) label_probs(j, l) = lp.at3(k, j, l);
    RepairResult rr = viterbi_repair(k, edge_prob, label_probs, inv);
    for (PredicateFrame& f : structure.frames)
      if (f.predicate == k) f.arguments = rr.arguments;
  }
  return structure;
}

SrlStructure decode_sentence(const Model& m, const Sentence& sentence, Order order) {
  const int n = sentence.size();
  if (n < 1) throw std::invalid_argument("decode: empty sentence");
  if (n > m.cfg.len_cap)
    throw std::invalid_argument("decode: sentence length " + std::to_string(n) +
                                " exceeds cap " + std::to_string(m.cfg.len_cap));
  Tape tape;
  std::vector<TokenIds> ids = token_ids(m.vocab, sentence);
  ForwardPass fp = run_forward(tape, m, ids, order);
  return decode_from_scores(tape.value(fp.p_final), tape.value(fp.labels.probs), sentence,
                            m.inventory, m.cfg.mode);
}

}  // namespace srl
