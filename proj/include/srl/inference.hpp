#pragma once

#include "srl/core.hpp"
#include "srl/model.hpp"
#include "srl/scorer.hpp"
#include "srl/tape.hpp"
#include "srl/transform.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace srl {

/// Per-edge confidence across mean-field iterations; iterates[t] is Q at
/// iteration t (t = 0 is the sigmoid of the raw edge scores), masked to the
/// candidate cells.
struct PosteriorQ {
  std::vector<num::Tensor> iterates;
  const num::Tensor& final() const { return iterates.back(); }
};

/// Unrolled mean-field refinement of edge probabilities: each iteration
/// mixes raw edge scores with posterior-weighted second-order sub-tree
/// scores and renormalizes through the sigmoid. Gradients flow through all
/// iterations. history (when given) collects Q at t = 0..iters.
num::Val mfvi(num::Tape& t, num::Val edge_scores, const SecondOrderScores& so, int iters,
              std::vector<num::Val>* history = nullptr);

/// Plain-tensor record of every iterate.
PosteriorQ mfvi_posteriors(num::Tape& t, num::Val edge_scores, const SecondOrderScores& so,
                           int iters);

/// Candidate edges with probability strictly above one half.
std::vector<std::pair<int, int>> threshold_edges(const num::Tensor& q);

/// Highest-probability permitted label per retained edge; ties resolve to
/// the earlier inventory index.
SemGraph assign_labels(const std::vector<std::pair<int, int>>& edges,
                       const num::Tensor& label_probs, const LabelInventory& inv, int n);

/// Legality matrix over the role-expanded repair alphabet
/// {B-r} u {E-r} u {O} u {I_r}. Collapsing roles yields the base pattern:
/// forbidden are E->E, E->I, O->E, O->I, I->B, I->O; within that, B-r/I_r
/// pair only with same-role E-r and I_r, and B-r opens I_r of its own role.
/// Sequences start in B or O and may not end in I.
class TransitionMatrix {
 public:
  explicit TransitionMatrix(int role_count);

  int states() const { return 3 * roles_ + 1; }
  int b_state(int r) const { return 2 * r; }
  int e_state(int r) const { return 2 * r + 1; }
  int o_state() const { return 2 * roles_; }
  int i_state(int r) const { return 2 * roles_ + 1 + r; }

  char kind(int s) const;     // 'B', 'E', 'O', 'I'
  int role_of(int s) const;   // -1 for O
  bool allowed(int from, int to) const;
  bool start_ok(int s) const;
  bool end_ok(int s) const;

  std::string state_name(int s, const std::vector<std::string>& roles) const;

 private:
  int roles_ = 0;
};

struct RepairResult {
  std::vector<std::string> sequence;  // display labels for words 1..n (I_r prints as "I")
  std::vector<Argument> arguments;
  double log_score = 0.0;
};

/// Constrained max-product relabeling of all words for one conflicted
/// predicate. edge_prob[m] is the probability of edge (predicate, m)
/// (index 0 unused; the predicate's own position counts as probability 0);
/// label_probs row m holds the masked label distribution of that edge.
/// Emissions: p(m) * p(label | m) for B/E states, 1 - p(m) shared by O and
/// every I_r. Decoding runs in log space.
RepairResult viterbi_repair(int predicate, const Eigen::VectorXd& edge_prob,
                            const Eigen::MatrixXd& label_probs, const LabelInventory& inv);

/// Everything the scoring pass produces for one sentence.
struct ForwardPass {
  num::Val H;
  EdgeScores edges;
  LabelScores labels;
  std::optional<SecondOrderScores> second;
  std::vector<num::Val> q_history;
  num::Val p_final;  // masked probabilities: sigmoid scores (O1) or final Q (O2)
};

ForwardPass run_forward(num::Tape& t, const Model& m, const std::vector<TokenIds>& ids,
                        Order order, double dropout = 0.0, std::mt19937_64* rng = nullptr);

/// Plain-tensor snapshot of every score the pass produced. Second-order
/// tensors are empty for a first-order pass.
ScoreTensors collect_score_tensors(const num::Tape& t, const ForwardPass& fp);

/// Decode tail shared by the pipeline: threshold, label, recover the
/// structure, repair conflicted predicates (span mode). q is the
/// (n+1) x (n+1) edge probability grid, label_probs the masked
/// (n+1) x (n+1) x L distributions.
SrlStructure decode_from_scores(const num::Tensor& q, const num::Tensor& label_probs,
                                const Sentence& sentence, const LabelInventory& inv, Mode mode);

/// Full pipeline: encode, score, (O2: mean-field), threshold, label, recover
/// the structure, and repair conflicted predicates. The result always
/// validates.
SrlStructure decode_sentence(const Model& m, const Sentence& sentence, Order order);

}  // namespace srl
