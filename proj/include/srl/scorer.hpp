#pragma once

#include "srl/core.hpp"
#include "srl/params.hpp"
#include "srl/tape.hpp"

#include <random>
#include <vector>

namespace srl {

struct ScorerConfig {
  int edge_mlp = 300;
  int label_mlp = 300;
  int second_mlp = 100;
};

void add_scorer_params(num::Params& p, const ScorerConfig& cfg, int encoder_out_dim,
                       int label_count, std::mt19937_64& rng);

/// Edge scores and probabilities over the full (n+1) x (n+1) grid indexed
/// [head][modifier]. Column 0 and the diagonal are not candidate edges;
/// callers read only candidate cells.
struct EdgeScores {
  num::Val scores;
  num::Val probs;  // sigmoid(scores)
};

EdgeScores score_edges(num::Tape& t, const num::Params& p, num::Val H);

/// Per-edge label distributions, (n+1) x (n+1) x L. The softmax is masked
/// by head kind: Root-headed edges admit only Root labels (PRD or senses),
/// other edges only non-Root labels.
struct LabelScores {
  num::Val scores;  // raw biaffine scores
  num::Val probs;   // masked softmax over the label axis
};

LabelScores score_labels(num::Tape& t, const num::Params& p, num::Val H,
                         const LabelInventory& inv);

/// Head-kind mask over (n+1, n+1, L): 1 where the label is permitted.
num::Tensor label_mask(const LabelInventory& inv, num::Index n1);

/// Candidate-edge mask over (n+1, n+1): 1 iff modifier >= 1 and head != modifier.
num::Tensor candidate_mask(num::Index n1);

/// Second-order sub-tree scores from one triaffine block per sub-tree type.
/// sib is stacked per head as [i][j][k] with s_sib(i,j,k) = s_sib(i,k,j)
/// sharing one stored value; cop and grd are stacked per modifier as
/// [j][i][k], with s_cop(i,j,k) = s_cop(k,j,i) shared likewise.
struct SecondOrderScores {
  num::Val sib_ijk;
  num::Val cop_jik;
  num::Val grd_jik;
};

SecondOrderScores score_second_order(num::Tape& t, const num::Params& p, num::Val H);

/// Plain-tensor view of all score outputs, indexed semantically.
struct ScoreTensors {
  num::Tensor edge;     // (n+1) x (n+1), [head][modifier]
  num::Tensor label;    // (n+1) x (n+1) x L
  num::Tensor sib_ijk;  // [i][j][k]
  num::Tensor cop_jik;  // [j][i][k]
  num::Tensor grd_jik;  // [j][i][k]

  double s_edge(int i, int j) const { return edge.at(i, j); }
  double s_label(int i, int j, int l) const { return label.at3(i, j, l); }
  double s_sib(int i, int j, int k) const { return sib_ijk.at3(i, j, k); }
  double s_cop(int i, int j, int k) const { return cop_jik.at3(j, i, k); }
  double s_grd(int i, int j, int k) const { return grd_jik.at3(j, i, k); }
};

}  // namespace srl
