#include "srl/scorer.hpp"

namespace srl {

using num::Index;
using num::Params;
using num::Tape;
using num::Tensor;
using num::Val;

void add_scorer_params(Params& p, const ScorerConfig& cfg, int enc_dim, int label_count,
                       std::mt19937_64& rng) {
  using num::xavier_uniform;
  for (const char* side : {"h", "m"}) {
    p.add(std::string("edge.") + side + ".W", xavier_uniform({cfg.edge_mlp, enc_dim}, rng));
    p.add(std::string("edge.") + side + ".b", Tensor({cfg.edge_mlp, 1}));
    p.add(std::string("label.") + side + ".W", xavier_uniform({cfg.label_mlp, enc_dim}, rng));
    p.add(std::string("label.") + side + ".b", Tensor({cfg.label_mlp, 1}));
  }
  p.add("edge.W", xavier_uniform({cfg.edge_mlp + 1, cfg.edge_mlp}, rng));
  for (int l = 0; l < label_count; ++l)
    p.add("label.W." + std::to_string(l),
          xavier_uniform({cfg.label_mlp + 1, cfg.label_mlp + 1}, rng));
  for (const char* role : {"h", "m", "g"}) {
    p.add(std::string("so.") + role + ".W", xavier_uniform({cfg.second_mlp, enc_dim}, rng));
    p.add(std::string("so.") + role + ".b", Tensor({cfg.second_mlp, 1}));
  }
  const Index d = cfg.second_mlp;
  const double a = std::sqrt(6.0 / static_cast<double>(3 * d + 2));
  for (const char* kind : {"sib", "cop", "grd"})
    p.add(std::string("so.W.") + kind, num::uniform({d + 1, d, d + 1}, -a, a, rng));
}

namespace {

Val mlp(Tape& t, const Params& p, const std::string& base, Val H) {
  return relu(add_colwise(matmul(t.param(p.at(base + ".W")), H), t.param(p.at(base + ".b"))));
}

}  // namespace

EdgeScores score_edges(Tape& t, const Params& p, Val H) {
  Val rh = mlp(t, p, "edge.h", H);
  Val rm = mlp(t, p, "edge.m", H);
  Val am = append_ones_row(rm);
  // scores[i][j] = [r_j^m ; 1]^T W r_i^h
  Val s = matmul(transpose(rh), matmul(transpose(t.param(p.at("edge.W"))), am));
  return {s, sigmoid(s)};
}

Tensor label_mask(const LabelInventory& inv, Index n1) {
  const Index L = inv.size();
  Tensor mask({n1, n1, L});
  for (Index i = 0; i < n1; ++i)
    for (Index j = 1; j < n1; ++j) {
      if (i == j) continue;  // self cells are not candidate edges
      for (Index l = 0; l < L; ++l)
        mask.at3(i, j, l) = (inv.root_allowed(static_cast<int>(l)) == (i == 0)) ? 1.0 : 0.0;
    }
  return mask;
}

Tensor candidate_mask(Index n1) {
  Tensor mask({n1, n1});
  for (Index i = 0; i < n1; ++i)
    for (Index j = 1; j < n1; ++j)
      if (i != j) mask.at(i, j) = 1.0;
  return mask;
}

LabelScores score_labels(Tape& t, const Params& p, Val H, const LabelInventory& inv) {
  Val rh = mlp(t, p, "label.h", H);
  Val rm = mlp(t, p, "label.m", H);
  Val ah = append_ones_row(rh);
  Val am = append_ones_row(rm);
  Val aht = transpose(ah);
  std::vector<Val> slices;
  slices.reserve(static_cast<size_t>(inv.size()));
  // scores[i][j][l] = [r_j^m ; 1]^T W_l [r_i^h ; 1]
  for (int l = 0; l < inv.size(); ++l) {
    Val wl = t.param(p.at("label.W." + std::to_string(l)));
    slices.push_back(matmul(aht, matmul(transpose(wl), am)));
  }
  Val s3 = stack_last(slices);
  const Index n1 = t.value(H).cols();
  Val p3 = softmax_last(s3, label_mask(inv, n1));
  return {s3, p3};
}

SecondOrderScores score_second_order(Tape& t, const Params& p, Val H) {
  Val rh = mlp(t, p, "so.h", H);  // (d', n+1)
  Val rm = mlp(t, p, "so.m", H);
  Val rg = mlp(t, p, "so.g", H);
  Val am = append_ones_row(rm);
  Val amt = transpose(am);
  Val ah = append_ones_row(rh);
  Val ag = append_ones_row(rg);
  Val rht = transpose(rh);
  Val wsib = t.param(p.at("so.W.sib"));
  Val wcop = t.param(p.at("so.W.cop"));
  Val wgrd = t.param(p.at("so.W.grd"));
  const Index n1 = t.value(H).cols();

  // Per head i: slice[j][k] = [r_k^m ; 1]^T (r_i^h . W) [r_j^m ; 1].
  // The mirrored (i,k,j) entry shares the stored j<k value.
  std::vector<Val> sib;
  sib.reserve(static_cast<size_t>(n1));
  for (Index i = 0; i < n1; ++i) {
    Val mid = contract_middle(wsib, slice_cols(rh, i, 1));
    sib.push_back(symmetrize_upper(matmul(amt, matmul(transpose(mid), am))));
  }

  // Per modifier j: cop slice[i][k] over the two heads (value shared across
  // i<->k), grd slice[i][k] over head i and grandchild k.
  std::vector<Val> cop, grd;
  cop.reserve(static_cast<size_t>(n1));
  grd.reserve(static_cast<size_t>(n1));
  for (Index j = 0; j < n1; ++j) {
    Val uj = append_ones_row(slice_cols(rm, j, 1));
    Val ncop = contract_last(wcop, uj);
    cop.push_back(symmetrize_upper(matmul(rht, matmul(transpose(ncop), ah))));
    Val ngrd = contract_last(wgrd, uj);
    grd.push_back(matmul(rht, matmul(transpose(ngrd), ag)));
  }
  return {stack_first(sib), stack_first(cop), stack_first(grd)};
}

}  // namespace srl
