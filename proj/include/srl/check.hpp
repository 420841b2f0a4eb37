#pragma once

#include "srl/core.hpp"
#include "srl/inference.hpp"
#include "srl/transform.hpp"

#include <Eigen/Dense>

#include <functional>
#include <random>
#include <string>
#include <vector>

namespace srl::check {

// Fuzz generators and independent oracles backing the property suites run
// by the check command and the test binaries. Oracles deliberately avoid
// the library's tape/DP code paths.

struct FuzzConfig {
  int max_n = 20;
  int max_frames = 4;
  int max_args = 4;
  // Roles are drawn without replacement within a frame: a same-role
  // re-open while an earlier same-role begin is still pending is a
  // conflict by definition, so such frames cannot round-trip.
  std::vector<std::string> roles = {"A0", "A1", "A2", "A3", "AM-TMP", "AM-LOC"};
};

SrlStructure random_structure(std::mt19937_64& rng, const FuzzConfig& cfg);
SrlStructure random_dep_structure(std::mt19937_64& rng, const FuzzConfig& cfg);

/// Boundary events of one frame, in word order.
std::vector<BoundaryEvent> frame_events(const PredicateFrame& f);

// ---- oracles ---------------------------------------------------------------

/// Plain scalar-loop mean-field iteration over candidate edges. The three
/// score accessors take semantic (i, j, k) indices.
Eigen::MatrixXd mfvi_scalar_oracle(const Eigen::MatrixXd& edge_scores,
                                   const std::function<double(int, int, int)>& sib,
                                   const std::function<double(int, int, int)>& cop,
                                   const std::function<double(int, int, int)>& grd, int iters);

/// Exhaustive search over all legal label sequences; returns the best total
/// log emission (-inf when none, which cannot happen with finite O
/// emissions).
double enumerate_best_path(const Eigen::MatrixXd& log_emissions, const TransitionMatrix& tm);

/// Emission matrix exactly as the repair decoder defines it: rows 1..n over
/// the role-expanded states, log(p * p(label)) for B/E and log(1 - p) for
/// O and every I_r; the predicate's own position counts as p = 0.
Eigen::MatrixXd repair_emissions(int predicate, const Eigen::VectorXd& edge_prob,
                                 const Eigen::MatrixXd& label_probs, const LabelInventory& inv,
                                 const TransitionMatrix& tm);

/// Independent legality check of a state path: start/end rules, the
/// collapsed forbidden-transition pattern, and role-typed pairing of every
/// E with its open B.
bool sequence_is_legal(const std::vector<int>& states, const TransitionMatrix& tm,
                       std::string* why = nullptr);

/// Synthetic decoder inputs that put dominant probability on a frame's
/// boundary edges and labels.
struct SyntheticEmissions {
  Eigen::VectorXd edge_prob;    // (n+1), index 0 unused
  Eigen::MatrixXd label_probs;  // (n+1) x L, masked to non-Root labels
};

SyntheticEmissions emissions_for_frame(const PredicateFrame& f, int n, const LabelInventory& inv,
                                       double edge_hi = 0.95, double edge_lo = 0.02,
                                       double label_conf = 0.9);

// ---- property suites ---------------------------------------------------------

struct PropertyResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

PropertyResult roundtrip_span(int cases, uint64_t seed);
PropertyResult roundtrip_dep(int cases, uint64_t seed);
PropertyResult viterbi_direct_equivalence(int cases, uint64_t seed);
PropertyResult viterbi_vs_enumeration(int cases, uint64_t seed);
PropertyResult mfvi_vs_oracle(int cases, uint64_t seed);

std::vector<PropertyResult> run_all(int fuzz_cases, uint64_t seed);

}  // namespace srl::check
