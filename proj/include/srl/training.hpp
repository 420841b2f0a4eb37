#pragma once

#include "srl/core.hpp"
#include "srl/inference.hpp"
#include "srl/model.hpp"
#include "srl/tape.hpp"

#include <optional>
#include <string>
#include <vector>

namespace srl {

struct TrainConfig {
  Mode mode = Mode::Span;
  Order order = Order::O2;
  double lambda = 0.06;   // label loss weight in (0, 1)
  int mfvi_iters = 3;
  int epochs = 100;
  int batch_tokens = 5000;
  double learning_rate = 1e-3;
  uint64_t seed = 1;
  int min_freq = 1;
  double unk_rate = 0.2;
  double clip_norm = 5.0;
  double dropout = 0.0;
  int workers = 1;
  double early_stop_train_f1 = 0.0;  // 0 disables; percent otherwise
  std::string embeddings;            // optional pre-trained word vector file

  int word_dim = 100;
  int lemma_dim = 50;
  int char_dim = 50;
  int char_hidden = 50;
  int hidden = 200;
  int layers = 3;
  int edge_mlp = 300;
  int label_mlp = 300;
  int second_mlp = 100;
  int len_cap = 120;

  ModelConfig model_config() const;
  void validate() const;
};

/// Binary cross-entropy over every candidate pair (head 0..n, modifier
/// 1..n, head != modifier): gold edges push p' up, the rest push it down.
/// p' is clamped 1e-12 from the boundaries.
num::Val edge_loss(num::Tape& t, num::Val p_prime, const SemGraph& gold);

/// Negative log-likelihood of the gold label on each gold edge only.
/// Throws if a gold label is not permitted under the head-kind mask.
num::Val label_loss(num::Tape& t, num::Val label_probs, const SemGraph& gold,
                    const LabelInventory& inv);

/// lambda * label + (1 - lambda) * edge.
num::Val total_loss(num::Val label, num::Val edge, double lambda);

// ---- evaluation -------------------------------------------------------------

struct F1Result {
  double precision = 0.0;  // percentages
  double recall = 0.0;
  double f1 = 0.0;
  long correct = 0;
  long predicted = 0;
  long gold = 0;
};

/// Micro-averaged over predicate tuples (sentence, k) and argument tuples
/// (sentence, k, begin, end, role); 0/0 counts as 0.
F1Result evaluate_f1(const std::vector<SrlStructure>& predicted,
                     const std::vector<SrlStructure>& gold);

// ---- optimizer ---------------------------------------------------------------

/// Adaptive moment estimation with global-norm gradient clipping.
class Adam {
 public:
  Adam(double lr, double clip_norm) : lr_(lr), clip_(clip_norm) {}
  void step(num::Params& params, std::vector<num::Tensor>& grads);

 private:
  double lr_;
  double clip_;
  double beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  long t_ = 0;
  std::vector<num::Tensor> m_, v_;
};

// ---- training loop -----------------------------------------------------------

struct EpochStats {
  int epoch = 0;
  double loss = 0.0;
  F1Result dev;
  double train_f1 = -1.0;  // only when early stopping on train F1 is active
  double seconds = 0.0;
};

struct TrainResult {
  Model model;               // parameters at the best dev F1 epoch
  std::vector<EpochStats> log;
  double best_dev_f1 = 0.0;
  int best_epoch = 0;
};

/// Deterministic given the config. Writes one JSON object per epoch to
/// log_path when given, and checkpoints the best dev F1 to checkpoint_path.
/// Aborts with a diagnostic on non-finite loss.
TrainResult train(const std::vector<SrlStructure>& corpus, const std::vector<SrlStructure>& dev,
                  const TrainConfig& cfg, const std::string& checkpoint_path = {},
                  const std::string& log_path = {});

/// Loss of one sentence on a fresh tape (shared by training and the
/// gradient checks).
num::Val sentence_loss(num::Tape& t, const Model& m, const std::vector<TokenIds>& ids,
                       const SemGraph& gold, Order order, double lambda);

}  // namespace srl
