#include "srl/training.hpp"

#include "srl/parallel.hpp"
#include "srl/transform.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <set>
#include <stdexcept>

namespace srl {

using num::Index;
using num::Tape;
using num::Tensor;
using num::Val;

ModelConfig TrainConfig::model_config() const {
  ModelConfig mc;
  mc.mode = mode;
  mc.word_dim = word_dim;
  mc.lemma_dim = lemma_dim;
  mc.char_dim = char_dim;
  mc.char_hidden = char_hidden;
  mc.hidden = hidden;
  mc.layers = layers;
  mc.edge_mlp = edge_mlp;
  mc.label_mlp = label_mlp;
  mc.second_mlp = second_mlp;
  mc.mfvi_iters = mfvi_iters;
  mc.len_cap = len_cap;
  return mc;
}

void TrainConfig::validate() const {
  if (!(lambda > 0.0 && lambda < 1.0))
    throw std::invalid_argument("config: lambda must be in (0, 1)");
  if (mfvi_iters < 0) throw std::invalid_argument("config: mfvi_iters must be >= 0");
  if (epochs < 1) throw std::invalid_argument("config: epochs must be >= 1");
  if (layers < 1) throw std::invalid_argument("config: layers must be >= 1");
  if (batch_tokens < 1) throw std::invalid_argument("config: batch_tokens must be >= 1");
}

Val edge_loss(Tape& t, Val p_prime, const SemGraph& gold) {
  const Index n1 = gold.word_count() + 1;
  if (t.value(p_prime).rows() != n1 || t.value(p_prime).cols() != n1)
    throw std::invalid_argument("edge_loss: probability grid does not match the gold graph");
  Tensor w_gold({n1, n1}), w_rest({n1, n1});
  for (Index i = 0; i < n1; ++i)
    for (Index j = 1; j < n1; ++j)
      if (i != j) w_rest.at(i, j) = 1.0;
  for (const GraphEdge& e : gold.edges()) {
    w_gold.at(e.head, e.mod) = 1.0;
    w_rest.at(e.head, e.mod) = 0.0;
  }
  Val pc = clamp(p_prime, 1e-12, 1.0 - 1e-12);
  Val pos = dot_const(log_v(pc), std::move(w_gold));
  Val neg_side = dot_const(log_v(one_minus(pc)), std::move(w_rest));
  return num::neg(add(pos, neg_side));
}

Val label_loss(Tape& t, Val label_probs, const SemGraph& gold, const LabelInventory& inv) {
  const Tensor& lp = t.value(label_probs);
  const Index n1 = gold.word_count() + 1;
  if (lp.rank() != 3 || lp.dim(0) != n1 || lp.dim(2) != inv.size())
    throw std::invalid_argument("label_loss: probability tensor does not match");
  Tensor w(lp.shape());
  for (const GraphEdge& e : gold.edges()) {
    const int l = inv.index_of(e.label);
    if (l < 0 || inv.root_allowed(l) != (e.head == 0))
      throw std::invalid_argument("label_loss: gold label " + e.label.str() +
                                  " is masked out for this head kind");
    w.at3(e.head, e.mod, l) = 1.0;
  }
  return num::neg(dot_const(log_v(clamp(label_probs, 1e-12, 2.0)), std::move(w)));
}

Val total_loss(Val label, Val edge, double lambda) {
  return add(affine_scalar(label, lambda, 0.0), affine_scalar(edge, 1.0 - lambda, 0.0));
}

Val sentence_loss(Tape& t, const Model& m, const std::vector<TokenIds>& ids,
                  const SemGraph& gold, Order order, double lambda) {
  ForwardPass fp = run_forward(t, m, ids, order);
  Val le = edge_loss(t, fp.p_final, gold);
  Val ll = label_loss(t, fp.labels.probs, gold, m.inventory);
  return total_loss(ll, le, lambda);
}

F1Result evaluate_f1(const std::vector<SrlStructure>& predicted,
                     const std::vector<SrlStructure>& gold) {
  if (predicted.size() != gold.size())
    throw std::invalid_argument("evaluate_f1: prediction/gold lists are misaligned");
  auto tuples = [](const std::vector<SrlStructure>& structs) {
    std::set<std::string> out;
    for (size_t s = 0; s < structs.size(); ++s) {
      for (const PredicateFrame& f : structs[s].frames) {
        out.insert(std::to_string(s) + "|" + std::to_string(f.predicate));
        for (const Argument& a : f.arguments)
          out.insert(std::to_string(s) + "|" + std::to_string(f.predicate) + "|" +
                     std::to_string(a.span.begin) + "|" + std::to_string(a.span.end) + "|" +
                     a.role);
      }
    }
    return out;
  };
  const std::set<std::string> p = tuples(predicted), g = tuples(gold);
  F1Result r;
  r.predicted = static_cast<long>(p.size());
  r.gold = static_cast<long>(g.size());
  for (const std::string& t : p)
    if (g.count(t)) ++r.correct;
  r.precision = r.predicted == 0 ? 0.0 : 100.0 * static_cast<double>(r.correct) / static_cast<double>(r.predicted);
  r.recall = r.gold == 0 ? 0.0 : 100.0 * static_cast<double>(r.correct) / static_cast<double>(r.gold);
  r.f1 = (r.precision + r.recall) == 0.0 ? 0.0
                                         : 2.0 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

void Adam::step(num::Params& params, std::vector<Tensor>& grads) {
  if (m_.empty()) {
    for (size_t i = 0; i < params.size(); ++i) {
      m_.emplace_back(params.tensor(i).shape());
      v_.emplace_back(params.tensor(i).shape());
    }
  }
  double sq = 0.0;
  for (const Tensor& g : grads) sq += g.array().square().sum();
  const double norm = std::sqrt(sq);
  const double scale = (clip_ > 0.0 && norm > clip_) ? clip_ / norm : 1.0;
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (size_t i = 0; i < params.size(); ++i) {
    Eigen::ArrayXd g = grads[i].array() * scale;
    m_[i].array() = beta1_ * m_[i].array() + (1.0 - beta1_) * g;
    v_[i].array() = beta2_ * v_[i].array() + (1.0 - beta2_) * g.square();
    params.tensor(i).array() -=
        lr_ * (m_[i].array() / bc1) / ((v_[i].array() / bc2).sqrt() + eps_);
  }
}

namespace {

struct PreparedSentence {
  std::vector<TokenIds> ids;
  SemGraph gold;
  int tokens = 0;
};

std::vector<std::vector<int>> batch_by_tokens(const std::vector<PreparedSentence>& data,
                                              int budget) {
  std::vector<std::vector<int>> batches;
  std::vector<int> cur;
  int used = 0;
  for (int i = 0; i < static_cast<int>(data.size()); ++i) {
    if (!cur.empty() && used + data[static_cast<size_t>(i)].tokens > budget) {
      batches.push_back(cur);
      cur.clear();
      used = 0;
    }
    cur.push_back(i);
    used += data[static_cast<size_t>(i)].tokens;
  }
  if (!cur.empty()) batches.push_back(cur);
  return batches;
}

F1Result decode_and_score(const Model& m, const std::vector<SrlStructure>& gold, Order order,
                          int workers) {
  std::vector<SrlStructure> pred(gold.size());
  parallel_for(static_cast<int>(gold.size()), workers, [&](int i) {
    pred[static_cast<size_t>(i)] = decode_sentence(m, gold[static_cast<size_t>(i)].sentence, order);
  });
  return evaluate_f1(pred, gold);
}

}  // namespace

TrainResult train(const std::vector<SrlStructure>& corpus, const std::vector<SrlStructure>& dev,
                  const TrainConfig& cfg, const std::string& checkpoint_path,
                  const std::string& log_path) {
  cfg.validate();
  if (corpus.empty()) throw std::invalid_argument("train: empty corpus");

  Vocab vocab = Vocab::build(corpus, cfg.min_freq);
  std::set<std::string> roles, senses;
  for (const SrlStructure& s : corpus)
    for (const PredicateFrame& f : s.frames) {
      if (cfg.mode == Mode::Dependency) senses.insert(f.sense);
      for (const Argument& a : f.arguments) roles.insert(a.role);
    }
  if (roles.empty()) throw std::invalid_argument("train: corpus has no argument roles");
  LabelInventory inv = cfg.mode == Mode::Span ? LabelInventory::span(roles)
                                              : LabelInventory::dependency(senses, roles);

  Model model = Model::init(cfg.model_config(), std::move(vocab), std::move(inv), cfg.seed);
  model.trained_order = cfg.order;
  if (!cfg.embeddings.empty()) model.load_word_vectors(cfg.embeddings);

  std::vector<PreparedSentence> data;
  data.reserve(corpus.size());
  for (const SrlStructure& s : corpus)
    data.push_back({token_ids(model.vocab, s.sentence),
                    cfg.mode == Mode::Span ? srl_to_graph(s) : dep_srl_to_graph(s),
                    s.sentence.size()});
  const std::vector<std::vector<int>> batches = batch_by_tokens(data, cfg.batch_tokens);

  Adam opt(cfg.learning_rate, cfg.clip_norm);
  std::mt19937_64 noise_rng(cfg.seed + 0x9e3779b97f4a7c15ULL);

  std::ofstream log;
  if (!log_path.empty()) {
    log.open(log_path);
    if (!log) throw std::runtime_error("train: cannot open log file " + log_path);
  }

  TrainResult result;
  double best_select = -std::numeric_limits<double>::infinity();
  std::vector<Tensor> best_params;
  bool early_stopped = false;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    double epoch_loss = 0.0;
    for (const std::vector<int>& batch : batches) {
      // Per-sentence tapes run in parallel; gradients reduce in sentence
      // order so parameter bytes never depend on scheduling.
      std::vector<double> losses(batch.size(), 0.0);
      std::vector<std::vector<std::pair<size_t, Tensor>>> grads(batch.size());
      std::vector<std::vector<TokenIds>> noisy(batch.size());
      for (size_t b = 0; b < batch.size(); ++b) {
        noisy[b] = data[static_cast<size_t>(batch[b])].ids;
        apply_unk_noise(noisy[b], model.vocab, cfg.unk_rate, noise_rng);
      }
      parallel_for(static_cast<int>(batch.size()), cfg.workers, [&](int b) {
        const PreparedSentence& ps = data[static_cast<size_t>(batch[static_cast<size_t>(b)])];
        Tape tape;
        Val loss = sentence_loss(tape, model, noisy[static_cast<size_t>(b)], ps.gold, cfg.order,
                                 cfg.lambda);
        losses[static_cast<size_t>(b)] = tape.value(loss).value();
        tape.backward(loss);
        for (size_t pi = 0; pi < model.params.size(); ++pi) {
          const Tensor* g = tape.grad_of(model.params.tensor(pi));
          if (g) grads[static_cast<size_t>(b)].emplace_back(pi, *g);
        }
      });
      std::vector<Tensor> accum;
      accum.reserve(model.params.size());
      for (size_t pi = 0; pi < model.params.size(); ++pi)
        accum.emplace_back(model.params.tensor(pi).shape());
      for (size_t b = 0; b < batch.size(); ++b) {
        epoch_loss += losses[b];
        if (!std::isfinite(losses[b]))
          throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch));
        for (auto& [pi, g] : grads[b]) accum[pi].array() += g.array();
      }
      opt.step(model.params, accum);
    }

    EpochStats st;
    st.epoch = epoch;
    st.loss = epoch_loss;
    if (!dev.empty()) st.dev = decode_and_score(model, dev, cfg.order, cfg.workers);
    if (cfg.early_stop_train_f1 > 0.0)
      st.train_f1 = decode_and_score(model, corpus, cfg.order, cfg.workers).f1;
    st.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.log.push_back(st);

    if (log) {
      nlohmann::json j{{"epoch", st.epoch},
                       {"loss", st.loss},
                       {"dev_p", st.dev.precision},
                       {"dev_r", st.dev.recall},
                       {"dev_f1", st.dev.f1},
                       {"seconds", st.seconds}};
      if (st.train_f1 >= 0.0) j["train_f1"] = st.train_f1;
      log << j.dump() << "\n";
      log.flush();
    }

    const double select = dev.empty() ? -st.loss : st.dev.f1;
    if (select > best_select) {
      best_select = select;
      result.best_dev_f1 = st.dev.f1;
      result.best_epoch = epoch;
      best_params.clear();
      for (size_t pi = 0; pi < model.params.size(); ++pi)
        best_params.push_back(model.params.tensor(pi));
      if (!checkpoint_path.empty()) model.save(checkpoint_path);
    }

    if (cfg.early_stop_train_f1 > 0.0 && st.train_f1 >= cfg.early_stop_train_f1) {
      early_stopped = true;
      break;
    }
  }

  // An early stop means the current parameters hit the train target; keep
  // them. Otherwise fall back to the best dev checkpoint.
  if (early_stopped) {
    if (!checkpoint_path.empty()) model.save(checkpoint_path);
  } else if (!best_params.empty()) {
    for (size_t pi = 0; pi < model.params.size(); ++pi) model.params.tensor(pi) = best_params[pi];
  }
  result.model = std::move(model);
  return result;
}

}  // namespace srl
