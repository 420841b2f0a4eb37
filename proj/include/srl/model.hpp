#pragma once

#include "srl/core.hpp"
#include "srl/encoder.hpp"
#include "srl/params.hpp"
#include "srl/scorer.hpp"

#include <cstdint>
#include <string>

namespace srl {

enum class Order : uint8_t { O1, O2 };

std::string to_string(Order o);
Order order_from_string(const std::string& s);
std::string to_string(Mode m);
Mode mode_from_string(const std::string& s);

struct ModelConfig {
  Mode mode = Mode::Span;
  int word_dim = 100;
  int lemma_dim = 50;
  int char_dim = 50;
  int char_hidden = 50;
  int hidden = 200;
  int layers = 3;
  int edge_mlp = 300;
  int label_mlp = 300;
  int second_mlp = 100;
  int mfvi_iters = 3;
  int len_cap = 120;

  EncoderConfig encoder() const {
    return {word_dim, lemma_dim, char_dim, char_hidden, hidden, layers};
  }
  ScorerConfig scorer() const { return {edge_mlp, label_mlp, second_mlp}; }
};

/// A trained (or freshly initialized) parser: configuration, frozen vocab
/// and label inventory, and every parameter tensor. Second-order parameters
/// are always allocated so one checkpoint can decode under either order.
struct Model {
  ModelConfig cfg;
  Vocab vocab;
  LabelInventory inventory;
  num::Params params;
  Order trained_order = Order::O1;
  uint64_t seed = 1;

  static Model init(ModelConfig cfg, Vocab vocab, LabelInventory inventory, uint64_t seed);

  /// Checkpoint: the named-tensor container with model meta (config, vocab,
  /// inventory) in its header.
  void save(const std::string& path) const;
  static Model load(const std::string& path);

  /// Optional pre-trained word vectors, one token per line, token followed
  /// by whitespace-separated floats. Rows of matching width overwrite the
  /// embedding rows of in-vocab tokens; returns how many rows were loaded.
  int load_word_vectors(const std::string& path);
};

}  // namespace srl
