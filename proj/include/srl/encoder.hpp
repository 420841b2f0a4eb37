#pragma once

#include "srl/core.hpp"
#include "srl/params.hpp"
#include "srl/tape.hpp"

#include <random>
#include <string>
#include <unordered_map>
#include <vector>

namespace srl {

struct EncoderConfig {
  int word_dim = 100;
  int lemma_dim = 50;
  int char_dim = 50;
  int char_hidden = 50;  // per direction; the char vector is 2x this
  int hidden = 200;      // per direction; h_i is 2x this
  int layers = 3;
  int input_dim() const { return word_dim + lemma_dim + 2 * char_hidden; }
};

/// Frozen token tables. Index 0 is padding, 1 the unknown token, in every
/// table. Entries are sorted so the same corpus always yields the same ids.
class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;

  static Vocab build(const std::vector<SrlStructure>& corpus, int min_freq);

  int word_id(const std::string& w) const { return find(word_idx_, w); }
  int lemma_id(const std::string& l) const { return find(lemma_idx_, l); }
  int char_id(char c) const { return find(char_idx_, std::string(1, c)); }

  int word_count() const { return static_cast<int>(words_.size()); }
  int lemma_count() const { return static_cast<int>(lemmas_.size()); }
  int char_count() const { return static_cast<int>(chars_.size()); }

  bool word_singleton(int id) const;
  bool lemma_singleton(int id) const;

  const std::vector<std::string>& words() const { return words_; }
  const std::vector<std::string>& lemmas() const { return lemmas_; }
  const std::vector<std::string>& chars() const { return chars_; }

  /// Rebuild from serialized tables (loading a model).
  static Vocab from_tables(std::vector<std::string> words, std::vector<std::string> lemmas,
                           std::vector<std::string> chars, std::vector<int> word_singletons,
                           std::vector<int> lemma_singletons);

  std::vector<int> word_singleton_ids() const;
  std::vector<int> lemma_singleton_ids() const;

 private:
  static int find(const std::unordered_map<std::string, int>& m, const std::string& k) {
    auto it = m.find(k);
    return it == m.end() ? kUnk : it->second;
  }
  void index();

  std::vector<std::string> words_{"<pad>", "<unk>"};
  std::vector<std::string> lemmas_{"<pad>", "<unk>"};
  std::vector<std::string> chars_{"<pad>", "<unk>"};
  std::unordered_map<std::string, int> word_idx_, lemma_idx_, char_idx_;
  std::vector<char> word_single_, lemma_single_;
};

struct TokenIds {
  int word = Vocab::kUnk;
  int lemma = Vocab::kUnk;
  std::vector<num::Index> chars;
};

std::vector<TokenIds> token_ids(const Vocab& v, const Sentence& s);

/// Training-time stochastic replacement of singleton words/lemmas with the
/// unknown id, one draw per table entry.
void apply_unk_noise(std::vector<TokenIds>& ids, const Vocab& v, double rate,
                     std::mt19937_64& rng);

/// Registers all encoder parameters (embedding tables, char and sentence
/// recurrent weights, the learned Root token) on a parameter store.
void add_encoder_params(num::Params& p, const EncoderConfig& cfg, const Vocab& v,
                        std::mt19937_64& rng);

/// One recurrent cell step; returns the new hidden state and writes the new
/// cell state through c_inout.
num::Val lstm_step(num::Val w, num::Val u, num::Val b, num::Val x, num::Val h_prev,
                   num::Val* c_inout);

struct BiLstmStates {
  std::vector<num::Val> fwd;  // per position
  std::vector<num::Val> bwd;
};

/// One bidirectional layer over a sequence of column vectors.
BiLstmStates bilstm_layer(num::Tape& t, num::Val wf, num::Val uf, num::Val bf, num::Val wb,
                          num::Val ub, num::Val bb, const std::vector<num::Val>& xs);

/// Token vector: word embedding + lemma embedding + char encoder output,
/// concatenated. The char vector is the concatenation of the final forward
/// and final backward char states.
num::Val embed_token(num::Tape& t, const num::Params& p, const EncoderConfig& cfg,
                     const TokenIds& tok);

/// Context encoding h_0..h_n; position 0 is the learned Root token
/// prepended before the stacked bidirectional layers. Each output is the
/// concatenation of the top-layer forward and backward states.
std::vector<num::Val> encode(num::Tape& t, const num::Params& p, const EncoderConfig& cfg,
                             const std::vector<TokenIds>& tokens,
                             double dropout = 0.0, std::mt19937_64* rng = nullptr);

}  // namespace srl
