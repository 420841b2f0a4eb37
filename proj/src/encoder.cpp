#include "srl/encoder.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace srl {

using num::Index;
using num::Params;
using num::Tape;
using num::Tensor;
using num::Val;

Vocab Vocab::build(const std::vector<SrlStructure>& corpus, int min_freq) {
  std::map<std::string, int> wf, lf;
  std::set<std::string> cs;
  for (const SrlStructure& s : corpus) {
    for (const Token& t : s.sentence.tokens) {
      ++wf[t.form];
      ++lf[t.lemma.empty() ? t.form : t.lemma];
      for (char c : t.form) cs.insert(std::string(1, c));
    }
  }
  Vocab v;
  v.word_single_ = {0, 0};
  v.lemma_single_ = {0, 0};
  for (const auto& [w, f] : wf) {  // std::map iterates sorted
    if (f >= min_freq) {
      v.words_.push_back(w);
      v.word_single_.push_back(f == 1 ? 1 : 0);
    }
  }
  for (const auto& [l, f] : lf) {
    if (f >= min_freq) {
      v.lemmas_.push_back(l);
      v.lemma_single_.push_back(f == 1 ? 1 : 0);
    }
  }
  for (const std::string& c : cs) v.chars_.push_back(c);
  v.index();
  return v;
}

Vocab Vocab::from_tables(std::vector<std::string> words, std::vector<std::string> lemmas,
                         std::vector<std::string> chars, std::vector<int> word_singletons,
                         std::vector<int> lemma_singletons) {
  Vocab v;
  v.words_ = std::move(words);
  v.lemmas_ = std::move(lemmas);
  v.chars_ = std::move(chars);
  v.word_single_.assign(v.words_.size(), 0);
  v.lemma_single_.assign(v.lemmas_.size(), 0);
  for (int id : word_singletons) v.word_single_.at(static_cast<size_t>(id)) = 1;
  for (int id : lemma_singletons) v.lemma_single_.at(static_cast<size_t>(id)) = 1;
  v.index();
  return v;
}

void Vocab::index() {
  word_idx_.clear();
  lemma_idx_.clear();
  char_idx_.clear();
  for (size_t i = 0; i < words_.size(); ++i) word_idx_[words_[i]] = static_cast<int>(i);
  for (size_t i = 0; i < lemmas_.size(); ++i) lemma_idx_[lemmas_[i]] = static_cast<int>(i);
  for (size_t i = 0; i < chars_.size(); ++i) char_idx_[chars_[i]] = static_cast<int>(i);
}

bool Vocab::word_singleton(int id) const {
  return id >= 0 && id < static_cast<int>(word_single_.size()) && word_single_[static_cast<size_t>(id)];
}

bool Vocab::lemma_singleton(int id) const {
  return id >= 0 && id < static_cast<int>(lemma_single_.size()) && lemma_single_[static_cast<size_t>(id)];
}

std::vector<int> Vocab::word_singleton_ids() const {
  std::vector<int> out;
  for (size_t i = 0; i < word_single_.size(); ++i)
    if (word_single_[i]) out.push_back(static_cast<int>(i));
  return out;
}

std::vector<int> Vocab::lemma_singleton_ids() const {
  std::vector<int> out;
  for (size_t i = 0; i < lemma_single_.size(); ++i)
    if (lemma_single_[i]) out.push_back(static_cast<int>(i));
  return out;
}

std::vector<TokenIds> token_ids(const Vocab& v, const Sentence& s) {
  std::vector<TokenIds> out;
  out.reserve(s.tokens.size());
  for (const Token& t : s.tokens) {
    TokenIds ids;
    ids.word = v.word_id(t.form);
    ids.lemma = v.lemma_id(t.lemma.empty() ? t.form : t.lemma);
    for (char c : t.form) ids.chars.push_back(v.char_id(c));
    if (ids.chars.empty()) ids.chars.push_back(Vocab::kUnk);
    out.push_back(std::move(ids));
  }
  return out;
}

void apply_unk_noise(std::vector<TokenIds>& ids, const Vocab& v, double rate,
                     std::mt19937_64& rng) {
  if (rate <= 0.0) return;
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (TokenIds& t : ids) {
    if (v.word_singleton(t.word) && coin(rng) < rate) t.word = Vocab::kUnk;
    if (v.lemma_singleton(t.lemma) && coin(rng) < rate) t.lemma = Vocab::kUnk;
  }
}

void add_encoder_params(Params& p, const EncoderConfig& cfg, const Vocab& v,
                        std::mt19937_64& rng) {
  using num::orthogonal_blocks;
  using num::xavier_uniform;
  p.add("emb.word", xavier_uniform({v.word_count(), cfg.word_dim}, rng));
  p.add("emb.lemma", xavier_uniform({v.lemma_count(), cfg.lemma_dim}, rng));
  p.add("emb.char", xavier_uniform({v.char_count(), cfg.char_dim}, rng));
  p.add("enc.root", xavier_uniform({cfg.input_dim(), 1}, rng));
  for (const char* dir : {"f", "b"}) {
    const std::string base = std::string("char.") + dir;
    p.add(base + ".W", xavier_uniform({4 * cfg.char_hidden, cfg.char_dim}, rng));
    p.add(base + ".U", orthogonal_blocks(4 * cfg.char_hidden, cfg.char_hidden, rng));
    p.add(base + ".b", Tensor({4 * cfg.char_hidden, 1}));
  }
  for (int l = 0; l < cfg.layers; ++l) {
    const int in_dim = l == 0 ? cfg.input_dim() : 2 * cfg.hidden;
    for (const char* dir : {"f", "b"}) {
      const std::string base = "enc.l" + std::to_string(l) + "." + dir;
      p.add(base + ".W", xavier_uniform({4 * cfg.hidden, in_dim}, rng));
      p.add(base + ".U", orthogonal_blocks(4 * cfg.hidden, cfg.hidden, rng));
      p.add(base + ".b", Tensor({4 * cfg.hidden, 1}));
    }
  }
}

Val lstm_step(Val w, Val u, Val b, Val x, Val h_prev, Val* c_inout) {
  Tape& t = *w.tape;
  const Index hs = t.value(b).rows() / 4;
  Val gates = add(add(matmul(w, x), matmul(u, h_prev)), b);
  Val gi = sigmoid(slice_rows(gates, 0, hs));
  Val gf = sigmoid(slice_rows(gates, hs, hs));
  Val go = sigmoid(slice_rows(gates, 2 * hs, hs));
  Val gc = tanh_v(slice_rows(gates, 3 * hs, hs));
  Val c = add(cmul(gf, *c_inout), cmul(gi, gc));
  *c_inout = c;
  return cmul(go, tanh_v(c));
}

BiLstmStates bilstm_layer(Tape& t, Val wf, Val uf, Val bf, Val wb, Val ub, Val bb,
                          const std::vector<Val>& xs) {
  const Index hs = t.value(bf).rows() / 4;
  BiLstmStates out;
  out.fwd.resize(xs.size());
  out.bwd.resize(xs.size());
  Val h = t.constant(Tensor({hs, 1}));
  Val c = h;
  for (size_t i = 0; i < xs.size(); ++i) {
    h = lstm_step(wf, uf, bf, xs[i], h, &c);
    out.fwd[i] = h;
  }
  h = t.constant(Tensor({hs, 1}));
  c = h;
  for (size_t i = xs.size(); i-- > 0;) {
    h = lstm_step(wb, ub, bb, xs[i], h, &c);
    out.bwd[i] = h;
  }
  return out;
}

namespace {

Val char_encode(Tape& t, const Params& p, const EncoderConfig& cfg,
                const std::vector<Index>& chars) {
  Val table = t.param(p.at("emb.char"));
  Val embs = transpose(select_rows(table, chars));  // (char_dim, len)
  const Index hs = cfg.char_hidden;
  Val hf = t.constant(Tensor({hs, 1}));
  Val cf = hf;
  Val wf = t.param(p.at("char.f.W")), uf = t.param(p.at("char.f.U")), bf = t.param(p.at("char.f.b"));
  for (Index i = 0; i < static_cast<Index>(chars.size()); ++i)
    hf = lstm_step(wf, uf, bf, slice_cols(embs, i, 1), hf, &cf);
  Val hb = t.constant(Tensor({hs, 1}));
  Val cb = hb;
  Val wb = t.param(p.at("char.b.W")), ub = t.param(p.at("char.b.U")), bb = t.param(p.at("char.b.b"));
  for (Index i = static_cast<Index>(chars.size()); i-- > 0;)
    hb = lstm_step(wb, ub, bb, slice_cols(embs, i, 1), hb, &cb);
  return num::concat_rows({hf, hb});
}

Val dropout_mask(Tape& t, Val x, double rate, std::mt19937_64* rng) {
  if (rate <= 0.0 || rng == nullptr) return x;
  const Tensor& v = t.value(x);
  Tensor mask(v.shape());
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  const double scale = 1.0 / (1.0 - rate);
  for (Index i = 0; i < mask.size(); ++i) mask.array()(i) = coin(*rng) < rate ? 0.0 : scale;
  return cmul(x, t.constant(std::move(mask)));
}

}  // namespace

Val embed_token(Tape& t, const Params& p, const EncoderConfig& cfg, const TokenIds& tok) {
  Val we = transpose(select_rows(t.param(p.at("emb.word")), {tok.word}));
  Val le = transpose(select_rows(t.param(p.at("emb.lemma")), {tok.lemma}));
  Val ce = char_encode(t, p, cfg, tok.chars);
  return num::concat_rows({we, le, ce});
}

std::vector<Val> encode(Tape& t, const Params& p, const EncoderConfig& cfg,
                        const std::vector<TokenIds>& tokens, double dropout,
                        std::mt19937_64* rng) {
  if (tokens.empty()) throw std::invalid_argument("encode: empty sentence");
  std::vector<Val> xs;
  xs.reserve(tokens.size() + 1);
  xs.push_back(t.param(p.at("enc.root")));
  for (const TokenIds& tok : tokens) xs.push_back(embed_token(t, p, cfg, tok));
  if (dropout > 0.0)
    for (Val& x : xs) x = dropout_mask(t, x, dropout, rng);

  for (int l = 0; l < cfg.layers; ++l) {
    const std::string base = "enc.l" + std::to_string(l) + ".";
    BiLstmStates st = bilstm_layer(
        t, t.param(p.at(base + "f.W")), t.param(p.at(base + "f.U")), t.param(p.at(base + "f.b")),
        t.param(p.at(base + "b.W")), t.param(p.at(base + "b.U")), t.param(p.at(base + "b.b")), xs);
    for (size_t i = 0; i < xs.size(); ++i) {
      xs[i] = num::concat_rows({st.fwd[i], st.bwd[i]});
      if (dropout > 0.0 && l + 1 < cfg.layers) xs[i] = dropout_mask(t, xs[i], dropout, rng);
    }
  }
  return xs;
}

}  // namespace srl
