#pragma once

#include "srl/core.hpp"
#include "srl/model.hpp"
#include "srl/training.hpp"

#include <set>
#include <string>
#include <vector>

namespace srl::test {

// The worked example used throughout: "They want to do more ." with
// predicates want@2 (A0 = They, A1 = to..more) and do@4 (A0 = They,
// A1 = more).
inline SrlStructure example_structure() {
  SrlStructure s;
  for (const char* w : {"They", "want", "to", "do", "more", "."})
    s.sentence.tokens.push_back({w, w});
  s.sentence.tokens[0].lemma = "they";
  s.sentence.tokens[1].lemma = "want";
  s.sentence.tokens[3].lemma = "do";
  PredicateFrame want;
  want.predicate = 2;
  want.arguments = {{{1, 1}, "A0"}, {{3, 5}, "A1"}};
  PredicateFrame doo;
  doo.predicate = 4;
  doo.arguments = {{{1, 1}, "A0"}, {{5, 5}, "A1"}};
  s.frames = {want, doo};
  return s;
}

inline Sentence sentence_of(const std::vector<std::string>& words) {
  Sentence s;
  for (const std::string& w : words) s.tokens.push_back({w, w});
  return s;
}

// Small dimensions so gradient checks and overfit runs stay quick.
inline TrainConfig tiny_config() {
  TrainConfig c;
  c.word_dim = 6;
  c.lemma_dim = 4;
  c.char_dim = 4;
  c.char_hidden = 3;
  c.hidden = 5;
  c.layers = 2;
  c.edge_mlp = 7;
  c.label_mlp = 6;
  c.second_mlp = 4;
  c.unk_rate = 0.0;
  c.workers = 1;
  return c;
}

inline Model tiny_model(const std::vector<SrlStructure>& corpus, Mode mode, uint64_t seed,
                        const TrainConfig& base = tiny_config()) {
  Vocab vocab = Vocab::build(corpus, 1);
  std::set<std::string> roles, senses;
  for (const SrlStructure& s : corpus)
    for (const PredicateFrame& f : s.frames) {
      if (mode == Mode::Dependency) senses.insert(f.sense);
      for (const Argument& a : f.arguments) roles.insert(a.role);
    }
  LabelInventory inv = mode == Mode::Span ? LabelInventory::span(roles)
                                          : LabelInventory::dependency(senses, roles);
  TrainConfig cfg = base;
  cfg.mode = mode;
  Model m = Model::init(cfg.model_config(), std::move(vocab), std::move(inv), seed);
  return m;
}

}  // namespace srl::test
