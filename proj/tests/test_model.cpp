#include "srl/model.hpp"

#include "srl/inference.hpp"
#include "srl/serialize.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <random>

using namespace srl;
using num::Index;
using num::Tape;
using num::Tensor;
using num::Val;

namespace {

struct TempPath {
  std::string path;
  explicit TempPath(const std::string& name) : path("/tmp/srl_model_" + name) {}
  ~TempPath() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("tensor container round trips bit-exactly") {
  TempPath f("container.bin");
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  Tensor a({3, 4}), b({2, 2, 5}), c({7, 1});
  for (Tensor* t : {&a, &b, &c})
    for (Index i = 0; i < t->size(); ++i) t->array()(i) = g(rng);
  const std::string meta = "{\"answer\":42}";
  num::write_tensor_container(f.path, meta, {{"alpha", a}, {"beta", b}, {"gamma", c}});
  const num::TensorContainer back = num::read_tensor_container(f.path);
  CHECK(back.meta == meta);
  REQUIRE(back.tensors.size() == 3);
  CHECK(back.tensors[0].first == "alpha");
  CHECK(back.tensors[1].second.shape() == b.shape());
  for (size_t i = 0; i < 3; ++i) {
    const Tensor& orig = i == 0 ? a : (i == 1 ? b : c);
    const Tensor& got = back.tensors[i].second;
    CHECK(std::memcmp(got.array().data(), orig.array().data(),
                      sizeof(double) * static_cast<size_t>(orig.size())) == 0);
  }
}

TEST_CASE("container rejects foreign files") {
  TempPath f("garbage.bin");
  std::ofstream(f.path) << "not a container";
  CHECK_THROWS_AS(num::read_tensor_container(f.path), std::runtime_error);
}

TEST_CASE("a saved model reloads with identical parameters and decisions") {
  std::vector<SrlStructure> corpus{test::example_structure()};
  Model m = test::tiny_model(corpus, Mode::Span, 21);
  m.trained_order = Order::O2;
  TempPath f("roundtrip.bin");
  m.save(f.path);
  const Model back = Model::load(f.path);

  CHECK(back.cfg.hidden == m.cfg.hidden);
  CHECK(back.trained_order == Order::O2);
  CHECK(back.vocab.word_count() == m.vocab.word_count());
  CHECK(back.inventory.size() == m.inventory.size());
  REQUIRE(back.params.size() == m.params.size());
  for (size_t i = 0; i < m.params.size(); ++i) {
    CHECK(back.params.names()[i] == m.params.names()[i]);
    const Tensor& ta = m.params.tensor(i);
    const Tensor& tb = back.params.tensor(i);
    REQUIRE(ta.shape() == tb.shape());
    CHECK(std::memcmp(ta.array().data(), tb.array().data(),
                      sizeof(double) * static_cast<size_t>(ta.size())) == 0);
  }
  for (Order o : {Order::O1, Order::O2}) {
    const SrlStructure a = decode_sentence(m, corpus[0].sentence, o);
    const SrlStructure b = decode_sentence(back, corpus[0].sentence, o);
    CHECK(a == b);
  }
}

TEST_CASE("pre-trained word vectors overwrite matching rows") {
  std::vector<SrlStructure> corpus{test::example_structure()};
  TrainConfig cfg = test::tiny_config();
  Model m = test::tiny_model(corpus, Mode::Span, 3, cfg);
  TempPath f("vectors.txt");
  {
    std::ofstream os(f.path);
    os << "want";
    for (int d = 0; d < cfg.word_dim; ++d) os << " " << 0.25 * (d + 1);
    os << "\n";
    os << "notinvocab 1 2 3 4 5 6\n";
    os << "more 1 2\n";  // wrong width: skipped
  }
  CHECK(m.load_word_vectors(f.path) == 1);
  const Tensor& table = m.params.at("emb.word");
  const int id = m.vocab.word_id("want");
  for (int d = 0; d < cfg.word_dim; ++d)
    CHECK(table.at(id, d) == doctest::Approx(0.25 * (d + 1)));
}

TEST_CASE("posterior record keeps every iterate, starting at the sigmoid") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  const Index n1 = 4;
  Tensor s({n1, n1}), sib({n1, n1, n1}), cop({n1, n1, n1}), grd({n1, n1, n1});
  for (Tensor* t : {&s, &sib, &cop, &grd})
    for (Index i = 0; i < t->size(); ++i) t->array()(i) = 0.3 * g(rng);
  Tape t;
  SecondOrderScores so{t.constant(sib), t.constant(cop), t.constant(grd)};
  const PosteriorQ q = mfvi_posteriors(t, t.constant(s), so, 3);
  REQUIRE(q.iterates.size() == 4);
  for (Index i = 0; i < n1; ++i)
    for (Index j = 1; j < n1; ++j) {
      if (i == j) continue;
      const double p0 = 1.0 / (1.0 + std::exp(-s.at(i, j)));
      CHECK(q.iterates[0].at(i, j) == doctest::Approx(p0).epsilon(1e-15));
      for (const Tensor& it : q.iterates) {
        CHECK(it.at(i, j) > 0.0);
        CHECK(it.at(i, j) < 1.0);
      }
    }
  CHECK((q.final().array() == q.iterates[3].array()).all());
}

TEST_CASE("dependency decode carries senses through") {
  const LabelInventory inv = LabelInventory::dependency({"01", "02"}, {"A0", "A1"});
  const Sentence sent = test::sentence_of({"They", "want", "to"});
  const Index n1 = 4, L = inv.size();
  Tensor q({n1, n1});
  Tensor lp({n1, n1, L});
  q.at(0, 2) = 0.9;
  q.at(2, 1) = 0.8;
  lp.at3(0, 2, inv.index_of(CompositeLabel::sense("02"))) = 0.7;
  lp.at3(0, 2, inv.index_of(CompositeLabel::sense("01"))) = 0.3;
  lp.at3(2, 1, inv.index_of(CompositeLabel::role("A0"))) = 1.0;
  const SrlStructure out = decode_from_scores(q, lp, sent, inv, Mode::Dependency);
  REQUIRE(out.frames.size() == 1);
  CHECK(out.frames[0].predicate == 2);
  CHECK(out.frames[0].sense == "02");
  REQUIRE(out.frames[0].arguments.size() == 1);
  CHECK(out.frames[0].arguments[0] == Argument{{1, 1}, "A0"});
}
