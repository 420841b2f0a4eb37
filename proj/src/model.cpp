#include "srl/model.hpp"

#include "srl/serialize.hpp"

#include <json.hpp>

#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace srl {

using nlohmann::json;

std::string to_string(Order o) { return o == Order::O1 ? "O1" : "O2"; }

Order order_from_string(const std::string& s) {
  if (s == "O1" || s == "o1" || s == "1") return Order::O1;
  if (s == "O2" || s == "o2" || s == "2") return Order::O2;
  throw std::invalid_argument("unknown order: " + s);
}

std::string to_string(Mode m) { return m == Mode::Span ? "span" : "dependency"; }

Mode mode_from_string(const std::string& s) {
  if (s == "span") return Mode::Span;
  if (s == "dependency" || s == "dep") return Mode::Dependency;
  throw std::invalid_argument("unknown mode: " + s);
}

namespace {

json config_to_json(const ModelConfig& c) {
  return json{{"mode", to_string(c.mode)},
              {"word_dim", c.word_dim},
              {"lemma_dim", c.lemma_dim},
              {"char_dim", c.char_dim},
              {"char_hidden", c.char_hidden},
              {"hidden", c.hidden},
              {"layers", c.layers},
              {"edge_mlp", c.edge_mlp},
              {"label_mlp", c.label_mlp},
              {"second_mlp", c.second_mlp},
              {"mfvi_iters", c.mfvi_iters},
              {"len_cap", c.len_cap}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.mode = mode_from_string(j.at("mode").get<std::string>());
  c.word_dim = j.at("word_dim");
  c.lemma_dim = j.at("lemma_dim");
  c.char_dim = j.at("char_dim");
  c.char_hidden = j.at("char_hidden");
  c.hidden = j.at("hidden");
  c.layers = j.at("layers");
  c.edge_mlp = j.at("edge_mlp");
  c.label_mlp = j.at("label_mlp");
  c.second_mlp = j.at("second_mlp");
  c.mfvi_iters = j.at("mfvi_iters");
  c.len_cap = j.at("len_cap");
  return c;
}

}  // namespace

Model Model::init(ModelConfig cfg, Vocab vocab, LabelInventory inventory, uint64_t seed) {
  Model m;
  m.cfg = cfg;
  m.vocab = std::move(vocab);
  m.inventory = std::move(inventory);
  m.seed = seed;
  std::mt19937_64 rng(seed);
  add_encoder_params(m.params, cfg.encoder(), m.vocab, rng);
  add_scorer_params(m.params, cfg.scorer(), 2 * cfg.hidden, m.inventory.size(), rng);
  return m;
}

void Model::save(const std::string& path) const {
  json meta;
  meta["format"] = "srl-graph-parser";
  meta["config"] = config_to_json(cfg);
  meta["order"] = to_string(trained_order);
  meta["seed"] = seed;
  meta["vocab"] = json{{"words", vocab.words()},
                       {"lemmas", vocab.lemmas()},
                       {"chars", vocab.chars()},
                       {"word_singletons", vocab.word_singleton_ids()},
                       {"lemma_singletons", vocab.lemma_singleton_ids()}};
  std::set<std::string> roles(inventory.roles().begin(), inventory.roles().end());
  std::set<std::string> senses(inventory.senses().begin(), inventory.senses().end());
  meta["roles"] = roles;
  meta["senses"] = senses;
  num::write_tensor_container(path, meta.dump(), params.items());
}

Model Model::load(const std::string& path) {
  num::TensorContainer c = num::read_tensor_container(path);
  json meta = json::parse(c.meta);
  Model m;
  m.cfg = config_from_json(meta.at("config"));
  m.trained_order = order_from_string(meta.at("order").get<std::string>());
  m.seed = meta.at("seed");
  const json& v = meta.at("vocab");
  m.vocab = Vocab::from_tables(v.at("words"), v.at("lemmas"), v.at("chars"),
                               v.at("word_singletons"), v.at("lemma_singletons"));
  std::set<std::string> roles = meta.at("roles");
  std::set<std::string> senses = meta.at("senses");
  m.inventory = m.cfg.mode == Mode::Span ? LabelInventory::span(roles)
                                         : LabelInventory::dependency(senses, roles);
  for (auto& [name, t] : c.tensors) m.params.add(name, std::move(t));
  return m;
}

int Model::load_word_vectors(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("word vectors: cannot open " + path);
  num::Tensor& table = params.at("emb.word");
  int loaded = 0;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string tok;
    ss >> tok;
    const int id = vocab.word_id(tok);
    if (id == Vocab::kUnk && tok != "<unk>") continue;
    std::vector<double> vals;
    double x;
    while (ss >> x) vals.push_back(x);
    if (static_cast<num::Index>(vals.size()) != table.cols()) continue;
    for (num::Index d = 0; d < table.cols(); ++d) table.at(id, d) = vals[static_cast<size_t>(d)];
    ++loaded;
  }
  return loaded;
}

}  // namespace srl
