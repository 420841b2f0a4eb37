#include "srl/core.hpp"

#include <algorithm>
#include <stdexcept>

namespace srl {

std::string CompositeLabel::str() const {
  switch (kind) {
    case LabelKind::Prd: return "PRD";
    case LabelKind::Begin: return "B-" + text;
    case LabelKind::End: return "E-" + text;
    case LabelKind::Sense: return text;
    case LabelKind::Role: return text;
    case LabelKind::Outside: return "O";
    case LabelKind::Inside: return "I";
  }
  return {};
}

SrlStructure SrlStructure::normalized() const {
  SrlStructure out = *this;
  for (PredicateFrame& f : out.frames)
    std::sort(f.arguments.begin(), f.arguments.end());
  std::sort(out.frames.begin(), out.frames.end(),
            [](const PredicateFrame& a, const PredicateFrame& b) { return a.predicate < b.predicate; });
  return out;
}

SemGraph::SemGraph(int n) : n_(n) {
  if (n < 1) throw std::invalid_argument("graph: word count must be >= 1");
}

void SemGraph::add_edge(int head, int mod, CompositeLabel label) {
  if (mod < 1 || mod > n_) throw std::invalid_argument("graph: modifier out of range");
  if (head < 0 || head > n_) throw std::invalid_argument("graph: head out of range");
  if (head == mod) throw std::invalid_argument("graph: self loop");
  if (label.kind == LabelKind::Outside || label.kind == LabelKind::Inside)
    throw std::invalid_argument("graph: O/I are sequence labels, not edge labels");
  const bool root_label = label.kind == LabelKind::Prd || label.kind == LabelKind::Sense;
  if ((head == 0) != root_label)
    throw std::invalid_argument("graph: label kind does not match head type");
  GraphEdge e{head, mod, std::move(label)};
  auto it = std::lower_bound(edges_.begin(), edges_.end(), e, [](const GraphEdge& a, const GraphEdge& b) {
    return a.head != b.head ? a.head < b.head : a.mod < b.mod;
  });
  if (it != edges_.end() && it->head == e.head && it->mod == e.mod)
    throw std::invalid_argument("graph: duplicate edge");
  edges_.insert(it, std::move(e));
}

const CompositeLabel* SemGraph::label_of(int head, int mod) const {
  for (const GraphEdge& e : edges_)
    if (e.head == head && e.mod == mod) return &e.label;
  return nullptr;
}

std::vector<int> SemGraph::root_children() const {
  std::vector<int> out;
  for (const GraphEdge& e : edges_)
    if (e.head == 0) out.push_back(e.mod);
  return out;
}

std::vector<GraphEdge> SemGraph::outgoing(int head) const {
  std::vector<GraphEdge> out;
  for (const GraphEdge& e : edges_)
    if (e.head == head) out.push_back(e);
  return out;
}

ValidationReport validate_srl(const SrlStructure& s) {
  ValidationReport rep;
  const int n = s.sentence.size();
  if (n < 1) rep.violations.push_back({"empty-sentence", "sentence has no words"});
  for (int i = 0; i < n; ++i)
    if (s.sentence.tokens[static_cast<size_t>(i)].form.empty())
      rep.violations.push_back({"empty-form", "token " + std::to_string(i + 1)});

  std::set<int> seen;
  for (const PredicateFrame& f : s.frames) {
    const std::string at = "predicate " + std::to_string(f.predicate);
    if (f.predicate < 1 || f.predicate > n)
      rep.violations.push_back({"predicate-out-of-bounds", at});
    if (!seen.insert(f.predicate).second)
      rep.violations.push_back({"duplicate-predicate", at});
    for (const Argument& a : f.arguments) {
      if (a.span.begin < 1 || a.span.begin > a.span.end || a.span.end > n)
        rep.violations.push_back({"span-out-of-bounds",
                                  at + ", span " + std::to_string(a.span.begin) + ".." +
                                      std::to_string(a.span.end)});
      if (a.role.empty()) rep.violations.push_back({"empty-role", at});
      // A boundary on the predicate word would need a self edge, which the
      // graph encoding cannot carry.
      if (a.span.begin == f.predicate || a.span.end == f.predicate)
        rep.violations.push_back({"argument-boundary-at-predicate",
                                  at + ", span " + std::to_string(a.span.begin) + ".." +
                                      std::to_string(a.span.end)});
    }
    std::vector<Span> spans;
    for (const Argument& a : f.arguments) spans.push_back(a.span);
    std::sort(spans.begin(), spans.end());
    for (size_t i = 1; i < spans.size(); ++i)
      if (spans[i - 1].end >= spans[i].begin)
        rep.violations.push_back({"overlapping-arguments",
                               at + ", spans " + std::to_string(spans[i - 1].begin) + ".." +
                                      std::to_string(spans[i - 1].end) + " and " +
                                      std::to_string(spans[i].begin) + ".." +
                                      std::to_string(spans[i].end)});
  }
  return rep;
}

LabelInventory LabelInventory::span(const std::set<std::string>& roles) {
  if (roles.empty()) throw std::invalid_argument("label inventory: empty role set");
  LabelInventory inv;
  inv.mode_ = Mode::Span;
  inv.labels_.push_back(CompositeLabel::prd());
  inv.root_allowed_.push_back(1);
  for (const std::string& r : roles) {  // std::set iterates lexicographically
    inv.labels_.push_back(CompositeLabel::begin(r));
    inv.root_allowed_.push_back(0);
    inv.labels_.push_back(CompositeLabel::end(r));
    inv.root_allowed_.push_back(0);
    inv.roles_.push_back(r);
  }
  return inv;
}

LabelInventory LabelInventory::dependency(const std::set<std::string>& senses,
                                          const std::set<std::string>& roles) {
  if (roles.empty()) throw std::invalid_argument("label inventory: empty role set");
  if (senses.empty()) throw std::invalid_argument("label inventory: empty sense set");
  LabelInventory inv;
  inv.mode_ = Mode::Dependency;
  for (const std::string& s : senses) {
    inv.labels_.push_back(CompositeLabel::sense(s));
    inv.root_allowed_.push_back(1);
    inv.senses_.push_back(s);
  }
  for (const std::string& r : roles) {
    inv.labels_.push_back(CompositeLabel::role(r));
    inv.root_allowed_.push_back(0);
    inv.roles_.push_back(r);
  }
  return inv;
}

int LabelInventory::index_of(const CompositeLabel& l) const {
  for (int i = 0; i < size(); ++i)
    if (labels_[static_cast<size_t>(i)] == l) return i;
  return -1;
}

std::vector<std::string> LabelInventory::viterbi_alphabet() const {
  std::vector<std::string> out;
  for (const std::string& r : roles_) {
    out.push_back("B-" + r);
    out.push_back("E-" + r);
  }
  out.push_back("O");
  out.push_back("I");
  return out;
}

LabelInventory build_label_inventory(const std::set<std::string>& roles) {
  return LabelInventory::span(roles);
}

}  // namespace srl
