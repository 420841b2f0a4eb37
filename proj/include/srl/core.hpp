#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace srl {

enum class Mode : uint8_t { Span, Dependency };

struct Token {
  std::string form;
  std::string lemma;
  bool operator==(const Token&) const = default;
};

/// A sentence of n words. Word indices are 1-based throughout; the pseudo
/// Root occupies index 0 in graph-facing code and is not stored here.
struct Sentence {
  std::vector<Token> tokens;
  int size() const { return static_cast<int>(tokens.size()); }
  bool operator==(const Sentence&) const = default;
};

/// Inclusive word span, 1 <= begin <= end <= n.
struct Span {
  int begin = 0;
  int end = 0;
  int width() const { return end - begin + 1; }
  bool operator==(const Span&) const = default;
  auto operator<=>(const Span&) const = default;
};

struct Argument {
  Span span;
  std::string role;
  bool operator==(const Argument&) const = default;
  auto operator<=>(const Argument&) const = default;
};

struct PredicateFrame {
  int predicate = 0;          // word index of the single predicate word
  std::string sense;          // dependency mode only; empty in span mode
  std::vector<Argument> arguments;
  bool operator==(const PredicateFrame&) const = default;
};

struct SrlStructure {
  Sentence sentence;
  std::vector<PredicateFrame> frames;
  /// Frames sorted by predicate, arguments by (begin, end, role).
  SrlStructure normalized() const;
  bool operator==(const SrlStructure&) const = default;
};

// ---- composite labels ------------------------------------------------------

/// Graph edge labels plus the two extra sequence-only labels used by the
/// repair decoder. Outside/Inside never appear on graph edges.
enum class LabelKind : uint8_t {
  Prd,      // Root -> predicate marker (span mode)
  Begin,    // B-r: first word of an argument
  End,      // E-r: last word of a multi-word argument
  Sense,    // Root -> predicate sense (dependency mode)
  Role,     // plain role on a single-word argument (dependency mode)
  Outside,  // O: sequence label only
  Inside,   // I: sequence label only
};

struct CompositeLabel {
  LabelKind kind = LabelKind::Outside;
  std::string text;  // role for Begin/End/Role, sense string for Sense

  static CompositeLabel prd() { return {LabelKind::Prd, {}}; }
  static CompositeLabel begin(std::string role) { return {LabelKind::Begin, std::move(role)}; }
  static CompositeLabel end(std::string role) { return {LabelKind::End, std::move(role)}; }
  static CompositeLabel sense(std::string s) { return {LabelKind::Sense, std::move(s)}; }
  static CompositeLabel role(std::string r) { return {LabelKind::Role, std::move(r)}; }
  static CompositeLabel outside() { return {LabelKind::Outside, {}}; }
  static CompositeLabel inside() { return {LabelKind::Inside, {}}; }

  std::string str() const;
  bool operator==(const CompositeLabel&) const = default;
};

// ---- word-level semantic graph ---------------------------------------------

struct GraphEdge {
  int head = 0;  // 0..n, 0 is Root
  int mod = 0;   // 1..n
  CompositeLabel label;
  bool operator==(const GraphEdge&) const = default;
};

/// Labeled directed graph over Root (0) and the n words. At most one edge
/// per (head, modifier) pair, no self loops, Root never a modifier. Root
/// edges carry Prd/Sense labels, non-Root edges Begin/End/Role.
class SemGraph {
 public:
  explicit SemGraph(int n);

  int word_count() const { return n_; }
  void add_edge(int head, int mod, CompositeLabel label);
  const std::vector<GraphEdge>& edges() const { return edges_; }
  const CompositeLabel* label_of(int head, int mod) const;
  /// Modifiers of Root, ascending.
  std::vector<int> root_children() const;
  /// Non-Root outgoing edges of one head, ascending by modifier.
  std::vector<GraphEdge> outgoing(int head) const;

  bool operator==(const SemGraph&) const = default;

 private:
  int n_ = 0;
  std::vector<GraphEdge> edges_;  // kept sorted by (head, mod)
};

// ---- validation --------------------------------------------------------------

struct Violation {
  std::string kind;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

/// Structural checks: nonempty sentence and forms, spans in bounds,
/// non-overlapping arguments within a frame, distinct predicates.
ValidationReport validate_srl(const SrlStructure& s);

// ---- label inventory ---------------------------------------------------------

/// Frozen, ordered label set used by the label scorer and the decoders.
/// Span mode: [PRD, B-r, E-r, ...] with roles sorted lexicographically and
/// B before E per role. Dependency mode: [senses..., roles...], each sorted.
class LabelInventory {
 public:
  static LabelInventory span(const std::set<std::string>& roles);
  static LabelInventory dependency(const std::set<std::string>& senses,
                                   const std::set<std::string>& roles);

  Mode mode() const { return mode_; }
  int size() const { return static_cast<int>(labels_.size()); }
  const CompositeLabel& label(int idx) const { return labels_.at(static_cast<size_t>(idx)); }
  int index_of(const CompositeLabel& l) const;
  /// Whether label idx may sit on a Root-headed edge.
  bool root_allowed(int idx) const { return root_allowed_.at(static_cast<size_t>(idx)) != 0; }
  const std::vector<std::string>& roles() const { return roles_; }
  const std::vector<std::string>& senses() const { return senses_; }

  /// Sequence alphabet for the repair decoder (span mode):
  /// [B-r, E-r, ... , O, I].
  std::vector<std::string> viterbi_alphabet() const;

 private:
  Mode mode_ = Mode::Span;
  std::vector<CompositeLabel> labels_;
  std::vector<char> root_allowed_;
  std::vector<std::string> roles_;
  std::vector<std::string> senses_;
};

/// Span-mode inventory from a role set; throws std::invalid_argument on an
/// empty set.
LabelInventory build_label_inventory(const std::set<std::string>& roles);

}  // namespace srl
