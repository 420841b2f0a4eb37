#pragma once

#include "srl/core.hpp"

#include <string>
#include <utility>
#include <vector>

namespace srl {

enum class ConflictKind : uint8_t {
  UnmatchedE,          // E-r with nothing it can close
  ConsecutiveE,        // two adjacent-position unmatched E edges
  UnclosedBCrossing,   // B-r over an already open B-r, or a closure that
                       // jumps over intervening boundary events
  RoleMismatchedPair,  // E-r while the most recent open argument is r' != r
};

std::string to_string(ConflictKind k);

struct Conflict {
  int position = 0;
  ConflictKind kind{};
  bool operator==(const Conflict&) const = default;
};

/// Why one predicate's outgoing label sequence cannot be decoded.
struct ConflictReport {
  int predicate = 0;
  std::vector<Conflict> conflicts;
};

/// One outgoing B/E edge of a predicate, in modifier order.
struct BoundaryEvent {
  int position = 0;
  bool is_begin = false;
  std::string role;
};

/// Classify a predicate's boundary sequence. Empty result means the
/// sequence decodes deterministically into non-overlapping arguments.
std::vector<Conflict> detect_conflicts(const std::vector<BoundaryEvent>& seq);

/// Argument recovery for one conflict-free sequence: an E-r closes the B-r
/// it immediately follows, a B-r still open at the end is a one-word
/// argument. Conflicted sequences yield no arguments.
std::pair<std::vector<Argument>, std::vector<Conflict>> recover_arguments(
    const std::vector<BoundaryEvent>& seq);

/// Span-mode encoding: (0, k, PRD) per frame; (k, i, B-r) per argument
/// [i, j]:r plus (k, j, E-r) when j > i.
SemGraph srl_to_graph(const SrlStructure& s);

/// Inverse of srl_to_graph. Children of Root become predicates; predicates
/// whose boundary sequence conflicts are reported with no arguments and
/// must be repaired by the caller.
std::pair<SrlStructure, std::vector<ConflictReport>> graph_to_srl(const SemGraph& g,
                                                                  const Sentence& sentence);

/// Dependency-mode encoding: (0, k, sense) per frame, (k, i, r) per
/// single-word argument. Throws if any argument is wider than one word.
SemGraph dep_srl_to_graph(const SrlStructure& s);

/// Inverse of dep_srl_to_graph; no conflicts are possible.
SrlStructure graph_to_dep_srl(const SemGraph& g, const Sentence& sentence);

}  // namespace srl
