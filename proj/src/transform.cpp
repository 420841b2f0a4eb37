#include "srl/transform.hpp"

#include <algorithm>
#include <stdexcept>

namespace srl {

std::string to_string(ConflictKind k) {
  switch (k) {
    case ConflictKind::UnmatchedE: return "unmatched-E";
    case ConflictKind::ConsecutiveE: return "consecutive-E";
    case ConflictKind::UnclosedBCrossing: return "unclosed-B-crossing";
    case ConflictKind::RoleMismatchedPair: return "role-mismatched-pair";
  }
  return {};
}

namespace {

struct OpenArg {
  std::string role;
  int position;
  size_t event_index;
};

// Single scan shared by detection and recovery. An E-r may only close the
// B-r that is the immediately preceding boundary event; anything else would
// let a closing pair swallow intervening structure and produce overlapping
// spans.
void scan(const std::vector<BoundaryEvent>& seq, std::vector<Argument>* args,
          std::vector<Conflict>* conflicts) {
  std::vector<OpenArg> open;  // stack of pending B events
  for (size_t idx = 0; idx < seq.size(); ++idx) {
    const BoundaryEvent& ev = seq[idx];
    if (idx > 0 && seq[idx].position <= seq[idx - 1].position)
      throw std::invalid_argument("boundary events must have strictly increasing positions");
    if (ev.is_begin) {
      const bool dup = std::any_of(open.begin(), open.end(),
                                   [&](const OpenArg& o) { return o.role == ev.role; });
      if (dup) {
        conflicts->push_back({ev.position, ConflictKind::UnclosedBCrossing});
      } else {
        open.push_back({ev.role, ev.position, idx});
      }
    } else {
      if (open.empty()) {
        conflicts->push_back({ev.position, ConflictKind::UnmatchedE});
      } else if (open.back().role != ev.role) {
        conflicts->push_back({ev.position, ConflictKind::RoleMismatchedPair});
      } else if (open.back().event_index != idx - 1) {
        conflicts->push_back({ev.position, ConflictKind::UnclosedBCrossing});
        open.pop_back();
      } else {
        if (args) args->push_back({{open.back().position, ev.position}, ev.role});
        open.pop_back();
      }
    }
  }
  // B labels never closed are one-word arguments.
  if (args)
    for (const OpenArg& o : open) args->push_back({{o.position, o.position}, o.role});
}

std::vector<BoundaryEvent> boundary_events(const SemGraph& g, int predicate) {
  std::vector<BoundaryEvent> seq;
  for (const GraphEdge& e : g.outgoing(predicate)) {
    if (e.label.kind == LabelKind::Begin)
      seq.push_back({e.mod, true, e.label.text});
    else if (e.label.kind == LabelKind::End)
      seq.push_back({e.mod, false, e.label.text});
  }
  return seq;  // outgoing() is modifier-ascending
}

}  // namespace

std::vector<Conflict> detect_conflicts(const std::vector<BoundaryEvent>& seq) {
  std::vector<Conflict> conflicts;
  scan(seq, nullptr, &conflicts);
  return conflicts;
}

std::pair<std::vector<Argument>, std::vector<Conflict>> recover_arguments(
    const std::vector<BoundaryEvent>& seq) {
  std::vector<Argument> args;
  std::vector<Conflict> conflicts;
  scan(seq, &args, &conflicts);
  if (!conflicts.empty()) args.clear();
  std::sort(args.begin(), args.end());
  return {std::move(args), std::move(conflicts)};
}

SemGraph srl_to_graph(const SrlStructure& s) {
  ValidationReport rep = validate_srl(s);
  if (!rep.ok())
    throw std::invalid_argument("srl_to_graph: invalid structure: " + rep.violations.front().kind);
  SemGraph g(s.sentence.size());
  for (const PredicateFrame& f : s.frames) {
    g.add_edge(0, f.predicate, CompositeLabel::prd());
    for (const Argument& a : f.arguments) {
      g.add_edge(f.predicate, a.span.begin, CompositeLabel::begin(a.role));
      if (a.span.end > a.span.begin)
        g.add_edge(f.predicate, a.span.end, CompositeLabel::end(a.role));
    }
  }
  return g;
}

std::pair<SrlStructure, std::vector<ConflictReport>> graph_to_srl(const SemGraph& g,
                                                                  const Sentence& sentence) {
  SrlStructure out;
  out.sentence = sentence;
  std::vector<ConflictReport> reports;
  for (int k : g.root_children()) {
    PredicateFrame frame;
    frame.predicate = k;
    const std::vector<BoundaryEvent> seq = boundary_events(g, k);
    auto [args, conflicts] = recover_arguments(seq);
    if (conflicts.empty()) {
      frame.arguments = std::move(args);
    } else {
      // Annotate runs of unmatched E edges on adjacent words.
      std::vector<Conflict> annotated = conflicts;
      for (size_t i = 1; i < seq.size(); ++i) {
        if (seq[i].is_begin || seq[i - 1].is_begin) continue;
        if (seq[i].position != seq[i - 1].position + 1) continue;
        auto unmatched_at = [&](int pos) {
          return std::any_of(conflicts.begin(), conflicts.end(), [&](const Conflict& c) {
            return c.position == pos && c.kind == ConflictKind::UnmatchedE;
          });
        };
        if (unmatched_at(seq[i - 1].position) && unmatched_at(seq[i].position))
          annotated.push_back({seq[i].position, ConflictKind::ConsecutiveE});
      }
      reports.push_back({k, std::move(annotated)});
    }
    out.frames.push_back(std::move(frame));
  }
  return {std::move(out), std::move(reports)};
}

SemGraph dep_srl_to_graph(const SrlStructure& s) {
  ValidationReport rep = validate_srl(s);
  if (!rep.ok())
    throw std::invalid_argument("dep_srl_to_graph: invalid structure: " + rep.violations.front().kind);
  SemGraph g(s.sentence.size());
  for (const PredicateFrame& f : s.frames) {
    g.add_edge(0, f.predicate, CompositeLabel::sense(f.sense));
    for (const Argument& a : f.arguments) {
      if (a.span.width() != 1)
        throw std::invalid_argument("dep_srl_to_graph: argument wider than one word");
      g.add_edge(f.predicate, a.span.begin, CompositeLabel::role(a.role));
    }
  }
  return g;
}

SrlStructure graph_to_dep_srl(const SemGraph& g, const Sentence& sentence) {
  SrlStructure out;
  out.sentence = sentence;
  for (int k : g.root_children()) {
    PredicateFrame frame;
    frame.predicate = k;
    frame.sense = g.label_of(0, k)->text;
    for (const GraphEdge& e : g.outgoing(k))
      if (e.label.kind == LabelKind::Role)
        frame.arguments.push_back({{e.mod, e.mod}, e.label.text});
    out.frames.push_back(std::move(frame));
  }
  return out;
}

}  // namespace srl
