#pragma once

#include "srl/core.hpp"

#include <map>
#include <string>
#include <vector>

namespace srl::io {

struct ParseDiagnostic {
  int line = 0;
  std::string message;
};

struct ReadOptions {
  Mode mode = Mode::Span;
  bool strict = false;  // strict: malformed blocks are hard errors
};

/// Blank-line separated sentence blocks; one token per line:
///   index  form  lemma  predicate  arg-column-per-frame
/// Span mode argument columns use bracket notation: "(R*" opens role R,
/// "*" continues, "*)" closes, "(R*)" is a one-word argument. Dependency
/// mode columns carry the role or "-"; the predicate column carries the
/// sense. Malformed blocks and frames with overlapping arguments are
/// reported with line numbers and skipped unless strict.
std::vector<SrlStructure> read_corpus(const std::string& path, const ReadOptions& opts,
                                      std::vector<ParseDiagnostic>* diagnostics = nullptr);

void write_corpus(const std::vector<SrlStructure>& structures, const std::string& path,
                  Mode mode);

/// One JSON object per line:
/// {"tokens":[{"form":..,"lemma":..},...],
///  "frames":[{"predicate":k,"sense":..,"arguments":[{"begin":i,"end":j,"role":r}]}]}
/// Indices are 1-based.
void write_predictions_json(const std::vector<SrlStructure>& structures,
                            const std::string& path);

/// Flat key=value file; '#' starts a comment line.
std::map<std::string, std::string> read_config_file(const std::string& path);

}  // namespace srl::io
