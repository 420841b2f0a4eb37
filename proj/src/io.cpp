#include "srl/io.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace srl::io {

namespace {

struct RawBlock {
  int first_line = 0;
  std::vector<std::vector<std::string>> rows;
};

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

struct BlockError {
  int line;
  std::string message;
};

// Span-mode argument column for one frame; bracket tokens per word.
std::vector<Argument> parse_span_column(const std::vector<std::string>& cells, int first_line) {
  std::vector<Argument> args;
  std::string open_role;
  int open_begin = 0;
  for (size_t w = 0; w < cells.size(); ++w) {
    const std::string& c = cells[w];
    const int pos = static_cast<int>(w) + 1;
    const int line = first_line + static_cast<int>(w);
    if (c == "*") continue;
    if (c == "*)") {
      if (open_role.empty()) throw BlockError{line, "argument close without open"};
      args.push_back({{open_begin, pos}, open_role});
      open_role.clear();
      continue;
    }
    if (c.size() >= 3 && c.front() == '(' && c.back() == '*' && c[c.size() - 2] != '(') {
      if (!open_role.empty()) throw BlockError{line, "argument opened while another is open"};
      open_role = c.substr(1, c.size() - 2);
      open_begin = pos;
      continue;
    }
    if (c.size() >= 4 && c.front() == '(' && c.substr(c.size() - 2) == "*)") {
      if (!open_role.empty()) throw BlockError{line, "argument opened while another is open"};
      args.push_back({{pos, pos}, c.substr(1, c.size() - 3)});
      continue;
    }
    throw BlockError{line, "unrecognized argument cell '" + c + "'"};
  }
  if (!open_role.empty()) throw BlockError{first_line, "argument never closed: " + open_role};
  return args;
}

SrlStructure parse_block(const RawBlock& block, Mode mode) {
  SrlStructure s;
  const int n = static_cast<int>(block.rows.size());
  const size_t cols = block.rows.front().size();
  if (cols < 3) throw BlockError{block.first_line, "expected at least index/form/lemma columns"};
  for (int w = 0; w < n; ++w) {
    const auto& row = block.rows[static_cast<size_t>(w)];
    const int line = block.first_line + w;
    if (row.size() != cols) throw BlockError{line, "inconsistent column count"};
    int idx = 0;
    try {
      idx = std::stoi(row[0]);
    } catch (...) {
      throw BlockError{line, "bad index column '" + row[0] + "'"};
    }
    if (idx != w + 1) throw BlockError{line, "index column out of sequence"};
    s.sentence.tokens.push_back({row[1], row[2]});
  }
  if (cols == 3) return s;  // tokens only, no frames

  std::vector<int> predicates;
  for (int w = 0; w < n; ++w)
    if (block.rows[static_cast<size_t>(w)][3] != "-") predicates.push_back(w + 1);
  const size_t frame_cols = cols - 4;
  if (frame_cols != predicates.size())
    throw BlockError{block.first_line,
                     "frame column count " + std::to_string(frame_cols) +
                         " does not match predicate count " + std::to_string(predicates.size())};

  for (size_t f = 0; f < predicates.size(); ++f) {
    PredicateFrame frame;
    frame.predicate = predicates[f];
    const std::string& marker = block.rows[static_cast<size_t>(frame.predicate - 1)][3];
    if (mode == Mode::Dependency) frame.sense = marker;
    std::vector<std::string> cells;
    for (int w = 0; w < n; ++w) cells.push_back(block.rows[static_cast<size_t>(w)][4 + f]);
    if (mode == Mode::Span) {
      frame.arguments = parse_span_column(cells, block.first_line);
    } else {
      for (int w = 0; w < n; ++w)
        if (cells[static_cast<size_t>(w)] != "-")
          frame.arguments.push_back({{w + 1, w + 1}, cells[static_cast<size_t>(w)]});
    }
    s.frames.push_back(std::move(frame));
  }
  return s;
}

}  // namespace

std::vector<SrlStructure> read_corpus(const std::string& path, const ReadOptions& opts,
                                      std::vector<ParseDiagnostic>* diagnostics) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("corpus: cannot open " + path);
  std::vector<SrlStructure> out;
  std::vector<ParseDiagnostic> local;
  std::vector<ParseDiagnostic>& diags = diagnostics ? *diagnostics : local;

  std::vector<RawBlock> blocks;
  RawBlock cur;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> row = split_ws(line);
    if (row.empty()) {
      if (!cur.rows.empty()) blocks.push_back(std::move(cur));
      cur = RawBlock{};
      continue;
    }
    if (cur.rows.empty()) cur.first_line = lineno;
    cur.rows.push_back(std::move(row));
  }
  if (!cur.rows.empty()) blocks.push_back(std::move(cur));

  for (const RawBlock& block : blocks) {
    try {
      SrlStructure s = parse_block(block, opts.mode);
      // Frames with overlapping arguments (or other violations) are dropped
      // with a warning; the rest of the sentence is kept.
      ValidationReport rep = validate_srl(s);
      if (!rep.ok()) {
        if (opts.strict)
          throw BlockError{block.first_line, "invalid structure: " + rep.violations.front().kind +
                                                 " (" + rep.violations.front().detail + ")"};
        std::vector<PredicateFrame> kept;
        for (PredicateFrame& f : s.frames) {
          SrlStructure probe{s.sentence, {f}};
          if (validate_srl(probe).ok()) {
            kept.push_back(std::move(f));
          } else {
            diags.push_back({block.first_line,
                             "dropped frame at predicate " + std::to_string(f.predicate) + ": " +
                                 validate_srl(probe).violations.front().kind});
          }
        }
        s.frames = std::move(kept);
        if (!validate_srl(s).ok()) {
          diags.push_back({block.first_line, "skipped block: " + rep.violations.front().kind});
          continue;
        }
      }
      out.push_back(std::move(s));
    } catch (const BlockError& e) {
      if (opts.strict)
        throw std::runtime_error(path + ":" + std::to_string(e.line) + ": " + e.message);
      diags.push_back({e.line, e.message});
    }
  }
  return out;
}

namespace {

std::vector<std::vector<std::string>> frame_columns(const SrlStructure& s, Mode mode) {
  const int n = s.sentence.size();
  std::vector<std::vector<std::string>> cols;
  for (const PredicateFrame& f : s.frames) {
    std::vector<std::string> col(static_cast<size_t>(n), mode == Mode::Span ? "*" : "-");
    for (const Argument& a : f.arguments) {
      if (mode == Mode::Span) {
        if (a.span.begin == a.span.end) {
          col[static_cast<size_t>(a.span.begin - 1)] = "(" + a.role + "*)";
        } else {
          col[static_cast<size_t>(a.span.begin - 1)] = "(" + a.role + "*";
          col[static_cast<size_t>(a.span.end - 1)] = "*)";
        }
      } else {
        col[static_cast<size_t>(a.span.begin - 1)] = a.role;
      }
    }
    cols.push_back(std::move(col));
  }
  return cols;
}

}  // namespace

void write_corpus(const std::vector<SrlStructure>& structures, const std::string& path,
                  Mode mode) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("corpus: cannot open for writing " + path);
  for (const SrlStructure& raw : structures) {
    const SrlStructure s = raw.normalized();
    const int n = s.sentence.size();
    std::vector<std::string> pred_col(static_cast<size_t>(n), "-");
    for (const PredicateFrame& f : s.frames) {
      const Token& t = s.sentence.tokens[static_cast<size_t>(f.predicate - 1)];
      pred_col[static_cast<size_t>(f.predicate - 1)] =
          mode == Mode::Dependency ? f.sense : (t.lemma.empty() ? t.form : t.lemma);
    }
    const auto cols = frame_columns(s, mode);
    for (int w = 0; w < n; ++w) {
      const Token& t = s.sentence.tokens[static_cast<size_t>(w)];
      os << w + 1 << "\t" << t.form << "\t" << (t.lemma.empty() ? t.form : t.lemma) << "\t"
         << pred_col[static_cast<size_t>(w)];
      for (const auto& col : cols) os << "\t" << col[static_cast<size_t>(w)];
      os << "\n";
    }
    os << "\n";
  }
  if (!os) throw std::runtime_error("corpus: write failed " + path);
}

void write_predictions_json(const std::vector<SrlStructure>& structures,
                            const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("predictions: cannot open for writing " + path);
  for (const SrlStructure& raw : structures) {
    const SrlStructure s = raw.normalized();
    nlohmann::json j;
    j["tokens"] = nlohmann::json::array();
    for (const Token& t : s.sentence.tokens)
      j["tokens"].push_back({{"form", t.form}, {"lemma", t.lemma}});
    j["frames"] = nlohmann::json::array();
    for (const PredicateFrame& f : s.frames) {
      nlohmann::json jf{{"predicate", f.predicate}, {"arguments", nlohmann::json::array()}};
      if (!f.sense.empty()) jf["sense"] = f.sense;
      for (const Argument& a : f.arguments)
        jf["arguments"].push_back({{"begin", a.span.begin}, {"end", a.span.end}, {"role", a.role}});
      j["frames"].push_back(std::move(jf));
    }
    os << j.dump() << "\n";
  }
  if (!os) throw std::runtime_error("predictions: write failed " + path);
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("config: cannot open " + path);
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: " + path + ":" + std::to_string(lineno) +
                               ": expected key=value");
    auto trim = [](std::string v) {
      const size_t a = v.find_first_not_of(" \t");
      const size_t b = v.find_last_not_of(" \t");
      return a == std::string::npos ? std::string() : v.substr(a, b - a + 1);
    };
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

}  // namespace srl::io
