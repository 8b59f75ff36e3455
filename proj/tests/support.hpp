#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "lrkit/grammar.hpp"
#include "lrkit/lexer.hpp"
#include "lrkit/lrtable.hpp"
#include "lrkit/parser.hpp"
#include "lrkit/repair.hpp"

#include <optional>
#include <set>
#include <vector>

namespace lrkit::testing {

inline std::string fixture_path(const std::string& name) { return std::string(LRKIT_FIXTURE_DIR) + "/" + name; }

inline std::string read_fixture(const std::string& name) {
  std::ifstream in(fixture_path(name), std::ios::binary);
  if (!in) throw std::runtime_error("missing fixture " + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Grammar, graph, table and lexer for one fixture, kept together because the
// graph and table refer back to the grammar.
struct Language {
  Grammar grammar;
  StateGraph graph;
  StateTable table;
  Lexer lexer;

  Language(const std::string& y, const std::string& l, bool merge = true)
      : grammar(Grammar::parse(read_fixture(y))),
        graph(build_stategraph(grammar, merge)),
        table(graph, grammar),
        lexer(LexSpec::parse(read_fixture(l)), grammar) {}

  Language(const Language&) = delete;
  Language& operator=(const Language&) = delete;

  TokenId tok(std::string_view name) const { return *grammar.find_token(name); }
};

struct ErrorPoint {
  ParseStack stack;
  std::size_t offset = 0;
};

// Where plain LR parsing of `tokens` first fails, if it does.
inline std::optional<ErrorPoint> first_error(const StateTable& table, const std::vector<Token>& tokens) {
  ParseStack stack{StateId{0}};
  std::size_t i = 0;
  while (true) {
    Action a = lr_step(table, stack, tokens[i].type);
    if (a.kind == Action::Kind::Shift) ++i;
    if (a.kind == Action::Kind::Accept) return std::nullopt;
    if (a.kind == Action::Kind::Error) return ErrorPoint{stack, i};
  }
}

// Tokens with zero-width spans, for inputs given as token names.
inline std::vector<Token> token_stream(const Grammar& g, const std::vector<TokenId>& types) {
  std::vector<Token> out;
  for (TokenId t : types) out.push_back(Token{t, {}, Provenance::Real});
  out.push_back(Token{kEofToken, {}, Provenance::Real});
  (void)g;
  return out;
}

inline std::set<std::string> rendered(const std::vector<RepairSequence>& seqs, const Grammar& g,
                                      const std::vector<Token>& toks, std::size_t offset, std::string_view src) {
  std::set<std::string> out;
  for (const auto& s : seqs) out.insert(render_sequence(s, g, toks, offset, src));
  return out;
}

inline std::set<std::string> rendered(const std::set<RepairSequence>& seqs, const Grammar& g,
                                      const std::vector<Token>& toks, std::size_t offset, std::string_view src) {
  return rendered(std::vector<RepairSequence>(seqs.begin(), seqs.end()), g, toks, offset, src);
}

}  // namespace lrkit::testing
