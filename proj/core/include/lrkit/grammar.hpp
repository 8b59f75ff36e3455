#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lrkit/ids.hpp"

namespace lrkit {

/// A problem found while reading a grammar file. Lines and columns are 1-based.
struct Diagnostic {
  std::size_t line = 0;
  std::size_t col = 0;
  std::string message;
};

/// Thrown by Grammar::parse. Carries every violation found, not just the first.
class GrammarError : public std::runtime_error {
 public:
  explicit GrammarError(std::vector<Diagnostic> diagnostics);

  const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

enum class Assoc : std::uint8_t { Left, Right, NonAssoc };

struct Precedence {
  std::uint32_t level = 0;  // higher binds tighter
  Assoc assoc = Assoc::Left;

  friend bool operator==(const Precedence&, const Precedence&) = default;
};

struct Production {
  RuleId rule{};
  std::vector<Symbol> symbols;  // may be empty
  std::optional<TokenId> precedence_override;

  friend bool operator==(const Production&, const Production&) = default;
};

/// A validated context-free grammar read from a Yacc-style `.y` file.
///
/// Token 0 is the end-of-file token `$`, which never appears in a production.
/// Tokens are identified by name: `'+'`, `"+"` and a `%token`-declared `+`
/// all denote the same token type. The grammar is immutable once built.
class Grammar {
 public:
  /// Parses and validates Yacc source. Throws GrammarError listing every problem.
  static Grammar parse(std::string_view src);

  std::size_t token_count() const noexcept { return token_names_.size(); }
  std::string_view token_name(TokenId t) const { return token_names_.at(index(t)); }
  std::optional<TokenId> find_token(std::string_view name) const;
  TokenId eof() const noexcept { return kEofToken; }

  std::size_t rule_count() const noexcept { return rule_names_.size(); }
  std::string_view rule_name(RuleId r) const { return rule_names_.at(index(r)); }
  std::optional<RuleId> find_rule(std::string_view name) const;
  std::span<const ProdId> rule_productions(RuleId r) const { return rule_prods_.at(index(r)); }
  RuleId start_rule() const noexcept { return start_; }

  std::size_t production_count() const noexcept { return productions_.size(); }
  const Production& production(ProdId p) const { return productions_.at(index(p)); }

  std::optional<Precedence> token_precedence(TokenId t) const { return token_prec_.at(index(t)); }
  /// The %prec override if present, else the precedence of the production's last token.
  std::optional<Precedence> production_precedence(ProdId p) const;

  bool avoid_insert(TokenId t) const { return avoid_insert_.at(index(t)); }
  std::vector<TokenId> avoid_insert_tokens() const;

  std::string symbol_name(Symbol s) const;

  /// Renders the grammar back to Yacc source that re-parses to an identical grammar.
  std::string to_yacc() const;

  friend bool operator==(const Grammar&, const Grammar&) = default;

 private:
  friend class GrammarBuilder;

  std::vector<std::string> token_names_;
  std::vector<std::optional<Precedence>> token_prec_;
  std::vector<bool> avoid_insert_;
  std::vector<std::string> rule_names_;
  std::vector<std::vector<ProdId>> rule_prods_;
  std::vector<Production> productions_;
  RuleId start_{};
};

}  // namespace lrkit
