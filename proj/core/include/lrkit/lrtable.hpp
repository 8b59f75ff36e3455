#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lrkit/grammar.hpp"
#include "lrkit/ids.hpp"

namespace lrkit {

/// A fixed-size set of token types.
class TokenSet {
 public:
  TokenSet() = default;
  explicit TokenSet(std::size_t token_count) : words_((token_count + 63) / 64, 0) {}

  bool contains(TokenId t) const noexcept { return (words_[index(t) / 64] >> (index(t) % 64)) & 1u; }
  void insert(TokenId t) noexcept { words_[index(t) / 64] |= std::uint64_t{1} << (index(t) % 64); }
  /// Adds every member of `o`; returns true if this set grew.
  bool merge(const TokenSet& o) noexcept;
  bool intersects(const TokenSet& o) const noexcept;
  bool empty() const noexcept;
  void clear() noexcept;

  template <class F>
  void for_each(F&& f) const {
    for (std::size_t w = 0; w < words_.size(); ++w) {
      std::uint64_t bits = words_[w];
      while (bits) {
        int b = __builtin_ctzll(bits);
        f(make_id<TokenId>(w * 64 + static_cast<std::size_t>(b)));
        bits &= bits - 1;
      }
    }
  }

  friend bool operator==(const TokenSet&, const TokenSet&) = default;

 private:
  std::vector<std::uint64_t> words_;
};

/// Nullability and FIRST sets of every rule.
class FirstSets {
 public:
  explicit FirstSets(const Grammar& g);

  bool nullable(RuleId r) const { return nullable_[index(r)]; }
  const TokenSet& first(RuleId r) const { return first_[index(r)]; }

  /// Adds FIRST(symbols) to `out`; returns true if `symbols` can derive the empty string.
  bool first_of(std::span<const Symbol> symbols, TokenSet& out) const;

 private:
  std::vector<bool> nullable_;
  std::vector<TokenSet> first_;
};

/// The LR(1) automaton.
///
/// Items refer to grammar productions by ProdId. The augmented production
/// `^: <start rule>` has id `augmented_production()`, one past the grammar's last
/// production. State 0 is the entry state.
class StateGraph {
 public:
  struct Item {
    ProdId prod{};
    std::uint32_t dot = 0;

    friend auto operator<=>(const Item&, const Item&) = default;
  };

  struct Edge {
    Symbol symbol;
    StateId target{};
  };

  struct State {
    std::vector<Item> kernel;           // sorted
    std::vector<TokenSet> lookaheads;   // parallel to kernel
    std::vector<Edge> edges;            // sorted by symbol
  };

  struct ClosureItem {
    Item item;
    TokenSet lookahead;
  };

  std::size_t state_count() const noexcept { return states_.size(); }
  const State& state(StateId s) const { return states_.at(index(s)); }
  std::optional<StateId> edge(StateId s, Symbol sym) const;

  ProdId augmented_production() const noexcept { return make_id<ProdId>(grammar_->production_count()); }
  std::span<const Symbol> production_symbols(ProdId p) const;

  /// The kernel plus its closure; kernel items come first.
  std::vector<ClosureItem> closure(StateId s) const;

  /// Human-readable listing of every state's items and edges.
  std::string dump() const;

  const Grammar& grammar() const noexcept { return *grammar_; }

 private:
  friend class StateGraphBuilder;

  std::vector<ClosureItem> closure_of(const std::vector<Item>& kernel, const std::vector<TokenSet>& lookaheads) const;

  const Grammar* grammar_ = nullptr;
  std::shared_ptr<const FirstSets> first_;
  std::vector<Symbol> augmented_symbols_;
  std::vector<State> states_;
};

/// Builds the LR(1) stategraph of `g`. With `merge` set, states are merged using
/// Pager's weak compatibility test; otherwise the canonical LR(1) graph results.
/// `g` must outlive the returned graph.
StateGraph build_stategraph(const Grammar& g, bool merge = true);

struct Action {
  enum class Kind : std::uint8_t { Error, Shift, Reduce, Accept };

  Kind kind = Kind::Error;
  std::uint32_t value = 0;  // target state for Shift, production for Reduce

  static constexpr Action shift(StateId s) noexcept { return {Kind::Shift, static_cast<std::uint32_t>(s)}; }
  static constexpr Action reduce(ProdId p) noexcept { return {Kind::Reduce, static_cast<std::uint32_t>(p)}; }
  static constexpr Action accept() noexcept { return {Kind::Accept, 0}; }

  bool is_error() const noexcept { return kind == Kind::Error; }
  StateId shift_target() const noexcept { return static_cast<StateId>(value); }
  ProdId production() const noexcept { return static_cast<ProdId>(value); }

  friend bool operator==(const Action&, const Action&) = default;
};

/// A conflict not settled by precedence declarations, resolved Yacc-style.
struct Conflict {
  enum class Kind : std::uint8_t { ShiftReduce, ReduceReduce };

  Kind kind;
  StateId state;
  TokenId token;
  Action chosen;
  Action discarded;
};

/// Dense action/goto tables derived from a StateGraph.
class StateTable {
 public:
  StateTable(const StateGraph& sg, const Grammar& g);

  std::size_t state_count() const noexcept { return state_count_; }
  std::size_t token_count() const noexcept { return token_count_; }
  std::size_t rule_count() const noexcept { return rule_count_; }

  Action action(StateId s, TokenId t) const noexcept { return actions_[index(s) * token_count_ + index(t)]; }
  std::optional<StateId> goto_state(StateId s, RuleId r) const noexcept {
    std::uint32_t v = gotos_[index(s) * rule_count_ + index(r)];
    if (v == kNoGoto) return std::nullopt;
    return make_id<StateId>(v);
  }

  /// Tokens whose action in `s` is not Error, in ascending order.
  std::span<const TokenId> state_tokens(StateId s) const { return state_tokens_[index(s)]; }

  RuleId production_rule(ProdId p) const { return prod_rule_[index(p)]; }
  std::uint32_t production_length(ProdId p) const { return prod_len_[index(p)]; }

  const std::vector<Conflict>& conflicts() const noexcept { return conflicts_; }
  std::size_t shift_reduce_conflicts() const;
  std::size_t reduce_reduce_conflicts() const;

 private:
  static constexpr std::uint32_t kNoGoto = UINT32_MAX;

  std::size_t state_count_ = 0;
  std::size_t token_count_ = 0;
  std::size_t rule_count_ = 0;
  std::vector<Action> actions_;
  std::vector<std::uint32_t> gotos_;
  std::vector<std::vector<TokenId>> state_tokens_;
  std::vector<RuleId> prod_rule_;
  std::vector<std::uint32_t> prod_len_;
  std::vector<Conflict> conflicts_;
};

}  // namespace lrkit
