#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>

namespace lrkit {

/// Index of a token type within a Grammar. Token 0 is always end-of-file.
enum class TokenId : std::uint32_t {};
/// Index of a rule (nonterminal) within a Grammar.
enum class RuleId : std::uint32_t {};
/// Index of a production within a Grammar.
enum class ProdId : std::uint32_t {};
/// Index of a state in a StateGraph / StateTable. State 0 is the entry state.
enum class StateId : std::uint32_t {};

template <class Id>
constexpr std::size_t index(Id id) noexcept {
  return static_cast<std::size_t>(id);
}

template <class Id>
constexpr Id make_id(std::size_t i) noexcept {
  return static_cast<Id>(static_cast<std::uint32_t>(i));
}

inline constexpr TokenId kEofToken{0};

/// A grammar symbol: either a token type or a rule reference.
struct Symbol {
  enum class Kind : std::uint8_t { Token, Rule };

  Kind kind = Kind::Token;
  std::uint32_t value = 0;

  static constexpr Symbol token(TokenId t) noexcept { return {Kind::Token, static_cast<std::uint32_t>(t)}; }
  static constexpr Symbol rule(RuleId r) noexcept { return {Kind::Rule, static_cast<std::uint32_t>(r)}; }

  constexpr bool is_token() const noexcept { return kind == Kind::Token; }
  constexpr bool is_rule() const noexcept { return kind == Kind::Rule; }
  constexpr TokenId as_token() const noexcept { return static_cast<TokenId>(value); }
  constexpr RuleId as_rule() const noexcept { return static_cast<RuleId>(value); }

  friend constexpr auto operator<=>(const Symbol&, const Symbol&) = default;
};

}  // namespace lrkit

template <>
struct std::hash<lrkit::Symbol> {
  std::size_t operator()(const lrkit::Symbol& s) const noexcept {
    return (static_cast<std::size_t>(s.value) << 1) | (s.is_rule() ? 1u : 0u);
  }
};
