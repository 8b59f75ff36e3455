#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lrkit/grammar.hpp"
#include "lrkit/ids.hpp"
#include "lrkit/lexer.hpp"

namespace lrkit {

/// One atomic edit made at an error location.
///
/// Ordering is Insert < Delete < Shift, with inserts ordered by token id.
struct Repair {
  enum class Kind : std::uint8_t { Insert, Delete, Shift };

  Kind kind = Kind::Shift;
  TokenId token{};  // only meaningful for Insert

  static constexpr Repair insert(TokenId t) noexcept { return {Kind::Insert, t}; }
  static constexpr Repair del() noexcept { return {Kind::Delete, TokenId{}}; }
  static constexpr Repair shift() noexcept { return {Kind::Shift, TokenId{}}; }

  bool is_insert() const noexcept { return kind == Kind::Insert; }
  bool is_delete() const noexcept { return kind == Kind::Delete; }
  bool is_shift() const noexcept { return kind == Kind::Shift; }

  friend constexpr auto operator<=>(const Repair& a, const Repair& b) noexcept {
    if (a.kind != b.kind) return a.kind <=> b.kind;
    if (a.kind != Kind::Insert) return std::strong_ordering::equal;
    return a.token <=> b.token;
  }
  friend constexpr bool operator==(const Repair& a, const Repair& b) noexcept { return (a <=> b) == 0; }
};

using RepairSequence = std::vector<Repair>;

/// Removes trailing Shift repairs.
void prune_trailing_shifts(RepairSequence& seq);

/// Number of inserts plus deletes.
std::size_t repair_count(std::span<const Repair> seq);

/// Renders `Insert x, Shift y, Delete z`. Delete and Shift name the lexeme of
/// the input token they act on, starting from token index `offset`.
std::string render_sequence(std::span<const Repair> seq, const Grammar& g, std::span<const Token> tokens,
                            std::size_t offset, std::string_view src);

}  // namespace lrkit
