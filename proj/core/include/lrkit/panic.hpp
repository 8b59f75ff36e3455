#pragma once

#include <optional>
#include <span>

#include "lrkit/parser.hpp"

namespace lrkit {

/// Panic-mode recovery. For each token from `offset` onwards, the stack is
/// searched top-down for a state with a non-error action on that token; the
/// first hit truncates the stack there. If no state matches, the token is
/// skipped and the search restarts from the full stack. Returns nullopt only if
/// not even EOF can be matched.
std::optional<PanicOutcome> panic_recover(const StateTable& table, const ParseStack& stack,
                                          std::span<const Token> tokens, std::size_t offset);

class PanicMode final : public Recoverer {
 public:
  RecoveryOutcome recover(const RecoveryContext& ctx) override;
};

}  // namespace lrkit
