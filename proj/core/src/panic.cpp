#include "lrkit/panic.hpp"

namespace lrkit {

std::optional<PanicOutcome> panic_recover(const StateTable& table, const ParseStack& stack,
                                          std::span<const Token> tokens, std::size_t offset) {
  for (std::size_t i = offset; i < tokens.size(); ++i) {
    for (std::size_t depth = stack.size(); depth > 0; --depth) {
      if (!table.action(stack[depth - 1], tokens[i].type).is_error()) {
        return PanicOutcome{ParseStack(stack.begin(), stack.begin() + static_cast<std::ptrdiff_t>(depth)), i};
      }
    }
  }
  return std::nullopt;
}

RecoveryOutcome PanicMode::recover(const RecoveryContext& ctx) {
  if (auto r = panic_recover(ctx.table, ctx.stack, ctx.tokens, ctx.offset)) return *r;
  return RecoveryFailed{};
}

}  // namespace lrkit
