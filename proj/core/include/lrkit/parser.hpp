#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lrkit/grammar.hpp"
#include "lrkit/lexer.hpp"
#include "lrkit/lrtable.hpp"
#include "lrkit/repair.hpp"

namespace lrkit {

using ParseStack = std::vector<StateId>;
using Clock = std::chrono::steady_clock;

/// Performs the action for (top of `stack`, `tok`): a shift pushes the target
/// state, a reduce pops the production's length and pushes the goto. Accept and
/// Error leave the stack untouched. Returns the action taken.
Action lr_step(const StateTable& table, ParseStack& stack, TokenId tok);

/// Runs the LR automaton from (`stack`, `tokens[offset]`) until `max_shifts`
/// tokens are shifted or an accept/error action is met. Returns the number of
/// tokens shifted; `last` receives the action that stopped the run (Shift if
/// the shift budget ran out).
std::size_t lr_run(const StateTable& table, ParseStack& stack, std::span<const Token> tokens, std::size_t offset,
                   std::size_t max_shifts, Action* last = nullptr);

class ParseTree {
 public:
  struct Node {
    enum class Kind : std::uint8_t { Rule, Terminal };

    Kind kind = Kind::Terminal;
    RuleId rule{};
    ProdId production{};
    Token token;
    std::vector<std::uint32_t> children;
  };

  std::uint32_t add_terminal(const Token& t);
  std::uint32_t add_rule(RuleId rule, ProdId prod, std::vector<std::uint32_t> children);
  void set_root(std::uint32_t root) { root_ = root; }

  const Node& node(std::uint32_t i) const { return nodes_.at(i); }
  std::uint32_t root() const noexcept { return root_; }
  std::size_t size() const noexcept { return nodes_.size(); }

  /// Terminal leaves from left to right.
  std::vector<Token> leaves() const;

  /// Indented rendering: one node per line, rules by name, terminals as
  /// `NAME lexeme`; inserted terminals are marked `<inserted>`.
  std::string pretty(const Grammar& g, std::string_view src) const;

 private:
  std::vector<Node> nodes_;
  std::uint32_t root_ = 0;
};

/// What happened at one error location.
struct RecoveryReport {
  std::size_t token_offset = 0;  // index of the token at which the error was detected
  std::uint32_t byte_offset = 0;
  std::size_t line = 0;  // 1-based; 0 when no source text was supplied
  std::size_t col = 0;
  std::vector<RepairSequence> sequences;  // ranked, trailing shifts pruned
  std::optional<std::size_t> applied;     // index into `sequences`
  std::size_t cost = 0;
  bool success = false;
  std::size_t tokens_skipped = 0;  // panic mode: input tokens discarded
  std::size_t stack_pops = 0;      // panic mode: states popped
};

/// Per-file metrics recorded by the benchmark harness.
struct RunStats {
  double recovery_time_s = 0;
  bool success = true;
  std::size_t error_locations = 0;
  std::vector<std::size_t> costs;  // one per location; empty unless the whole file recovered
  double tokens_skipped_pct = 0;
};

struct ParseResult {
  std::optional<ParseTree> tree;
  std::vector<RecoveryReport> reports;
  bool recovery_succeeded = true;
  RunStats stats;
  std::vector<Token> parsed_tokens;  // the repaired stream actually shifted
};

/// Everything a recoverer sees when invoked at an error location.
struct RecoveryContext {
  const StateTable& table;
  const Grammar& grammar;
  std::span<const Token> tokens;  // ends with EOF
  const ParseStack& stack;
  std::size_t offset;  // token that caused the error
  Clock::time_point deadline;
};

struct RecoveryFailed {};

struct RepairOutcome {
  std::vector<RepairSequence> sequences;  // ranked; trailing shifts pruned
  std::size_t applied = 0;
  std::size_t cost = 0;
};

struct PanicOutcome {
  ParseStack stack;
  std::size_t offset = 0;
};

using RecoveryOutcome = std::variant<RecoveryFailed, RepairOutcome, PanicOutcome>;

class Recoverer {
 public:
  virtual ~Recoverer() = default;
  virtual RecoveryOutcome recover(const RecoveryContext& ctx) = 0;
};

struct ParseOptions {
  /// Cumulative recovery budget for the whole file.
  std::chrono::nanoseconds timeout = std::chrono::milliseconds(500);
  /// Source text, used to fill in line/column numbers in reports.
  std::string_view source;
};

/// Parses `tokens` (which must end with EOF). `recoverer` may be null, in which
/// case the first syntax error fails the parse.
ParseResult parse(const StateTable& table, const Grammar& grammar, std::span<const Token> tokens,
                  Recoverer* recoverer, const ParseOptions& options = {});

}  // namespace lrkit
