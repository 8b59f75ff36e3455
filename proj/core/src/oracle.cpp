// Deliberately shares nothing with the search in cpctplus.cpp beyond the table:
// plain vector stacks, its own LR stepping, depth-first enumeration.

#include "lrkit/cpctplus.hpp"

namespace lrkit {

namespace {

enum class Outcome { Shifted, Reduced, Accepted, Failed };

Outcome apply(const StateTable& table, std::vector<StateId>& stack, TokenId tok) {
  Action a = table.action(stack.back(), tok);
  switch (a.kind) {
    case Action::Kind::Shift:
      stack.push_back(a.shift_target());
      return Outcome::Shifted;
    case Action::Kind::Reduce: {
      std::size_t n = table.production_length(a.production());
      stack.erase(stack.end() - static_cast<std::ptrdiff_t>(n), stack.end());
      auto g = table.goto_state(stack.back(), table.production_rule(a.production()));
      stack.push_back(*g);
      return Outcome::Reduced;
    }
    case Action::Kind::Accept:
      return Outcome::Accepted;
    case Action::Kind::Error:
      break;
  }
  return Outcome::Failed;
}

struct Enumerator {
  const StateTable& table;
  std::span<const Token> tokens;
  std::size_t n_shifts;
  std::set<RepairSequence> found;

  bool succeeded(const std::vector<StateId>& stack, std::size_t offset, const RepairSequence& seq) const {
    if (table.action(stack.back(), tokens[offset].type).kind == Action::Kind::Accept) return true;
    if (seq.size() < n_shifts) return false;
    for (std::size_t i = seq.size() - n_shifts; i < seq.size(); ++i) {
      if (!seq[i].is_shift()) return false;
    }
    return true;
  }

  void visit(const std::vector<StateId>& stack, std::size_t offset, RepairSequence& seq, std::size_t budget) {
    if (succeeded(stack, offset, seq)) {
      RepairSequence pruned = seq;
      while (!pruned.empty() && pruned.back().is_shift()) pruned.pop_back();
      found.insert(std::move(pruned));
      return;
    }

    if (budget > 0 && (seq.empty() || !seq.back().is_delete())) {
      for (std::size_t t = 1; t < table.token_count(); ++t) {
        TokenId tok = make_id<TokenId>(t);
        std::vector<StateId> s = stack;
        Outcome o;
        do {
          o = apply(table, s, tok);
        } while (o == Outcome::Reduced);
        if (o != Outcome::Shifted) continue;
        seq.push_back(Repair::insert(tok));
        visit(s, offset, seq, budget - 1);
        seq.pop_back();
      }
    }

    if (budget > 0 && tokens[offset].type != kEofToken) {
      seq.push_back(Repair::del());
      visit(stack, offset + 1, seq, budget - 1);
      seq.pop_back();
    }

    // Reduce as far as possible, then shift at most one token.
    std::vector<StateId> s = stack;
    Outcome o;
    do {
      o = apply(table, s, tokens[offset].type);
    } while (o == Outcome::Reduced);
    if (o == Outcome::Shifted) {
      seq.push_back(Repair::shift());
      visit(s, offset + 1, seq, budget);
      seq.pop_back();
    } else if (s != stack) {
      visit(s, offset, seq, budget);
    }
  }
};

}  // namespace

std::set<RepairSequence> oracle_min_repairs(const StateTable& table, const ParseStack& stack,
                                            std::span<const Token> tokens, std::size_t offset,
                                            std::size_t cost_bound, std::size_t n_shifts) {
  for (std::size_t bound = 0; bound <= cost_bound; ++bound) {
    Enumerator e{table, tokens, n_shifts, {}};
    RepairSequence seq;
    e.visit(stack, offset, seq, bound);
    if (bound == 0 && !e.found.empty()) return {};  // no error here
    if (!e.found.empty()) return e.found;
  }
  return {};
}

}  // namespace lrkit
