#include "lrkit/parser.hpp"

#include <deque>

namespace lrkit {

Action lr_step(const StateTable& table, ParseStack& stack, TokenId tok) {
  Action a = table.action(stack.back(), tok);
  switch (a.kind) {
    case Action::Kind::Shift:
      stack.push_back(a.shift_target());
      break;
    case Action::Kind::Reduce: {
      ProdId p = a.production();
      stack.resize(stack.size() - table.production_length(p));
      stack.push_back(*table.goto_state(stack.back(), table.production_rule(p)));
      break;
    }
    case Action::Kind::Accept:
    case Action::Kind::Error:
      break;
  }
  return a;
}

std::size_t lr_run(const StateTable& table, ParseStack& stack, std::span<const Token> tokens, std::size_t offset,
                   std::size_t max_shifts, Action* last) {
  std::size_t shifted = 0;
  Action a = Action::shift(StateId{});
  while (shifted < max_shifts && offset + shifted < tokens.size()) {
    a = lr_step(table, stack, tokens[offset + shifted].type);
    if (a.kind == Action::Kind::Shift) {
      ++shifted;
    } else if (a.kind != Action::Kind::Reduce) {
      break;
    }
  }
  if (last) *last = a;
  return shifted;
}

std::uint32_t ParseTree::add_terminal(const Token& t) {
  Node n;
  n.kind = Node::Kind::Terminal;
  n.token = t;
  nodes_.push_back(std::move(n));
  return static_cast<std::uint32_t>(nodes_.size() - 1);
}

std::uint32_t ParseTree::add_rule(RuleId rule, ProdId prod, std::vector<std::uint32_t> children) {
  Node n;
  n.kind = Node::Kind::Rule;
  n.rule = rule;
  n.production = prod;
  n.children = std::move(children);
  nodes_.push_back(std::move(n));
  return static_cast<std::uint32_t>(nodes_.size() - 1);
}

std::vector<Token> ParseTree::leaves() const {
  std::vector<Token> out;
  if (nodes_.empty()) return out;
  std::vector<std::uint32_t> todo{root_};
  while (!todo.empty()) {
    const Node& n = nodes_[todo.back()];
    todo.pop_back();
    if (n.kind == Node::Kind::Terminal) {
      out.push_back(n.token);
    } else {
      todo.insert(todo.end(), n.children.rbegin(), n.children.rend());
    }
  }
  return out;
}

std::string ParseTree::pretty(const Grammar& g, std::string_view src) const {
  std::string out;
  if (nodes_.empty()) return out;
  std::vector<std::pair<std::uint32_t, std::size_t>> todo{{root_, 0}};
  while (!todo.empty()) {
    auto [id, depth] = todo.back();
    todo.pop_back();
    const Node& n = nodes_[id];
    out.append(depth, ' ');
    if (n.kind == Node::Kind::Terminal) {
      out += g.token_name(n.token.type);
      out += ' ';
      out += n.token.inserted() ? std::string("<inserted>") : std::string(n.token.lexeme(src));
    } else {
      out += g.rule_name(n.rule);
      for (auto c = n.children.rbegin(); c != n.children.rend(); ++c) todo.emplace_back(*c, depth + 1);
    }
    out += '\n';
  }
  return out;
}

ParseResult parse(const StateTable& table, const Grammar& grammar, std::span<const Token> tokens, Recoverer* recoverer,
                  const ParseOptions& options) {
  ParseResult res;
  ParseTree tree;
  ParseStack stack{StateId{0}};
  std::vector<std::uint32_t> nodes;  // parse-tree node per stack entry above state 0
  std::deque<Token> pending;         // tokens fed by an applied repair before input resumes
  std::size_t i = 0;
  Clock::duration spent{};
  std::size_t skipped = 0;
  std::optional<std::size_t> last_panic_offset;
  bool shifted_since_panic = true;
  std::optional<LineIndex> lines;
  if (!options.source.empty()) lines.emplace(options.source);

  auto finish = [&](bool ok) {
    res.recovery_succeeded = ok;
    if (ok) res.tree = std::move(tree);
    RunStats& st = res.stats;
    st.recovery_time_s = std::chrono::duration<double>(spent).count();
    st.success = ok;
    st.error_locations = res.reports.size();
    if (!ok) st.costs.clear();
    std::size_t real = tokens.empty() ? 0 : tokens.size() - 1;
    st.tokens_skipped_pct = real == 0 ? 0.0 : 100.0 * static_cast<double>(skipped) / static_cast<double>(real);
    return std::move(res);
  };

  while (true) {
    const Token tok = pending.empty() ? tokens[i] : pending.front();
    Action a = table.action(stack.back(), tok.type);
    switch (a.kind) {
      case Action::Kind::Shift:
        stack.push_back(a.shift_target());
        nodes.push_back(tree.add_terminal(tok));
        res.parsed_tokens.push_back(tok);
        if (pending.empty()) {
          ++i;
        } else {
          pending.pop_front();
        }
        shifted_since_panic = true;
        continue;
      case Action::Kind::Reduce: {
        ProdId p = a.production();
        std::size_t len = table.production_length(p);
        std::vector<std::uint32_t> children(nodes.end() - static_cast<std::ptrdiff_t>(len), nodes.end());
        nodes.resize(nodes.size() - len);
        stack.resize(stack.size() - len);
        RuleId r = table.production_rule(p);
        nodes.push_back(tree.add_rule(r, p, std::move(children)));
        stack.push_back(*table.goto_state(stack.back(), r));
        continue;
      }
      case Action::Kind::Accept:
        tree.set_root(nodes.back());
        return finish(true);
      case Action::Kind::Error:
        break;
    }

    RecoveryReport report;
    report.token_offset = i;
    report.byte_offset = tokens[i].span.start;
    if (lines) {
      auto pos = lines->position(report.byte_offset);
      report.line = pos.line;
      report.col = pos.col;
    }
    // A repair is checked against the table before it is applied, so an error
    // while replaying one means the recoverer and the table disagree.
    if (!recoverer || !pending.empty() || spent >= options.timeout) {
      res.reports.push_back(std::move(report));
      return finish(false);
    }

    auto started = Clock::now();
    auto deadline = started + std::chrono::duration_cast<Clock::duration>(options.timeout - spent);
    RecoveryOutcome outcome;
    std::size_t from = i;
    while (true) {
      RecoveryContext ctx{table, grammar, tokens, stack, from, deadline};
      outcome = recoverer->recover(ctx);
      // Panic mode can resume at a state whose action on the token is a reduce
      // that leads straight back to the same error. Without a shift in between
      // that would loop forever, so the offending token is skipped.
      auto* panic = std::get_if<PanicOutcome>(&outcome);
      if (panic && panic->offset == i && last_panic_offset == i && !shifted_since_panic) {
        if (tokens[from].type == kEofToken || Clock::now() >= deadline) {
          outcome = RecoveryFailed{};
          break;
        }
        ++from;
        continue;
      }
      break;
    }
    spent += Clock::now() - started;

    if (std::holds_alternative<RecoveryFailed>(outcome)) {
      res.reports.push_back(std::move(report));
      return finish(false);
    }
    report.success = true;
    if (auto* rep = std::get_if<RepairOutcome>(&outcome)) {
      const RepairSequence& seq = rep->sequences.at(rep->applied);
      std::uint32_t at = tokens[i].span.start;
      for (const Repair& r : seq) {
        switch (r.kind) {
          case Repair::Kind::Insert:
            pending.push_back(Token{r.token, Span{at, at}, Provenance::Inserted});
            break;
          case Repair::Kind::Delete:
            ++i;
            ++skipped;
            break;
          case Repair::Kind::Shift:
            pending.push_back(tokens[i++]);
            break;
        }
      }
      report.cost = rep->cost;
      report.sequences = std::move(rep->sequences);
      report.applied = rep->applied;
      res.stats.costs.push_back(report.cost);
    } else {
      auto& p = std::get<PanicOutcome>(outcome);
      report.tokens_skipped = p.offset - i;
      report.stack_pops = stack.size() - p.stack.size();
      skipped += report.tokens_skipped;
      stack = std::move(p.stack);
      nodes.resize(stack.size() - 1);
      i = p.offset;
      last_panic_offset = i;
      shifted_since_panic = false;
    }
    res.reports.push_back(std::move(report));
  }
}

}  // namespace lrkit
