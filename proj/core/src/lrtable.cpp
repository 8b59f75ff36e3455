#include "lrkit/lrtable.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <sstream>

namespace lrkit {

bool TokenSet::merge(const TokenSet& o) noexcept {
  bool grew = false;
  for (std::size_t i = 0; i < words_.size(); ++i) {
    std::uint64_t before = words_[i];
    words_[i] |= o.words_[i];
    grew |= words_[i] != before;
  }
  return grew;
}

bool TokenSet::intersects(const TokenSet& o) const noexcept {
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (words_[i] & o.words_[i]) return true;
  }
  return false;
}

bool TokenSet::empty() const noexcept {
  return std::all_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w == 0; });
}

void TokenSet::clear() noexcept { std::fill(words_.begin(), words_.end(), 0); }

FirstSets::FirstSets(const Grammar& g) : nullable_(g.rule_count(), false), first_(g.rule_count(), TokenSet(g.token_count())) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t p = 0; p < g.production_count(); ++p) {
      const Production& prod = g.production(make_id<ProdId>(p));
      std::size_t r = index(prod.rule);
      TokenSet acc(g.token_count());
      bool eps = first_of(prod.symbols, acc);
      changed |= first_[r].merge(acc);
      if (eps && !nullable_[r]) {
        nullable_[r] = true;
        changed = true;
      }
    }
  }
}

bool FirstSets::first_of(std::span<const Symbol> symbols, TokenSet& out) const {
  for (const Symbol& s : symbols) {
    if (s.is_token()) {
      out.insert(s.as_token());
      return false;
    }
    out.merge(first_[index(s.as_rule())]);
    if (!nullable_[index(s.as_rule())]) return false;
  }
  return true;
}

std::optional<StateId> StateGraph::edge(StateId s, Symbol sym) const {
  const auto& edges = states_.at(index(s)).edges;
  auto it = std::lower_bound(edges.begin(), edges.end(), sym, [](const Edge& e, Symbol v) { return e.symbol < v; });
  if (it == edges.end() || it->symbol != sym) return std::nullopt;
  return it->target;
}

std::span<const Symbol> StateGraph::production_symbols(ProdId p) const {
  if (p == augmented_production()) return augmented_symbols_;
  return grammar_->production(p).symbols;
}

std::vector<StateGraph::ClosureItem> StateGraph::closure(StateId s) const {
  const State& st = states_.at(index(s));
  return closure_of(st.kernel, st.lookaheads);
}

std::vector<StateGraph::ClosureItem> StateGraph::closure_of(const std::vector<Item>& kernel,
                                                            const std::vector<TokenSet>& lookaheads) const {
  const std::size_t token_count = grammar_->token_count();
  std::vector<ClosureItem> items;
  std::vector<std::int32_t> at_start(grammar_->production_count() + 1, -1);
  std::deque<std::size_t> work;
  std::vector<bool> queued;
  for (std::size_t i = 0; i < kernel.size(); ++i) {
    items.push_back({kernel[i], lookaheads[i]});
    if (kernel[i].dot == 0) at_start[index(kernel[i].prod)] = static_cast<std::int32_t>(i);
    work.push_back(i);
    queued.push_back(true);
  }
  while (!work.empty()) {
    std::size_t i = work.front();
    work.pop_front();
    queued[i] = false;
    Item item = items[i].item;
    auto syms = production_symbols(item.prod);
    if (item.dot >= syms.size() || !syms[item.dot].is_rule()) continue;
    TokenSet la(token_count);
    if (first_->first_of(syms.subspan(item.dot + 1), la)) la.merge(items[i].lookahead);
    for (ProdId p : grammar_->rule_productions(syms[item.dot].as_rule())) {
      std::int32_t j = at_start[index(p)];
      if (j < 0) {
        at_start[index(p)] = static_cast<std::int32_t>(items.size());
        items.push_back({Item{p, 0}, la});
        work.push_back(items.size() - 1);
        queued.push_back(true);
      } else if (items[static_cast<std::size_t>(j)].lookahead.merge(la) && !queued[static_cast<std::size_t>(j)]) {
        work.push_back(static_cast<std::size_t>(j));
        queued[static_cast<std::size_t>(j)] = true;
      }
    }
  }
  return items;
}

std::string StateGraph::dump() const {
  std::ostringstream out;
  for (std::size_t s = 0; s < states_.size(); ++s) {
    out << "State " << s << ":\n";
    for (const ClosureItem& ci : closure(make_id<StateId>(s))) {
      auto syms = production_symbols(ci.item.prod);
      bool aug = ci.item.prod == augmented_production();
      out << "  " << (aug ? std::string("^") : std::string(grammar_->rule_name(grammar_->production(ci.item.prod).rule)))
          << ":";
      for (std::size_t i = 0; i <= syms.size(); ++i) {
        if (i == ci.item.dot) out << " .";
        if (i < syms.size()) out << ' ' << grammar_->symbol_name(syms[i]);
      }
      out << "  [";
      bool first = true;
      ci.lookahead.for_each([&](TokenId t) {
        out << (first ? "" : ", ") << grammar_->token_name(t);
        first = false;
      });
      out << "]\n";
    }
    for (const Edge& e : states_[s].edges) {
      out << "  " << grammar_->symbol_name(e.symbol) << " -> " << index(e.target) << '\n';
    }
  }
  return out.str();
}

class StateGraphBuilder {
 public:
  StateGraphBuilder(const Grammar& g, bool merge) : g_(g), merge_(merge) {
    sg_.grammar_ = &g;
    sg_.first_ = std::make_shared<FirstSets>(g);
    sg_.augmented_symbols_ = {Symbol::rule(g.start_rule())};
  }

  StateGraph build() {
    TokenSet eof(g_.token_count());
    eof.insert(kEofToken);
    add_state({StateGraph::Item{sg_.augmented_production(), 0}}, {eof});
    while (!work_.empty()) {
      std::size_t s = work_.front();
      work_.pop_front();
      queued_[s] = false;
      expand(s);
    }
    renumber();
    for (auto& st : sg_.states_) {
      std::sort(st.edges.begin(), st.edges.end(), [](const auto& a, const auto& b) { return a.symbol < b.symbol; });
    }
    if (merge_) recompute_lookaheads();
    return std::move(sg_);
  }

 private:
  using Item = StateGraph::Item;

  std::size_t add_state(std::vector<Item> kernel, std::vector<TokenSet> las) {
    std::size_t id = sg_.states_.size();
    by_core_[kernel].push_back(id);
    sg_.states_.push_back({std::move(kernel), std::move(las), {}});
    work_.push_back(id);
    queued_.push_back(true);
    return id;
  }

  // Pager's weak compatibility: for every pair of distinct kernel items, either
  // no cross-overlap is introduced or the pair already overlaps in one state.
  static bool weakly_compatible(const std::vector<TokenSet>& a, const std::vector<TokenSet>& b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (std::size_t j = i + 1; j < a.size(); ++j) {
        bool cross = a[i].intersects(b[j]) || b[i].intersects(a[j]);
        if (cross && !a[i].intersects(a[j]) && !b[i].intersects(b[j])) return false;
      }
    }
    return true;
  }

  std::size_t find_or_add(std::vector<Item> kernel, std::vector<TokenSet> las, std::optional<std::size_t> current) {
    auto it = by_core_.find(kernel);
    if (it != by_core_.end()) {
      std::vector<std::size_t> candidates = it->second;
      if (current) {
        auto pos = std::find(candidates.begin(), candidates.end(), *current);
        if (pos != candidates.end()) std::rotate(candidates.begin(), pos, pos + 1);
      }
      for (std::size_t c : candidates) {
        auto& st = sg_.states_[c];
        if (!merge_) {
          if (st.lookaheads == las) return c;
          continue;
        }
        if (!weakly_compatible(st.lookaheads, las)) continue;
        bool grew = false;
        for (std::size_t i = 0; i < las.size(); ++i) grew |= st.lookaheads[i].merge(las[i]);
        if (grew && !queued_[c]) {
          work_.push_back(c);
          queued_[c] = true;
        }
        return c;
      }
    }
    return add_state(std::move(kernel), std::move(las));
  }

  void expand(std::size_t s) {
    auto closure = sg_.closure(make_id<StateId>(s));
    // Successor kernels in order of first appearance of their symbol.
    std::vector<Symbol> order;
    std::map<Symbol, std::map<Item, TokenSet>> next;
    for (const auto& ci : closure) {
      auto syms = sg_.production_symbols(ci.item.prod);
      if (ci.item.dot >= syms.size()) continue;
      Symbol sym = syms[ci.item.dot];
      auto [slot, fresh] = next.try_emplace(sym);
      if (fresh) order.push_back(sym);
      Item adv{ci.item.prod, ci.item.dot + 1};
      auto [la, added] = slot->second.try_emplace(adv, ci.lookahead);
      if (!added) la->second.merge(ci.lookahead);
    }
    for (Symbol sym : order) {
      std::vector<Item> kernel;
      std::vector<TokenSet> las;
      for (auto& [item, la] : next[sym]) {
        kernel.push_back(item);
        las.push_back(la);
      }
      auto& edges = sg_.states_[s].edges;
      auto e = std::find_if(edges.begin(), edges.end(), [&](const auto& x) { return x.symbol == sym; });
      std::optional<std::size_t> current;
      if (e != edges.end()) current = index(e->target);
      std::size_t target = find_or_add(std::move(kernel), std::move(las), current);
      auto& edges2 = sg_.states_[s].edges;  // add_state may have reallocated states_
      auto e2 = std::find_if(edges2.begin(), edges2.end(), [&](const auto& x) { return x.symbol == sym; });
      if (e2 != edges2.end()) {
        e2->target = make_id<StateId>(target);
      } else {
        edges2.push_back({sym, make_id<StateId>(target)});
      }
    }
  }

  // Drops unreachable states and numbers the rest breadth-first from state 0.
  // A state's successors are visited largest closure first; equal sizes are
  // ordered by where the edge symbol first appears in the state's closure.
  void renumber() {
    const std::size_t n = sg_.states_.size();
    std::vector<std::size_t> closure_size(n);
    for (std::size_t s = 0; s < n; ++s) closure_size[s] = sg_.closure(make_id<StateId>(s)).size();

    std::vector<std::size_t> new_id(n, SIZE_MAX);
    std::vector<std::size_t> order{0};
    new_id[0] = 0;
    for (std::size_t head = 0; head < order.size(); ++head) {
      std::size_t s = order[head];
      auto closure = sg_.closure(make_id<StateId>(s));
      auto first_pos = [&](Symbol sym) {
        for (std::size_t i = 0; i < closure.size(); ++i) {
          auto syms = sg_.production_symbols(closure[i].item.prod);
          if (closure[i].item.dot < syms.size() && syms[closure[i].item.dot] == sym) return i;
        }
        return closure.size();
      };
      std::vector<std::pair<std::size_t, std::size_t>> succ;  // (position, target)
      for (const auto& e : sg_.states_[s].edges) succ.emplace_back(first_pos(e.symbol), index(e.target));
      std::stable_sort(succ.begin(), succ.end(), [&](const auto& a, const auto& b) {
        if (closure_size[a.second] != closure_size[b.second]) return closure_size[a.second] > closure_size[b.second];
        return a.first < b.first;
      });
      for (const auto& [pos, t] : succ) {
        if (new_id[t] == SIZE_MAX) {
          new_id[t] = order.size();
          order.push_back(t);
        }
      }
    }
    std::vector<StateGraph::State> states;
    states.reserve(order.size());
    for (std::size_t old : order) {
      StateGraph::State st = std::move(sg_.states_[old]);
      for (auto& e : st.edges) e.target = make_id<StateId>(new_id[index(e.target)]);
      states.push_back(std::move(st));
    }
    sg_.states_ = std::move(states);
  }

  // Lookaheads accumulated during merging can include contributions along
  // edges that were later re-targeted. Recompute them as the least fixpoint
  // over the final graph.
  void recompute_lookaheads() {
    auto& states = sg_.states_;
    for (auto& st : states) {
      for (auto& la : st.lookaheads) la.clear();
    }
    states[0].lookaheads[0].insert(kEofToken);
    std::deque<std::size_t> work{0};
    std::vector<bool> queued(states.size(), false);
    queued[0] = true;
    while (!work.empty()) {
      std::size_t s = work.front();
      work.pop_front();
      queued[s] = false;
      for (const auto& ci : sg_.closure(make_id<StateId>(s))) {
        auto syms = sg_.production_symbols(ci.item.prod);
        if (ci.item.dot >= syms.size()) continue;
        std::size_t t = index(*sg_.edge(make_id<StateId>(s), syms[ci.item.dot]));
        auto& target = states[t];
        Item adv{ci.item.prod, ci.item.dot + 1};
        auto k = std::lower_bound(target.kernel.begin(), target.kernel.end(), adv);
        std::size_t ki = static_cast<std::size_t>(k - target.kernel.begin());
        if (target.lookaheads[ki].merge(ci.lookahead) && !queued[t]) {
          work.push_back(t);
          queued[t] = true;
        }
      }
    }
  }

  const Grammar& g_;
  bool merge_;
  StateGraph sg_;
  std::map<std::vector<Item>, std::vector<std::size_t>> by_core_;
  std::deque<std::size_t> work_;
  std::vector<bool> queued_;
};

StateGraph build_stategraph(const Grammar& g, bool merge) { return StateGraphBuilder(g, merge).build(); }

StateTable::StateTable(const StateGraph& sg, const Grammar& g)
    : state_count_(sg.state_count()),
      token_count_(g.token_count()),
      rule_count_(g.rule_count()),
      actions_(state_count_ * token_count_),
      gotos_(state_count_ * rule_count_, kNoGoto),
      state_tokens_(state_count_) {
  for (std::size_t p = 0; p < g.production_count(); ++p) {
    const Production& prod = g.production(make_id<ProdId>(p));
    prod_rule_.push_back(prod.rule);
    prod_len_.push_back(static_cast<std::uint32_t>(prod.symbols.size()));
  }

  for (std::size_t s = 0; s < state_count_; ++s) {
    StateId sid = make_id<StateId>(s);
    Action* row = &actions_[s * token_count_];

    // Reductions first; reduce/reduce goes to the earlier production.
    for (const auto& ci : sg.closure(sid)) {
      if (ci.item.dot != sg.production_symbols(ci.item.prod).size()) continue;
      if (ci.item.prod == sg.augmented_production()) {
        if (ci.lookahead.contains(kEofToken)) row[0] = Action::accept();
        continue;
      }
      Action red = Action::reduce(ci.item.prod);
      ci.lookahead.for_each([&](TokenId t) {
        Action& cell = row[index(t)];
        if (cell.is_error()) {
          cell = red;
        } else if (cell.kind == Action::Kind::Reduce && cell != red) {
          Action keep = cell.production() < red.production() ? cell : red;
          Action drop = keep == cell ? red : cell;
          conflicts_.push_back({Conflict::Kind::ReduceReduce, sid, t, keep, drop});
          cell = keep;
        }
      });
    }

    for (const auto& e : sg.state(sid).edges) {
      if (e.symbol.is_rule()) {
        gotos_[s * rule_count_ + index(e.symbol.as_rule())] = static_cast<std::uint32_t>(e.target);
        continue;
      }
      TokenId t = e.symbol.as_token();
      Action sh = Action::shift(e.target);
      Action& cell = row[index(t)];
      if (cell.kind != Action::Kind::Reduce) {
        cell = sh;
        continue;
      }
      auto tp = g.token_precedence(t);
      auto pp = g.production_precedence(cell.production());
      if (tp && pp) {
        if (pp->level > tp->level) continue;
        if (pp->level < tp->level) {
          cell = sh;
          continue;
        }
        switch (tp->assoc) {
          case Assoc::Left: break;
          case Assoc::Right: cell = sh; break;
          case Assoc::NonAssoc: cell = Action{}; break;
        }
        continue;
      }
      conflicts_.push_back({Conflict::Kind::ShiftReduce, sid, t, sh, cell});
      cell = sh;
    }

    for (std::size_t t = 0; t < token_count_; ++t) {
      if (!row[t].is_error()) state_tokens_[s].push_back(make_id<TokenId>(t));
    }
  }
}

std::size_t StateTable::shift_reduce_conflicts() const {
  return static_cast<std::size_t>(std::count_if(conflicts_.begin(), conflicts_.end(), [](const Conflict& c) {
    return c.kind == Conflict::Kind::ShiftReduce;
  }));
}

std::size_t StateTable::reduce_reduce_conflicts() const { return conflicts_.size() - shift_reduce_conflicts(); }

}  // namespace lrkit
