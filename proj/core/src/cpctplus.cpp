#include "lrkit/cpctplus.hpp"

#include <algorithm>
#include <stdexcept>

namespace lrkit {

void RecoveryParams::validate() const {
  if (n_shifts < 1) throw std::invalid_argument("n_shifts must be at least 1");
  if (n_try < n_shifts) throw std::invalid_argument("n_try must be at least n_shifts");
  auto positive = [](const std::vector<std::uint32_t>& v) {
    return std::all_of(v.begin(), v.end(), [](std::uint32_t c) { return c >= 1; });
  };
  if (!positive(insert_costs) || !positive(delete_costs)) {
    throw std::invalid_argument("insert and delete costs must be at least 1");
  }
}

std::size_t RepairMergeHash::operator()(const RepairMerge& m) const noexcept {
  return (static_cast<std::size_t>(m.repair.kind) << 32) | static_cast<std::size_t>(m.repair.token);
}

std::size_t Configuration::trailing_shifts(std::size_t cap) const {
  std::size_t n = 0;
  for (RepairPath p = repairs; n < cap && !p.empty() && p.top().repair.is_shift(); p = p.parent()) ++n;
  return n;
}

std::size_t ConfigurationHash::operator()(const Configuration& c) const noexcept {
  return c.stack.hash() ^ (c.offset * 0x9e3779b97f4a7c15ULL);
}

bool ConfigurationCompatible::operator()(const Configuration& a, const Configuration& b) const {
  return a.offset == b.offset && a.stack == b.stack && a.trailing_shifts(n_shifts) == b.trailing_shifts(n_shifts) &&
         a.ends_in_delete() == b.ends_in_delete();
}

namespace {

StateStack to_cactus(const ParseStack& stack, CactusArena& arena) {
  StateStack s;
  for (StateId st : stack) s = s.child(st, arena);
  return s;
}

// One LR action on a cactus stack.
Action step(const StateTable& table, StateStack& stack, TokenId tok, CactusArena& arena) {
  Action a = table.action(stack.top(), tok);
  if (a.kind == Action::Kind::Shift) {
    stack = stack.child(a.shift_target(), arena);
  } else if (a.kind == Action::Kind::Reduce) {
    ProdId p = a.production();
    for (std::uint32_t i = table.production_length(p); i > 0; --i) stack = stack.parent();
    stack = stack.child(*table.goto_state(stack.top(), table.production_rule(p)), arena);
  }
  return a;
}

class Search {
 public:
  Search(const StateTable& table, std::span<const Token> tokens, const RecoveryParams& params)
      : table_(table),
        tokens_(tokens),
        params_(params),
        arena_(std::make_shared<CactusArena>()),
        todo_(ConfigurationCompatible{params.n_shifts}) {}

  SearchResult run(const ParseStack& stack, std::size_t offset, Clock::time_point deadline) {
    SearchResult res;
    res.arena = arena_;
    todo_.push(0, Configuration{to_cactus(stack, *arena_), offset, {}});
    std::optional<std::size_t> found;
    for (std::size_t cost = 0; cost < todo_.bucket_count();) {
      if (params_.max_cost && cost > *params_.max_cost) break;
      if (todo_.empty(cost)) {
        if (found) break;
        ++cost;
        continue;
      }
      if (Clock::now() >= deadline) {
        res.status = SearchResult::Status::TimedOut;
        res.successes.clear();
        return res;
      }
      Configuration cfg = todo_.pop(cost);
      ++res.explored;
      if (success(cfg)) {
        found = cost;
        res.successes.push_back(std::move(cfg));
        continue;
      }
      neighbours(cfg, [&](Configuration nb, std::size_t delta) {
        std::size_t nc = cost + delta;
        if (found && nc > cost) return;
        if (params_.max_cost && nc > *params_.max_cost) return;
        enqueue(nc, std::move(nb));
      });
    }
    if (found) {
      res.status = SearchResult::Status::Found;
      res.cost = *found;
    }
    return res;
  }

 private:
  bool success(const Configuration& cfg) const {
    if (table_.action(cfg.stack.top(), tokens_[cfg.offset].type).kind == Action::Kind::Accept) return true;
    return cfg.trailing_shifts(params_.n_shifts) == params_.n_shifts;
  }

  void enqueue(std::size_t cost, Configuration nb) {
    if (params_.merge) {
      if (Configuration* ex = todo_.find(cost, nb)) {
        if (ex->repairs.empty()) {
          if (nb.repairs.empty()) return;
        } else {
          RepairMerge top = ex->repairs.top();
          top.merged = arena_->make<MergedTail>(nb.repairs, top.merged);
          ex->repairs = ex->repairs.parent().child(top, *arena_);
          return;
        }
      }
    }
    todo_.push(cost, std::move(nb));
  }

  template <class F>
  void neighbours(const Configuration& cfg, F&& emit) {
    TokenId current = tokens_[cfg.offset].type;

    // Insert: every token with an action in the current state, except EOF.
    // An insert never directly follows a delete: [delete, insert x] reaches
    // the same configuration as [insert x, delete].
    if (!cfg.ends_in_delete()) {
      for (TokenId t : table_.state_tokens(cfg.stack.top())) {
        if (t == kEofToken) continue;
        StateStack s = cfg.stack;
        Action a;
        do {
          a = step(table_, s, t, *arena_);
        } while (a.kind == Action::Kind::Reduce);
        if (a.kind != Action::Kind::Shift) continue;
        emit(Configuration{s, cfg.offset, cfg.repairs.child(RepairMerge{Repair::insert(t)}, *arena_)},
             params_.insert_cost(t));
      }
    }

    if (current != kEofToken) {
      emit(Configuration{cfg.stack, cfg.offset + 1, cfg.repairs.child(RepairMerge{Repair::del()}, *arena_)},
           params_.delete_cost(current));
    }

    std::size_t limit = params_.shift == ShiftVariant::Shift3 ? 1 : params_.n_shifts;
    StateStack s = cfg.stack;
    std::size_t off = cfg.offset;
    std::size_t shifted = 0;
    while (shifted < limit && off < tokens_.size()) {
      Action a = step(table_, s, tokens_[off].type, *arena_);
      if (a.kind == Action::Kind::Shift) {
        ++shifted;
        ++off;
      } else if (a.kind != Action::Kind::Reduce) {
        break;
      }
    }
    if (shifted == 0) {
      if (params_.shift != ShiftVariant::Shift1 && !(s == cfg.stack)) {
        emit(Configuration{s, off, cfg.repairs}, 0);
      }
      return;
    }
    RepairPath r = cfg.repairs;
    for (std::size_t i = 0; i < shifted; ++i) r = r.child(RepairMerge{Repair::shift()}, *arena_);
    emit(Configuration{s, off, r}, 0);
  }

  const StateTable& table_;
  std::span<const Token> tokens_;
  const RecoveryParams& params_;
  std::shared_ptr<CactusArena> arena_;
  BucketQueue<Configuration, ConfigurationHash, ConfigurationCompatible> todo_;
};

void expand_into(const RepairPath& path, std::vector<RepairSequence>& out) {
  if (path.empty()) {
    out.emplace_back();
    return;
  }
  std::size_t first = out.size();
  expand_into(path.parent(), out);
  for (std::size_t i = first; i < out.size(); ++i) out[i].push_back(path.top().repair);
  for (const MergedTail* m = path.top().merged; m; m = m->next) expand_into(m->path, out);
}

void sort_unique(std::vector<RepairSequence>& seqs) {
  std::sort(seqs.begin(), seqs.end());
  seqs.erase(std::unique(seqs.begin(), seqs.end()), seqs.end());
}

}  // namespace

SearchResult cpct_search(const StateTable& table, const ParseStack& stack, std::span<const Token> tokens,
                         std::size_t offset, const RecoveryParams& params, Clock::time_point deadline) {
  params.validate();
  return Search(table, tokens, params).run(stack, offset, deadline);
}

std::vector<RepairSequence> expand_sequences(const RepairPath& path) {
  std::vector<RepairSequence> out;
  expand_into(path, out);
  return out;
}

std::vector<RepairSequence> candidate_sequences(std::span<const Configuration> successes) {
  std::vector<RepairSequence> out;
  for (const Configuration& c : successes) expand_into(c.repairs, out);
  for (auto& s : out) prune_trailing_shifts(s);
  sort_unique(out);
  return out;
}

std::optional<RankedSequences> rank_and_select(const StateTable& table, std::span<const Configuration> successes,
                                               std::span<const Token> tokens, std::size_t offset,
                                               const RecoveryParams& params, std::mt19937_64& rng,
                                               Clock::time_point deadline) {
  RankedSequences out;
  const std::size_t horizon = offset + params.n_try;
  for (const Configuration& c : successes) {
    if (Clock::now() >= deadline) return std::nullopt;
    std::size_t reached = horizon;
    if (c.offset < horizon) {
      ParseStack stack = c.stack.to_vector();
      Action last;
      std::size_t shifted = lr_run(table, stack, tokens, c.offset, horizon - c.offset, &last);
      if (last.kind == Action::Kind::Error) reached = c.offset + shifted;
    }
    out.distances.push_back(reached);
  }
  if (successes.empty()) return out;

  auto [lo, hi] = std::minmax_element(out.distances.begin(), out.distances.end());
  std::size_t keep = params.ranking == Ranking::Furthest ? *hi : *lo;
  for (std::size_t i = 0; i < successes.size(); ++i) {
    if (out.distances[i] == keep) expand_into(successes[i].repairs, out.sequences);
  }
  for (auto& s : out.sequences) prune_trailing_shifts(s);
  sort_unique(out.sequences);

  auto avoided = [&](const RepairSequence& seq) {
    return std::any_of(seq.begin(), seq.end(), [&](const Repair& r) {
      return r.is_insert() &&
             std::find(params.avoid_insert.begin(), params.avoid_insert.end(), r.token) != params.avoid_insert.end();
    });
  };
  auto preferred_end = std::stable_partition(out.sequences.begin(), out.sequences.end(),
                                             [&](const RepairSequence& s) { return !avoided(s); });
  std::size_t preferred = static_cast<std::size_t>(preferred_end - out.sequences.begin());
  if (preferred == 0) preferred = out.sequences.size();
  if (!params.deterministic_order && preferred > 1) {
    out.applied = std::uniform_int_distribution<std::size_t>(0, preferred - 1)(rng);
  }
  return out;
}

std::optional<RepairOutcome> cpct_recover(const StateTable& table, const ParseStack& stack,
                                          std::span<const Token> tokens, std::size_t offset,
                                          const RecoveryParams& params, std::mt19937_64& rng,
                                          Clock::time_point deadline) {
  SearchResult found = cpct_search(table, stack, tokens, offset, params, deadline);
  if (found.status != SearchResult::Status::Found) return std::nullopt;
  auto ranked = rank_and_select(table, found.successes, tokens, offset, params, rng, deadline);
  if (!ranked || ranked->sequences.empty()) return std::nullopt;
  return RepairOutcome{std::move(ranked->sequences), ranked->applied, found.cost};
}

namespace {

std::mt19937_64 seeded(std::uint64_t seed) {
  if (seed != 0) return std::mt19937_64(seed);
  std::random_device rd;
  return std::mt19937_64((static_cast<std::uint64_t>(rd()) << 32) ^ rd());
}

RecoveryParams with_grammar(const Grammar& g, RecoveryParams p) {
  if (p.avoid_insert.empty()) p.avoid_insert = g.avoid_insert_tokens();
  return p;
}

RecoveryParams reversed(RecoveryParams p) {
  p.ranking = Ranking::Nearest;
  return p;
}

}  // namespace

CpctPlus::CpctPlus(RecoveryParams params) : params_(std::move(params)), rng_(seeded(params_.seed)) {
  params_.validate();
}

CpctPlus::CpctPlus(const Grammar& g, RecoveryParams params) : CpctPlus(with_grammar(g, std::move(params))) {}

RecoveryOutcome CpctPlus::recover(const RecoveryContext& ctx) {
  if (auto r = cpct_recover(ctx.table, ctx.stack, ctx.tokens, ctx.offset, params_, rng_, ctx.deadline)) {
    return std::move(*r);
  }
  return RecoveryFailed{};
}

CpctPlusRev::CpctPlusRev(RecoveryParams params) : CpctPlus(reversed(std::move(params))) {}

CpctPlusRev::CpctPlusRev(const Grammar& g, RecoveryParams params) : CpctPlus(g, reversed(std::move(params))) {}

}  // namespace lrkit
