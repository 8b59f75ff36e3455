#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <type_traits>
#include <vector>

#include "lrkit/cactus.hpp"
#include "lrkit/parser.hpp"
#include "lrkit/repair.hpp"

namespace lrkit {

/// How shift repairs are generated during the search.
///
/// Shift1 shifts 1..n_shifts tokens at once and never performs a bare
/// reduction; Shift2 additionally allows a reduction-only step; Shift3 shifts at
/// most one token per step and is the only variant that finds every
/// minimum-cost sequence.
enum class ShiftVariant : std::uint8_t { Shift1, Shift2, Shift3 };

/// Which success configurations survive ranking.
enum class Ranking : std::uint8_t {
  Furthest,  // those that let parsing continue furthest
  Nearest,   // those that fail soonest; only useful as an experimental baseline
};

struct RecoveryParams {
  std::size_t n_shifts = 3;
  std::size_t n_try = 250;
  std::chrono::nanoseconds timeout = std::chrono::milliseconds(500);
  std::vector<TokenId> avoid_insert;
  bool deterministic_order = false;
  ShiftVariant shift = ShiftVariant::Shift3;
  bool merge = true;
  Ranking ranking = Ranking::Furthest;
  /// Give up once every configuration of this cost has been searched. Unset in
  /// normal use, where the timeout is the only bound.
  std::optional<std::size_t> max_cost;
  /// Seeds the choice among equally ranked sequences when not deterministic.
  std::uint64_t seed = 0;
  /// Per-token costs indexed by token id; empty means every insert/delete costs 1.
  std::vector<std::uint32_t> insert_costs;
  std::vector<std::uint32_t> delete_costs;

  std::uint32_t insert_cost(TokenId t) const { return insert_costs.empty() ? 1 : insert_costs.at(index(t)); }
  std::uint32_t delete_cost(TokenId t) const { return delete_costs.empty() ? 1 : delete_costs.at(index(t)); }
  /// Throws std::invalid_argument if the parameters are inconsistent.
  void validate() const;
};

struct RepairMerge;

struct RepairMergeHash {
  std::size_t operator()(const RepairMerge& m) const noexcept;
};

/// Repair sequences stored as a parent pointer tree of repair merges.
using RepairPath = Cactus<RepairMerge, RepairMergeHash>;

struct MergedTail;

/// A repair plus the tails of other sequences merged into this one. The
/// sequences represented by a node are its own path, plus every sequence
/// represented by each merged tail.
struct RepairMerge {
  Repair repair;
  const MergedTail* merged = nullptr;  // arena-allocated list, newest first

  friend bool operator==(const RepairMerge& a, const RepairMerge& b) {
    return a.repair == b.repair && a.merged == b.merged;
  }
};

struct MergedTail {
  RepairPath path;
  const MergedTail* next = nullptr;
};

using StateStack = Cactus<StateId>;

/// A search node.
struct Configuration {
  StateStack stack;
  std::size_t offset = 0;  // index of the next input token
  RepairPath repairs;

  /// Trailing shift repairs, counted up to `cap`.
  std::size_t trailing_shifts(std::size_t cap) const;
  bool ends_in_delete() const { return !repairs.empty() && repairs.top().repair.is_delete(); }
};

/// Min-cost queue with one insertion-ordered hash set per integer cost.
/// Elements are popped last-in first-out within a cost. Each bucket indexes
/// its elements with an open-addressing table so that discarding a large
/// queue frees a few arrays rather than one node per element.
template <class T, class Hash, class Eq>
class BucketQueue {
  static_assert(std::is_trivially_destructible_v<T>);

 public:
  explicit BucketQueue(Eq eq = {}) : eq_(std::move(eq)) {}

  std::size_t bucket_count() const noexcept { return buckets_.size(); }
  bool empty(std::size_t cost) const { return cost >= buckets_.size() || buckets_[cost].items.empty(); }
  std::size_t size(std::size_t cost) const { return cost < buckets_.size() ? buckets_[cost].items.size() : 0; }

  /// An element equal to `v` already stored at `cost`, or null.
  T* find(std::size_t cost, const T& v) {
    if (cost >= buckets_.size()) return nullptr;
    Bucket& b = buckets_[cost];
    if (b.slots.empty()) return nullptr;
    const std::size_t mask = b.slots.size() - 1;
    for (std::size_t i = Hash{}(v) & mask;; i = (i + 1) & mask) {
      std::uint32_t s = b.slots[i];
      if (s == kEmpty) return nullptr;
      if (s != kTombstone && eq_(b.items[s - 1], v)) return &b.items[s - 1];
    }
  }

  void push(std::size_t cost, T v) {
    if (cost >= buckets_.size()) buckets_.resize(cost + 1);
    Bucket& b = buckets_[cost];
    if ((b.used + 1) * 2 > b.slots.size()) rehash(b);
    b.items.push_back(std::move(v));
    place(b, static_cast<std::uint32_t>(b.items.size()));
  }

  T pop(std::size_t cost) {
    Bucket& b = buckets_[cost];
    const auto id = static_cast<std::uint32_t>(b.items.size());
    const std::size_t mask = b.slots.size() - 1;
    for (std::size_t i = Hash{}(b.items.back()) & mask;; i = (i + 1) & mask) {
      if (b.slots[i] == id) {
        b.slots[i] = kTombstone;
        break;
      }
    }
    T v = std::move(b.items.back());
    b.items.pop_back();
    return v;
  }

 private:
  static constexpr std::uint32_t kEmpty = 0;  // other slots hold an item index + 1
  static constexpr std::uint32_t kTombstone = ~std::uint32_t{0};

  struct Bucket {
    std::vector<T> items;
    std::vector<std::uint32_t> slots;  // size is zero or a power of two
    std::size_t used = 0;              // slots not empty, tombstones included
  };

  void place(Bucket& b, std::uint32_t id) {
    const std::size_t mask = b.slots.size() - 1;
    std::size_t i = Hash{}(b.items[id - 1]) & mask;
    while (b.slots[i] != kEmpty && b.slots[i] != kTombstone) i = (i + 1) & mask;
    if (b.slots[i] == kEmpty) ++b.used;
    b.slots[i] = id;
  }

  void rehash(Bucket& b) {
    std::size_t want = 16;
    while (want < (b.items.size() + 1) * 4) want *= 2;
    b.slots.assign(want, kEmpty);
    b.used = 0;
    for (std::uint32_t id = 1; id <= b.items.size(); ++id) place(b, id);
  }

  std::vector<Bucket> buckets_;
  Eq eq_;
};

struct ConfigurationHash {
  std::size_t operator()(const Configuration& c) const noexcept;
};

/// Compatible configurations: same stack and offset, the same number of
/// trailing shifts, and either both or neither ending in a delete.
struct ConfigurationCompatible {
  std::size_t n_shifts = 3;
  bool operator()(const Configuration& a, const Configuration& b) const;
};

struct SearchResult {
  enum class Status : std::uint8_t { Found, Exhausted, TimedOut };

  Status status = Status::Exhausted;
  std::size_t cost = 0;
  std::vector<Configuration> successes;  // valid while `arena` lives
  std::shared_ptr<CactusArena> arena;
  std::size_t explored = 0;  // configurations popped
};

/// Uniform-cost search for every minimum-cost successful configuration.
SearchResult cpct_search(const StateTable& table, const ParseStack& stack, std::span<const Token> tokens,
                         std::size_t offset, const RecoveryParams& params, Clock::time_point deadline);

/// Every repair sequence a path represents, unpruned, in no particular order.
std::vector<RepairSequence> expand_sequences(const RepairPath& path);

/// The distinct sequences of all `successes`, trailing shifts pruned, sorted.
std::vector<RepairSequence> candidate_sequences(std::span<const Configuration> successes);

struct RankedSequences {
  std::vector<RepairSequence> sequences;
  std::size_t applied = 0;
  std::vector<std::size_t> distances;  // per success configuration: furthest token offset parsed
};

/// Ranks success configurations by how far parsing continues from them (up to
/// `offset + n_try`), keeps the best, and orders their sequences: sequences
/// that insert an avoided token go last. `rng` is used only when the order is
/// not deterministic. Returns nullopt if `deadline` passes.
std::optional<RankedSequences> rank_and_select(const StateTable& table, std::span<const Configuration> successes,
                                               std::span<const Token> tokens, std::size_t offset,
                                               const RecoveryParams& params, std::mt19937_64& rng,
                                               Clock::time_point deadline);

/// Search plus ranking. Returns nullopt on timeout or if no repair exists.
std::optional<RepairOutcome> cpct_recover(const StateTable& table, const ParseStack& stack,
                                          std::span<const Token> tokens, std::size_t offset,
                                          const RecoveryParams& params, std::mt19937_64& rng,
                                          Clock::time_point deadline);

class CpctPlus : public Recoverer {
 public:
  explicit CpctPlus(RecoveryParams params);
  /// Uses the grammar's `%avoid_insert` tokens.
  CpctPlus(const Grammar& g, RecoveryParams params = {});

  RecoveryOutcome recover(const RecoveryContext& ctx) override;
  const RecoveryParams& params() const noexcept { return params_; }

 private:
  RecoveryParams params_;
  std::mt19937_64 rng_;
};

/// Keeps the repairs that let parsing continue the least far.
class CpctPlusRev final : public CpctPlus {
 public:
  explicit CpctPlusRev(RecoveryParams params);
  CpctPlusRev(const Grammar& g, RecoveryParams params = {});
};

/// Brute-force reference: every minimum-cost successful sequence of cost at
/// most `cost_bound`, found by exhaustive enumeration with one-token shift
/// steps and no configuration merging. Trailing shifts are pruned. Empty if
/// nothing within the bound succeeds, or if no repair is needed at all.
std::set<RepairSequence> oracle_min_repairs(const StateTable& table, const ParseStack& stack,
                                            std::span<const Token> tokens, std::size_t offset,
                                            std::size_t cost_bound, std::size_t n_shifts = 3);

}  // namespace lrkit
