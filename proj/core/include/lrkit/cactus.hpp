#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory_resource>
#include <new>
#include <type_traits>
#include <utility>
#include <vector>

namespace lrkit {

/// Bump allocator for cactus nodes and anything else a search builds. Nothing
/// is freed individually: dropping the arena releases every node at once, so
/// abandoning a search with millions of live nodes costs a handful of frees.
class CactusArena {
 public:
  CactusArena() = default;
  CactusArena(const CactusArena&) = delete;
  CactusArena& operator=(const CactusArena&) = delete;

  /// Constructs a T in the arena. T's destructor never runs.
  template <class T, class... Args>
  T* make(Args&&... args) {
    static_assert(std::is_trivially_destructible_v<T>);
    return new (res_.allocate(sizeof(T), alignof(T))) T{std::forward<Args>(args)...};
  }

 private:
  std::pmr::monotonic_buffer_resource res_{std::size_t{1} << 16};
};

/// An immutable singly-linked list that shares tails: a parent pointer tree.
///
/// A Cactus is a plain pointer to an arena-allocated node and is only valid
/// while that arena lives. Nodes cache their depth and a hash of the whole path
/// to the root, so hashing is O(1) and equality stops at the first shared node.
template <class T, class Hash = std::hash<T>>
class Cactus {
  static_assert(std::is_trivially_destructible_v<T>);

 public:
  Cactus() = default;

  bool empty() const noexcept { return node_ == nullptr; }
  std::size_t size() const noexcept { return node_ ? node_->depth : 0; }
  std::size_t hash() const noexcept { return node_ ? node_->hash : 0; }

  /// The most recently pushed value. Must not be empty.
  const T& top() const noexcept { return node_->value; }
  Cactus parent() const noexcept { return Cactus(node_->parent); }
  Cactus child(T value, CactusArena& arena) const {
    std::size_t h = combine(hash(), Hash{}(value));
    return Cactus(arena.make<Node>(std::move(value), node_, h, size() + 1));
  }

  /// Values from the root to the top.
  std::vector<T> to_vector() const {
    std::vector<T> out(size());
    std::size_t i = out.size();
    for (const Node* n = node_; n; n = n->parent) out[--i] = n->value;
    return out;
  }

  /// Same values in the same order. Shared tails short-circuit.
  friend bool operator==(const Cactus& a, const Cactus& b) {
    if (a.size() != b.size() || a.hash() != b.hash()) return false;
    const Node* x = a.node_;
    const Node* y = b.node_;
    while (x != y) {
      if (!(x->value == y->value)) return false;
      x = x->parent;
      y = y->parent;
    }
    return true;
  }

  bool same_node(const Cactus& o) const noexcept { return node_ == o.node_; }

 private:
  struct Node {
    T value;
    const Node* parent;
    std::size_t hash;
    std::size_t depth;
  };

  explicit Cactus(const Node* n) noexcept : node_(n) {}

  static std::size_t combine(std::size_t seed, std::size_t v) noexcept {
    return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
  }

  const Node* node_ = nullptr;
};

}  // namespace lrkit
