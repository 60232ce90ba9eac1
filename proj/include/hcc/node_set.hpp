#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <vector>

namespace hcc {

using NodeIndex = std::uint32_t;

/// Fixed-universe bitset over node indices [0, universe).
///
/// Binary operations require both operands to share the same universe; a
/// mismatch throws hcc::Error(kInvalidArgument).
class NodeSet {
 public:
  NodeSet() = default;
  explicit NodeSet(std::size_t universe);
  NodeSet(std::size_t universe, std::initializer_list<NodeIndex> members);

  std::size_t universe() const { return universe_; }

  bool contains(NodeIndex v) const {
    return v < universe_ && ((words_[v >> 6] >> (v & 63)) & 1U) != 0;
  }
  void insert(NodeIndex v);
  void erase(NodeIndex v);
  void clear();

  std::size_t count() const;
  bool empty() const;

  NodeSet& operator|=(const NodeSet& other);
  NodeSet& operator&=(const NodeSet& other);
  NodeSet& operator-=(const NodeSet& other);
  friend NodeSet operator|(NodeSet a, const NodeSet& b) { return a |= b; }
  friend NodeSet operator&(NodeSet a, const NodeSet& b) { return a &= b; }
  friend NodeSet operator-(NodeSet a, const NodeSet& b) { return a -= b; }

  bool is_subset_of(const NodeSet& other) const;
  bool intersects(const NodeSet& other) const;

  // Ascending member indices.
  std::vector<NodeIndex> members() const;

  template <class Fn>
  void for_each(Fn&& fn) const {
    for (std::size_t w = 0; w < words_.size(); ++w) {
      std::uint64_t bits = words_[w];
      while (bits != 0) {
        const int bit = std::countr_zero(bits);
        fn(static_cast<NodeIndex>(w * 64 + static_cast<std::size_t>(bit)));
        bits &= bits - 1;
      }
    }
  }

  std::size_t hash() const;

  friend bool operator==(const NodeSet& a, const NodeSet& b) = default;

 private:
  void check_same_universe(const NodeSet& other) const;

  std::size_t universe_ = 0;
  std::vector<std::uint64_t> words_;
};

struct NodeSetHash {
  std::size_t operator()(const NodeSet& s) const { return s.hash(); }
};

}  // namespace hcc
