#include "hcc/node_set.hpp"

#include <string>

#include "hcc/error.hpp"

namespace hcc {

NodeSet::NodeSet(std::size_t universe)
    : universe_(universe), words_((universe + 63) / 64, 0) {}

NodeSet::NodeSet(std::size_t universe, std::initializer_list<NodeIndex> members)
    : NodeSet(universe) {
  for (NodeIndex v : members) insert(v);
}

void NodeSet::insert(NodeIndex v) {
  if (v >= universe_) {
    fail(ErrorCode::kInvalidArgument,
         "node index " + std::to_string(v) + " out of range [0, " +
             std::to_string(universe_) + ")");
  }
  words_[v >> 6] |= std::uint64_t{1} << (v & 63);
}

void NodeSet::erase(NodeIndex v) {
  if (v < universe_) words_[v >> 6] &= ~(std::uint64_t{1} << (v & 63));
}

void NodeSet::clear() {
  for (auto& w : words_) w = 0;
}

std::size_t NodeSet::count() const {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

bool NodeSet::empty() const {
  for (auto w : words_) {
    if (w != 0) return false;
  }
  return true;
}

void NodeSet::check_same_universe(const NodeSet& other) const {
  if (universe_ != other.universe_) {
    fail(ErrorCode::kInvalidArgument,
         "node sets over different universes (" + std::to_string(universe_) +
             " vs " + std::to_string(other.universe_) + ")");
  }
}

NodeSet& NodeSet::operator|=(const NodeSet& other) {
  check_same_universe(other);
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
  return *this;
}

NodeSet& NodeSet::operator&=(const NodeSet& other) {
  check_same_universe(other);
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= other.words_[i];
  return *this;
}

NodeSet& NodeSet::operator-=(const NodeSet& other) {
  check_same_universe(other);
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= ~other.words_[i];
  return *this;
}

bool NodeSet::is_subset_of(const NodeSet& other) const {
  check_same_universe(other);
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if ((words_[i] & ~other.words_[i]) != 0) return false;
  }
  return true;
}

bool NodeSet::intersects(const NodeSet& other) const {
  check_same_universe(other);
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if ((words_[i] & other.words_[i]) != 0) return true;
  }
  return false;
}

std::vector<NodeIndex> NodeSet::members() const {
  std::vector<NodeIndex> out;
  out.reserve(count());
  for_each([&](NodeIndex v) { out.push_back(v); });
  return out;
}

std::size_t NodeSet::hash() const {
  // splitmix-style mixing per word
  std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ universe_;
  for (auto w : words_) {
    std::uint64_t z = w + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    h ^= z ^ (z >> 31);
  }
  return static_cast<std::size_t>(h);
}

}  // namespace hcc
