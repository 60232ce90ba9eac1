#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hcc/node_set.hpp"

namespace hcc {

/// Immutable rooted DAG of class labels with parent -> child edges.
///
/// Leaves are the nodes without children, kept in node-list order; that
/// order is the column order of leaf score vectors. Strict descendant and
/// ancestor sets are precomputed per node as bitsets, so reachability
/// queries and leaf covers are O(|V| / 64).
///
/// Depths are longest-path edge counts from the root. The running dish
/// example therefore has depth 3 even though it spans four node levels.
class Taxonomy {
 public:
  using Edge = std::pair<std::string, std::string>;

  /// Builds and validates. Throws hcc::Error(kValidation) naming the offending
  /// element for: empty node list, empty or duplicate names, unknown edge
  /// endpoints, duplicate edges, self loops, cycles, and zero or several roots.
  static Taxonomy from_edges(std::vector<std::string> names,
                             const std::vector<Edge>& edges);

  /// Parses the JSON document {"nodes": [...], "edges": [[parent, child], ...]}.
  static Taxonomy parse(std::string_view document);
  static Taxonomy load(const std::filesystem::path& path);

  std::string to_json() const;

  std::size_t size() const { return names_.size(); }
  const std::string& name(NodeIndex v) const;
  std::optional<NodeIndex> find(std::string_view name) const;
  // Throws kNotFound.
  NodeIndex index_of(std::string_view name) const;

  NodeIndex root() const { return root_; }
  std::span<const NodeIndex> children(NodeIndex v) const;
  std::span<const NodeIndex> parents(NodeIndex v) const;

  const NodeSet& leaves() const { return leaf_set_; }
  std::span<const NodeIndex> leaf_order() const { return leaf_order_; }
  std::size_t leaf_count() const { return leaf_order_.size(); }
  bool is_leaf(NodeIndex v) const;
  // Column of v in leaf score vectors, or nullopt for internal nodes.
  std::optional<std::size_t> leaf_position(NodeIndex v) const;

  // Nodes in an order where every parent precedes its children.
  std::span<const NodeIndex> topological_order() const { return topo_order_; }

  /// Longest root-to-leaf path length in edges.
  std::size_t depth() const { return max_depth_; }
  std::size_t node_depth(NodeIndex v) const;

  /// Strict: is_ancestor(v, v) is false.
  bool is_ancestor(NodeIndex ancestor, NodeIndex v) const;
  const NodeSet& descendants(NodeIndex v) const;
  const NodeSet& ancestors(NodeIndex v) const;

  const NodeSet& leaf_cover(NodeIndex v) const;
  NodeSet leaf_cover(const NodeSet& nodes) const;

  /// Minimal strict common ancestors of `nodes`.
  ///
  /// Conventions: lca_set({v}) = {v}. A set containing the root together with
  /// other nodes has no strict common ancestor; it returns {root}. Throws
  /// kInvalidArgument on an empty set.
  NodeSet lca_set(const NodeSet& nodes) const;

  bool is_tree() const { return is_tree_; }

  NodeSet empty_set() const { return NodeSet(size()); }
  NodeSet make_set(std::initializer_list<std::string_view> names) const;
  std::vector<std::string> names_of(const NodeSet& nodes) const;

  /// FNV-1a over node names (in order) and edges; binds models to taxonomies.
  std::uint64_t fingerprint() const { return fingerprint_; }
  std::string fingerprint_hex() const;

 private:
  Taxonomy() = default;
  void check_node(NodeIndex v) const;

  std::vector<std::string> names_;
  std::unordered_map<std::string, NodeIndex> index_;
  std::vector<std::vector<NodeIndex>> children_;
  std::vector<std::vector<NodeIndex>> parents_;
  NodeIndex root_ = 0;
  NodeSet leaf_set_;
  std::vector<NodeIndex> leaf_order_;
  std::vector<std::int64_t> leaf_position_;
  std::vector<NodeIndex> topo_order_;
  std::vector<std::size_t> depth_;
  std::size_t max_depth_ = 0;
  std::vector<NodeSet> descendants_;
  std::vector<NodeSet> ancestors_;
  std::vector<NodeSet> leaf_cover_;
  bool is_tree_ = true;
  std::uint64_t fingerprint_ = 0;
};

}  // namespace hcc
