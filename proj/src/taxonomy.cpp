#include "hcc/taxonomy.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "hcc/error.hpp"

namespace hcc {
namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

void fnv_mix(std::uint64_t& h, std::string_view bytes) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
}

}  // namespace

Taxonomy Taxonomy::from_edges(std::vector<std::string> names,
                              const std::vector<Edge>& edges) {
  if (names.empty()) fail(ErrorCode::kValidation, "taxonomy has no nodes");

  Taxonomy t;
  const std::size_t n = names.size();
  t.names_ = std::move(names);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& nm = t.names_[i];
    if (nm.empty()) {
      fail(ErrorCode::kValidation,
           "node at position " + std::to_string(i) + " has an empty name");
    }
    if (!t.index_.emplace(nm, static_cast<NodeIndex>(i)).second) {
      fail(ErrorCode::kValidation, "duplicate node name '" + nm + "'");
    }
  }

  t.children_.assign(n, {});
  t.parents_.assign(n, {});
  std::set<std::pair<NodeIndex, NodeIndex>> seen;
  for (const auto& [parent, child] : edges) {
    auto p = t.find(parent);
    if (!p) fail(ErrorCode::kValidation, "edge references unknown node '" + parent + "'");
    auto c = t.find(child);
    if (!c) fail(ErrorCode::kValidation, "edge references unknown node '" + child + "'");
    if (*p == *c) {
      fail(ErrorCode::kValidation, "cycle detected: self loop on '" + parent + "'");
    }
    if (!seen.emplace(*p, *c).second) {
      fail(ErrorCode::kValidation,
           "duplicate edge ['" + parent + "', '" + child + "']");
    }
    t.children_[*p].push_back(*c);
    t.parents_[*c].push_back(*p);
  }
  for (auto& cs : t.children_) std::sort(cs.begin(), cs.end());
  for (auto& ps : t.parents_) std::sort(ps.begin(), ps.end());

  std::vector<NodeIndex> roots;
  for (NodeIndex v = 0; v < n; ++v) {
    if (t.parents_[v].empty()) roots.push_back(v);
  }
  if (roots.empty()) {
    fail(ErrorCode::kValidation, "taxonomy has no root (every node has a parent)");
  }
  if (roots.size() > 1) {
    std::string msg = "taxonomy has multiple roots:";
    for (std::size_t i = 0; i < roots.size() && i < 5; ++i) {
      msg += " '" + t.names_[roots[i]] + "'";
    }
    if (roots.size() > 5) msg += " ...";
    fail(ErrorCode::kValidation, msg);
  }
  t.root_ = roots.front();

  // Kahn's algorithm; the smallest ready index goes first for a stable order.
  std::vector<std::size_t> indegree(n);
  for (NodeIndex v = 0; v < n; ++v) indegree[v] = t.parents_[v].size();
  std::set<NodeIndex> ready(roots.begin(), roots.end());
  while (!ready.empty()) {
    const NodeIndex v = *ready.begin();
    ready.erase(ready.begin());
    t.topo_order_.push_back(v);
    for (NodeIndex c : t.children_[v]) {
      if (--indegree[c] == 0) ready.insert(c);
    }
  }
  if (t.topo_order_.size() != n) {
    // Every unresolved node keeps an unresolved parent, so walking parents
    // inside the remainder must revisit a node on the cycle.
    NodeIndex v = 0;
    while (indegree[v] == 0) ++v;
    std::vector<bool> on_walk(n, false);
    while (!on_walk[v]) {
      on_walk[v] = true;
      for (NodeIndex p : t.parents_[v]) {
        if (indegree[p] > 0) {
          v = p;
          break;
        }
      }
    }
    fail(ErrorCode::kValidation, "cycle detected through node '" + t.names_[v] + "'");
  }

  t.depth_.assign(n, 0);
  for (NodeIndex v : t.topo_order_) {
    for (NodeIndex p : t.parents_[v]) {
      t.depth_[v] = std::max(t.depth_[v], t.depth_[p] + 1);
    }
    t.max_depth_ = std::max(t.max_depth_, t.depth_[v]);
    if (t.parents_[v].size() > 1) t.is_tree_ = false;
  }

  t.leaf_set_ = NodeSet(n);
  t.leaf_position_.assign(n, -1);
  for (NodeIndex v = 0; v < n; ++v) {
    if (t.children_[v].empty()) {
      t.leaf_set_.insert(v);
      t.leaf_position_[v] = static_cast<std::int64_t>(t.leaf_order_.size());
      t.leaf_order_.push_back(v);
    }
  }

  t.descendants_.assign(n, NodeSet(n));
  for (auto it = t.topo_order_.rbegin(); it != t.topo_order_.rend(); ++it) {
    const NodeIndex v = *it;
    for (NodeIndex c : t.children_[v]) {
      t.descendants_[v] |= t.descendants_[c];
      t.descendants_[v].insert(c);
    }
  }
  t.ancestors_.assign(n, NodeSet(n));
  for (NodeIndex v : t.topo_order_) {
    for (NodeIndex p : t.parents_[v]) {
      t.ancestors_[v] |= t.ancestors_[p];
      t.ancestors_[v].insert(p);
    }
  }
  t.leaf_cover_.reserve(n);
  for (NodeIndex v = 0; v < n; ++v) {
    NodeSet cover = t.descendants_[v];
    cover.insert(v);
    cover &= t.leaf_set_;
    t.leaf_cover_.push_back(std::move(cover));
  }

  std::uint64_t h = kFnvOffset;
  for (const auto& nm : t.names_) {
    fnv_mix(h, nm);
    fnv_mix(h, std::string_view("\0", 1));
  }
  for (NodeIndex v = 0; v < n; ++v) {
    for (NodeIndex c : t.children_[v]) {
      fnv_mix(h, std::to_string(v) + ">" + std::to_string(c) + ";");
    }
  }
  t.fingerprint_ = h;
  return t;
}

Taxonomy Taxonomy::parse(std::string_view document) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::kParse, std::string("taxonomy document is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("nodes") || !doc["nodes"].is_array()) {
    fail(ErrorCode::kParse, "taxonomy document needs a \"nodes\" array");
  }
  std::vector<std::string> names;
  for (const auto& node : doc["nodes"]) {
    if (!node.is_string()) fail(ErrorCode::kParse, "node names must be strings");
    names.push_back(node.get<std::string>());
  }
  std::vector<Edge> edges;
  if (doc.contains("edges")) {
    if (!doc["edges"].is_array()) fail(ErrorCode::kParse, "\"edges\" must be an array");
    for (const auto& e : doc["edges"]) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string()) {
        fail(ErrorCode::kParse, "each edge must be a [parent, child] pair of names, got " +
                                    e.dump());
      }
      edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
    }
  }
  return from_edges(std::move(names), edges);
}

Taxonomy Taxonomy::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kNotFound, "cannot open taxonomy file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string Taxonomy::to_json() const {
  nlohmann::json doc;
  doc["nodes"] = names_;
  auto edges = nlohmann::json::array();
  for (NodeIndex v = 0; v < size(); ++v) {
    for (NodeIndex c : children_[v]) edges.push_back({names_[v], names_[c]});
  }
  doc["edges"] = std::move(edges);
  return doc.dump(2);
}

void Taxonomy::check_node(NodeIndex v) const {
  if (v >= size()) {
    fail(ErrorCode::kInvalidArgument, "node index " + std::to_string(v) +
                                          " out of range [0, " + std::to_string(size()) + ")");
  }
}

const std::string& Taxonomy::name(NodeIndex v) const {
  check_node(v);
  return names_[v];
}

std::optional<NodeIndex> Taxonomy::find(std::string_view nm) const {
  auto it = index_.find(std::string(nm));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

NodeIndex Taxonomy::index_of(std::string_view nm) const {
  auto v = find(nm);
  if (!v) fail(ErrorCode::kNotFound, "unknown node '" + std::string(nm) + "'");
  return *v;
}

std::span<const NodeIndex> Taxonomy::children(NodeIndex v) const {
  check_node(v);
  return children_[v];
}

std::span<const NodeIndex> Taxonomy::parents(NodeIndex v) const {
  check_node(v);
  return parents_[v];
}

bool Taxonomy::is_leaf(NodeIndex v) const {
  check_node(v);
  return children_[v].empty();
}

std::optional<std::size_t> Taxonomy::leaf_position(NodeIndex v) const {
  check_node(v);
  if (leaf_position_[v] < 0) return std::nullopt;
  return static_cast<std::size_t>(leaf_position_[v]);
}

std::size_t Taxonomy::node_depth(NodeIndex v) const {
  check_node(v);
  return depth_[v];
}

bool Taxonomy::is_ancestor(NodeIndex ancestor, NodeIndex v) const {
  check_node(ancestor);
  check_node(v);
  return descendants_[ancestor].contains(v);
}

const NodeSet& Taxonomy::descendants(NodeIndex v) const {
  check_node(v);
  return descendants_[v];
}

const NodeSet& Taxonomy::ancestors(NodeIndex v) const {
  check_node(v);
  return ancestors_[v];
}

const NodeSet& Taxonomy::leaf_cover(NodeIndex v) const {
  check_node(v);
  return leaf_cover_[v];
}

NodeSet Taxonomy::leaf_cover(const NodeSet& nodes) const {
  if (nodes.universe() != size()) {
    fail(ErrorCode::kInvalidArgument, "node set does not belong to this taxonomy");
  }
  NodeSet out(size());
  nodes.for_each([&](NodeIndex v) { out |= leaf_cover_[v]; });
  return out;
}

NodeSet Taxonomy::lca_set(const NodeSet& nodes) const {
  if (nodes.universe() != size()) {
    fail(ErrorCode::kInvalidArgument, "node set does not belong to this taxonomy");
  }
  if (nodes.empty()) fail(ErrorCode::kInvalidArgument, "LCA of an empty node set");
  if (nodes.count() == 1) return nodes;

  NodeSet common(size());
  bool first = true;
  nodes.for_each([&](NodeIndex v) {
    if (first) {
      common = ancestors_[v];
      first = false;
    } else {
      common &= ancestors_[v];
    }
  });
  NodeSet out(size());
  if (common.empty()) {
    out.insert(root_);
    return out;
  }
  common.for_each([&](NodeIndex a) {
    if (!descendants_[a].intersects(common)) out.insert(a);
  });
  return out;
}

NodeSet Taxonomy::make_set(std::initializer_list<std::string_view> nms) const {
  NodeSet out(size());
  for (auto nm : nms) out.insert(index_of(nm));
  return out;
}

std::vector<std::string> Taxonomy::names_of(const NodeSet& nodes) const {
  std::vector<std::string> out;
  nodes.for_each([&](NodeIndex v) { out.push_back(names_[v]); });
  return out;
}

std::string Taxonomy::fingerprint_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fingerprint_));
  return buf;
}

}  // namespace hcc
