#include "hcc/covers.hpp"

#include <algorithm>
#include <unordered_set>

#include "hcc/error.hpp"

namespace hcc {

const char* cover_mode_name(CoverMode mode) {
  switch (mode) {
    case CoverMode::kExhaustive:
      return "exhaustive";
    case CoverMode::kDepthLimited:
      return "depth-limited";
  }
  return "unknown";
}

CoverSpace::CoverSpace(std::vector<NodeSet> member_sets, const Taxonomy& t, CoverMode mode)
    : mode_(mode), fingerprint_(t.fingerprint()) {
  std::vector<std::pair<std::vector<NodeIndex>, NodeSet>> keyed;
  keyed.reserve(member_sets.size());
  for (auto& s : member_sets) keyed.emplace_back(s.members(), std::move(s));
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
    if (a.first.size() != b.first.size()) return a.first.size() < b.first.size();
    return a.first < b.first;
  });
  keyed.erase(std::unique(keyed.begin(), keyed.end(),
                          [](const auto& a, const auto& b) { return a.first == b.first; }),
              keyed.end());

  covers_.reserve(keyed.size());
  for (auto& [list, set] : keyed) {
    NolCover c;
    c.id = covers_.size();
    c.covered_leaves = t.leaf_cover(set);
    c.member_list = std::move(list);
    c.members = std::move(set);
    if (c.members == t.leaves()) {
      all_leaves_id_ = c.id;
      has_all_leaves_ = true;
    }
    if (c.member_list.size() == 1 && c.member_list.front() == t.root()) {
      root_id_ = c.id;
      has_root_ = true;
    }
    covers_.push_back(std::move(c));
  }
}

std::optional<std::size_t> CoverSpace::find(const NodeSet& members) const {
  for (const auto& c : covers_) {
    if (c.members == members) return c.id;
  }
  return std::nullopt;
}

std::size_t CoverSpace::all_leaves_id() const {
  if (!has_all_leaves_) fail(ErrorCode::kInternal, "cover space lacks the all-leaves cover");
  return all_leaves_id_;
}

std::size_t CoverSpace::root_id() const {
  if (!has_root_) fail(ErrorCode::kInternal, "cover space lacks the root cover");
  return root_id_;
}

bool has_ancestor_overlap(const Taxonomy& t, const NodeSet& nodes) {
  bool overlap = false;
  nodes.for_each([&](NodeIndex v) {
    if (!overlap && t.descendants(v).intersects(nodes)) overlap = true;
  });
  return overlap;
}

bool is_nol_cover(const Taxonomy& t, const NodeSet& nodes) {
  if (nodes.universe() != t.size()) return false;
  return t.leaf_cover(nodes) == t.leaves() && !has_ancestor_overlap(t, nodes);
}

CoverSpace enumerate_nol_covers(const Taxonomy& t, std::optional<std::size_t> max_covers,
                                bool allow_fallback) {
  std::unordered_set<NodeSet, NodeSetHash> visited;
  std::vector<NodeSet> found;
  std::vector<NodeSet> stack;
  stack.push_back(t.make_set({t.name(t.root())}));

  while (!stack.empty()) {
    NodeSet candidate = std::move(stack.back());
    stack.pop_back();
    if (!visited.insert(candidate).second) continue;
    found.push_back(candidate);
    if (max_covers && found.size() > *max_covers) {
      if (allow_fallback) return depth_limited_covers(t);
      fail(ErrorCode::kCoverExplosion,
           "more than " + std::to_string(*max_covers) +
               " NOL-covers; use depth-limited covers or raise --max-covers");
    }

    candidate.for_each([&](NodeIndex member) {
      if (t.is_leaf(member)) return;
      NodeSet next = candidate;
      next.erase(member);
      for (NodeIndex c : t.children(member)) next.insert(c);
      NodeSet dominated(t.size());
      next.for_each([&](NodeIndex v) { dominated |= t.descendants(v); });
      next -= dominated;
      if (!visited.contains(next)) stack.push_back(std::move(next));
    });
  }
  return CoverSpace(std::move(found), t, CoverMode::kExhaustive);
}

CoverSpace depth_limited_covers(const Taxonomy& t) {
  std::vector<NodeSet> levels;
  std::vector<CoverWarning> warnings;
  for (std::size_t d = 0; d <= t.depth(); ++d) {
    NodeSet level(t.size());
    for (NodeIndex v = 0; v < t.size(); ++v) {
      const std::size_t dv = t.node_depth(v);
      if (dv == d || (dv < d && t.is_leaf(v))) level.insert(v);
    }
    if (!is_nol_cover(t, level)) {
      warnings.push_back({d, "depth level " + std::to_string(d) +
                                 " does not form a NOL-cover; skipped"});
      continue;
    }
    levels.push_back(std::move(level));
  }
  CoverSpace space(std::move(levels), t, CoverMode::kDepthLimited);
  space.warnings = std::move(warnings);
  return space;
}

CoverSpace brute_force_nol_covers(const Taxonomy& t) {
  const std::size_t n = t.size();
  if (n > kBruteForceMaxNodes) {
    fail(ErrorCode::kInvalidArgument, "brute-force enumeration needs at most " +
                                          std::to_string(kBruteForceMaxNodes) + " nodes, got " +
                                          std::to_string(n));
  }
  std::vector<NodeSet> found;
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
    NodeSet s(n);
    for (NodeIndex v = 0; v < n; ++v) {
      if ((mask >> v) & 1U) s.insert(v);
    }
    if (is_nol_cover(t, s)) found.push_back(std::move(s));
  }
  return CoverSpace(std::move(found), t, CoverMode::kExhaustive);
}

CoverSpace build_cover_space(const Taxonomy& t, CoverSelection selection,
                             std::size_t max_covers) {
  switch (selection) {
    case CoverSelection::kExhaustive:
      return enumerate_nol_covers(t, max_covers, false);
    case CoverSelection::kDepthLimited:
      return depth_limited_covers(t);
    case CoverSelection::kAuto:
      return enumerate_nol_covers(t, max_covers, true);
  }
  fail(ErrorCode::kInvalidArgument, "unknown cover selection");
}

}  // namespace hcc
