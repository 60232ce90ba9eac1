#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hcc/covers.hpp"
#include "hcc/taxonomy.hpp"

namespace hcc {

/// Base classifier output for one instance, aligned to Taxonomy::leaf_order().
struct LeafScores {
  std::string instance_id;
  std::vector<double> values;
};

/// Scores for every node, aligned to node indices.
struct PropagatedScores {
  std::vector<double> values;

  double operator[](NodeIndex v) const { return values[v]; }
  std::size_t size() const { return values.size(); }
};

struct GroundTruth {
  NodeIndex true_leaf = 0;
  NodeSet ancestor_set;  // every node whose leaf cover holds true_leaf
};

enum class SimplexPolicy { kReject, kRenormalize };

inline constexpr double kSimplexTolerance = 1e-6;

/// Enforces the simplex contract in place: entries in [0, 1] summing to one
/// within kSimplexTolerance. kRenormalize divides by the sum first.
/// Throws kValidation naming the instance.
void enforce_simplex(LeafScores& scores, SimplexPolicy policy);

/// Sums leaf scores over each node's leaf cover (ascending leaf order).
PropagatedScores propagate_scores(const Taxonomy& t, const LeafScores& scores,
                                  SimplexPolicy policy = SimplexPolicy::kReject);

GroundTruth propagated_label_set(const Taxonomy& t, NodeIndex true_leaf);

/// Bit j is set iff cover member j (ascending index order) is a true label.
std::vector<std::uint8_t> label_indicator(const NolCover& cover, const GroundTruth& truth);

}  // namespace hcc
