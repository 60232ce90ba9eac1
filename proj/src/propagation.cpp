#include "hcc/propagation.hpp"

#include <cmath>

#include "hcc/error.hpp"

namespace hcc {
namespace {

std::string label(const LeafScores& s) {
  return s.instance_id.empty() ? std::string("instance") : "instance '" + s.instance_id + "'";
}

double checked_sum(const LeafScores& scores) {
  double sum = 0.0;
  for (double v : scores.values) {
    if (!std::isfinite(v) || v < 0.0) {
      fail(ErrorCode::kValidation, label(scores) + " has a negative or non-finite score");
    }
    sum += v;
  }
  return sum;
}

void check_simplex(const LeafScores& scores) {
  const double sum = checked_sum(scores);
  for (double v : scores.values) {
    if (v > 1.0 + kSimplexTolerance) {
      fail(ErrorCode::kValidation, label(scores) + " has a score above 1");
    }
  }
  if (std::abs(sum - 1.0) > kSimplexTolerance) {
    fail(ErrorCode::kValidation,
         label(scores) + " scores sum to " + std::to_string(sum) + ", not 1");
  }
}

}  // namespace

void enforce_simplex(LeafScores& scores, SimplexPolicy policy) {
  if (policy == SimplexPolicy::kRenormalize) {
    const double sum = checked_sum(scores);
    if (sum <= 0.0) fail(ErrorCode::kValidation, label(scores) + " has zero total score");
    for (double& v : scores.values) v /= sum;
  }
  check_simplex(scores);
}

PropagatedScores propagate_scores(const Taxonomy& t, const LeafScores& scores,
                                  SimplexPolicy policy) {
  if (scores.values.size() != t.leaf_count()) {
    fail(ErrorCode::kValidation, label(scores) + " has " +
                                     std::to_string(scores.values.size()) +
                                     " leaf scores, taxonomy has " +
                                     std::to_string(t.leaf_count()) + " leaves");
  }
  const LeafScores* input = &scores;
  LeafScores normalized;
  if (policy == SimplexPolicy::kRenormalize) {
    normalized = scores;
    enforce_simplex(normalized, policy);
    input = &normalized;
  } else {
    check_simplex(scores);
  }

  std::vector<double> by_node(t.size(), 0.0);
  for (std::size_t i = 0; i < t.leaf_count(); ++i) {
    by_node[t.leaf_order()[i]] = input->values[i];
  }
  PropagatedScores out;
  out.values.resize(t.size());
  for (NodeIndex v = 0; v < t.size(); ++v) {
    double sum = 0.0;
    t.leaf_cover(v).for_each([&](NodeIndex leaf) { sum += by_node[leaf]; });
    out.values[v] = sum;
  }
  return out;
}

GroundTruth propagated_label_set(const Taxonomy& t, NodeIndex true_leaf) {
  if (!t.is_leaf(true_leaf)) {
    fail(ErrorCode::kValidation, "ground truth '" + t.name(true_leaf) + "' is not a leaf");
  }
  GroundTruth g;
  g.true_leaf = true_leaf;
  g.ancestor_set = t.ancestors(true_leaf);
  g.ancestor_set.insert(true_leaf);
  return g;
}

std::vector<std::uint8_t> label_indicator(const NolCover& cover, const GroundTruth& truth) {
  std::vector<std::uint8_t> bits(cover.member_list.size(), 0);
  bool any = false;
  for (std::size_t j = 0; j < bits.size(); ++j) {
    if (truth.ancestor_set.contains(cover.member_list[j])) {
      bits[j] = 1;
      any = true;
    }
  }
  if (!any) {
    fail(ErrorCode::kInternal, "cover " + std::to_string(cover.id) +
                                   " has no true member; it does not cover every leaf");
  }
  return bits;
}

}  // namespace hcc
