#include "hcc/inference.hpp"

#include <cmath>
#include <string>

#include "hcc/error.hpp"

namespace hcc {
namespace {

constexpr double kCostEpsilon = 1e-9;

// True when a is strictly preferred over b.
bool better(const Candidate& a, double cost_a, const Candidate& b, double cost_b) {
  if (cost_a < cost_b - kCostEpsilon) return true;
  if (cost_b < cost_a - kCostEpsilon) return false;
  const std::size_t la = a.covered_leaves.count(), lb = b.covered_leaves.count();
  if (la != lb) return la < lb;
  const std::size_t na = a.nodes.count(), nb = b.nodes.count();
  if (na != nb) return na < nb;
  return a.cover_id < b.cover_id;
}

}  // namespace

void check_cost_params(const CostParams& cp) {
  if (!std::isfinite(cp.beta) || cp.beta < 0.0) {
    fail(ErrorCode::kInvalidArgument, "beta must be a nonnegative number");
  }
}

double set_cost(const Taxonomy& t, const NodeSet& nodes, const CostParams& cp) {
  return static_cast<double>(nodes.count()) +
         cp.beta * static_cast<double>(t.leaf_cover(nodes).count());
}

double bonferroni(double alpha, std::size_t m) {
  check_alpha(alpha);
  if (m == 0) fail(ErrorCode::kInvalidArgument, "Bonferroni correction needs m >= 1");
  return alpha / static_cast<double>(m);
}

PruneResult dynamic_prune(const CoverSpace& space, const Taxonomy& t, const NodeSet& leaf_set) {
  PruneResult r;
  const std::size_t leaf_id = space.all_leaves_id();
  if (leaf_set.empty()) {
    r.skipped = true;
    r.lca = t.empty_set();
    for (std::size_t i = 0; i < space.size(); ++i) r.survivors.push_back(i);
    r.m_before_collapse = space.size();
    return r;
  }
  r.lca = t.lca_set(leaf_set);
  NodeSet above_lca(t.size());
  r.lca.for_each([&](NodeIndex a) { above_lca |= t.ancestors(a); });

  std::vector<std::size_t> kept;
  for (const auto& c : space.covers()) {
    if (c.id == leaf_id || !c.members.intersects(above_lca)) kept.push_back(c.id);
  }
  r.m_before_collapse = kept.size();

  // The all-leaves cover stands in for the group when it belongs to it, so
  // the group still shrinks to a single member.
  bool have_representative = r.lca.is_subset_of(space[leaf_id].members);
  for (std::size_t id : kept) {
    if (id != leaf_id && r.lca.is_subset_of(space[id].members)) {
      if (have_representative) continue;
      have_representative = true;
    }
    r.survivors.push_back(id);
  }
  return r;
}

CandidatePool collect_candidates(const CoverSpace& space, const Taxonomy& t,
                                 const CoverSetFn& predict, double alpha,
                                 PipelineVariant variant) {
  check_alpha(alpha);
  CandidatePool pool;
  pool.alpha = alpha;
  pool.covers_total = space.size();
  pool.fallback_cover_id = space.all_leaves_id();
  pool.fallback = predict(pool.fallback_cover_id, alpha);

  std::vector<std::size_t> survivors;
  if (variant.prune) {
    PruneResult pr = dynamic_prune(space, t, pool.fallback);
    survivors = std::move(pr.survivors);
    pool.m_before_collapse = pr.m_before_collapse;
    pool.pruning_skipped = pr.skipped;
  } else {
    for (std::size_t i = 0; i < space.size(); ++i) survivors.push_back(i);
    pool.m_before_collapse = space.size();
  }
  pool.m_effective = survivors.size();
  pool.alpha_corrected = variant.correct ? bonferroni(alpha, pool.m_effective) : alpha;

  for (std::size_t id : survivors) {
    NodeSet nodes = predict(id, pool.alpha_corrected);
    ++pool.candidates_evaluated;
    if (nodes.empty()) continue;
    NodeSet leaves = t.leaf_cover(nodes);
    pool.candidates.push_back(Candidate{id, std::move(nodes), std::move(leaves)});
  }
  return pool;
}

CandidatePool hcc_candidates(const PredictorFamily& fam, const Taxonomy& t,
                             const PropagatedScores& scores, double alpha,
                             PipelineVariant variant, const InferenceOptions& opts) {
  fam.check_taxonomy(t);
  if (scores.size() != t.size()) {
    fail(ErrorCode::kInvalidArgument, "propagated scores do not match the taxonomy");
  }
  return collect_candidates(
      fam.space(), t,
      [&](std::size_t id, double a) { return fam.predictor(id).predict(scores, a, opts.pad_empty); },
      alpha, variant);
}

HccPrediction select_prediction(const Taxonomy& t, const CandidatePool& pool,
                                const CostParams& cp) {
  check_cost_params(cp);
  HccPrediction out;
  out.m_effective = pool.m_effective;
  out.m_before_collapse = pool.m_before_collapse;
  out.alpha_corrected = pool.alpha_corrected;
  out.candidates_evaluated = pool.candidates_evaluated;
  out.pruned = pool.covers_total - pool.m_effective;
  out.pruning_skipped = pool.pruning_skipped;

  const Candidate* best = nullptr;
  double best_cost = 0.0;
  for (const auto& c : pool.candidates) {
    const double cost = static_cast<double>(c.nodes.count()) +
                        cp.beta * static_cast<double>(c.covered_leaves.count());
    if (best == nullptr || better(c, cost, *best, best_cost)) {
      best = &c;
      best_cost = cost;
    }
  }
  if (best != nullptr) {
    out.selected = best->nodes;
    out.covered_leaves = best->covered_leaves;
    out.cost = best_cost;
    out.selected_cover_id = best->cover_id;
    return out;
  }
  out.fallback = true;
  out.selected = pool.fallback;
  out.covered_leaves = t.leaf_cover(pool.fallback);
  out.cost = set_cost(t, pool.fallback, cp);
  out.selected_cover_id = pool.fallback_cover_id;
  return out;
}

HccPrediction hcc_predict(const PredictorFamily& fam, const Taxonomy& t,
                          const LeafScores& scores, double alpha, const CostParams& cp,
                          const InferenceOptions& opts) {
  const PropagatedScores ps = propagate_scores(t, scores);
  return select_prediction(t, hcc_candidates(fam, t, ps, alpha, {}, opts), cp);
}

}  // namespace hcc
