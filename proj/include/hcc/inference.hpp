#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "hcc/conformal.hpp"
#include "hcc/covers.hpp"
#include "hcc/propagation.hpp"
#include "hcc/taxonomy.hpp"

namespace hcc {

struct CostParams {
  double beta = 0.0;
};

void check_cost_params(const CostParams& cp);

/// |nodes| + beta * |leaf_cover(nodes)|.
double set_cost(const Taxonomy& t, const NodeSet& nodes, const CostParams& cp);

/// alpha / m. Throws kInvalidArgument for m == 0 or alpha outside [0, 1).
double bonferroni(double alpha, std::size_t m);

struct PruneResult {
  std::vector<std::size_t> survivors;  // ascending cover ids
  std::size_t m_before_collapse = 0;
  NodeSet lca;
  bool skipped = false;  // empty probe set; every cover survives

  std::size_t m_effective() const { return survivors.size(); }
};

/// Removes covers holding a strict ancestor of any node in lca_set(leaf_set)
/// and collapses the covers holding the whole LCA set into one
/// representative: the all-leaves cover when it is in that group, otherwise
/// the smallest id. The all-leaves cover always survives.
PruneResult dynamic_prune(const CoverSpace& space, const Taxonomy& t, const NodeSet& leaf_set);

inline PruneResult dynamic_prune(const PredictorFamily& fam, const Taxonomy& t,
                                 const NodeSet& leaf_set) {
  return dynamic_prune(fam.space(), t, leaf_set);
}

struct Candidate {
  std::size_t cover_id = 0;
  NodeSet nodes;
  NodeSet covered_leaves;
};

/// Everything selection needs for one instance: the nonempty per-cover sets
/// plus the audit trail. Independent of beta, so a beta sweep reuses it.
struct CandidatePool {
  std::vector<Candidate> candidates;
  NodeSet fallback;  // leaf-level set at the uncorrected alpha
  std::size_t fallback_cover_id = 0;
  std::size_t m_effective = 0;
  std::size_t m_before_collapse = 0;
  std::size_t covers_total = 0;
  std::size_t candidates_evaluated = 0;
  double alpha = 0.0;
  double alpha_corrected = 0.0;
  bool pruning_skipped = false;
};

struct HccPrediction {
  NodeSet selected;
  double cost = 0.0;
  NodeSet covered_leaves;
  std::size_t m_effective = 1;
  std::size_t m_before_collapse = 1;
  double alpha_corrected = 0.0;
  std::size_t candidates_evaluated = 0;
  std::size_t pruned = 0;
  std::optional<std::size_t> selected_cover_id;
  bool fallback = false;
  bool pruning_skipped = false;
};

struct InferenceOptions {
  bool pad_empty = false;
};

/// Pipeline switches used by the ablations.
struct PipelineVariant {
  bool prune = true;
  bool correct = true;
};

/// Per-cover set oracle: (cover_id, alpha) -> predicted cover members.
using CoverSetFn = std::function<NodeSet(std::size_t, double)>;

/// Probe at alpha with the all-leaves predictor, prune, correct alpha and
/// query every surviving cover.
CandidatePool collect_candidates(const CoverSpace& space, const Taxonomy& t,
                                 const CoverSetFn& predict, double alpha,
                                 PipelineVariant variant);

CandidatePool hcc_candidates(const PredictorFamily& fam, const Taxonomy& t,
                             const PropagatedScores& scores, double alpha,
                             PipelineVariant variant = {}, const InferenceOptions& opts = {});

/// Lowest cost among nonempty candidates; ties go to fewer covered leaves,
/// then fewer nodes, then the lower cover id. Without candidates the
/// leaf-level fallback set is returned and flagged.
HccPrediction select_prediction(const Taxonomy& t, const CandidatePool& pool,
                                const CostParams& cp);

HccPrediction hcc_predict(const PredictorFamily& fam, const Taxonomy& t,
                          const LeafScores& scores, double alpha, const CostParams& cp,
                          const InferenceOptions& opts = {});

}  // namespace hcc
