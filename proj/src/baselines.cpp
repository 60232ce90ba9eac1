#include "hcc/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hcc/error.hpp"
#include "parallel.hpp"

namespace hcc {

NodeSet standard_cp_predict(const PredictorFamily& fam, const PropagatedScores& scores,
                            double alpha, bool pad_empty) {
  return fam.leaf_predictor().predict(scores, alpha, pad_empty);
}

NodeSet lca_baseline_predict(const Taxonomy& t, const NodeSet& leaf_set,
                             const PropagatedScores& scores) {
  if (!leaf_set.empty()) return t.lca_set(leaf_set);
  NodeIndex best = t.leaf_order().front();
  for (NodeIndex leaf : t.leaf_order()) {
    if (scores[leaf] > scores[best]) best = leaf;
  }
  NodeSet out(t.size());
  out.insert(best);
  return out;
}

HccPrediction hcc_no_pruning_predict(const PredictorFamily& fam, const Taxonomy& t,
                                     const PropagatedScores& scores, double alpha,
                                     const CostParams& cp, const InferenceOptions& opts) {
  return select_prediction(
      t, hcc_candidates(fam, t, scores, alpha, PipelineVariant{false, true}, opts), cp);
}

HccPrediction hcc_no_correction_predict(const PredictorFamily& fam, const Taxonomy& t,
                                        const PropagatedScores& scores, double alpha,
                                        const CostParams& cp, const InferenceOptions& opts) {
  return select_prediction(
      t, hcc_candidates(fam, t, scores, alpha, PipelineVariant{true, false}, opts), cp);
}

double risk_grid_lambda(std::size_t i) {
  return static_cast<double>(i) / static_cast<double>(kRiskGridSteps);
}

double risk_grid_threshold(std::size_t i) {
  return static_cast<double>(kRiskGridSteps - i) / static_cast<double>(kRiskGridSteps);
}

RiskControlPredictor::RiskControlPredictor(NolCover cover, std::vector<double> mean_loss,
                                           std::size_t n, double alpha)
    : cover_(std::move(cover)), mean_loss_(std::move(mean_loss)), n_(n), alpha_(alpha) {
  check_alpha(alpha);
  if (n_ == 0) fail(ErrorCode::kInvalidArgument, "empty calibration set");
  if (mean_loss_.size() != kRiskGridSteps + 1) {
    fail(ErrorCode::kValidation, "risk curve must have " + std::to_string(kRiskGridSteps + 1) +
                                     " grid points");
  }
  for (std::size_t i = 0; i < mean_loss_.size(); ++i) {
    const double l = mean_loss_[i];
    if (!std::isfinite(l) || l < -1e-12 || l > 1.0 + 1e-12 ||
        (i > 0 && l > mean_loss_[i - 1] + 1e-12)) {
      fail(ErrorCode::kValidation, "risk curve must be non-increasing within [0, 1]");
    }
  }
}

std::size_t RiskControlPredictor::lambda_index(double alpha) const {
  check_alpha(alpha);
  const double n = static_cast<double>(n_);
  auto ok = [&](double loss) { return n / (n + 1.0) * loss + 1.0 / (n + 1.0) <= alpha; };
  // The predicate is monotone along a non-increasing curve.
  auto it = std::partition_point(mean_loss_.begin(), mean_loss_.end(),
                                 [&](double loss) { return !ok(loss); });
  if (it == mean_loss_.end()) return kRiskGridSteps;
  return static_cast<std::size_t>(it - mean_loss_.begin());
}

bool RiskControlPredictor::feasible(double alpha) const {
  const double n = static_cast<double>(n_);
  return n / (n + 1.0) * mean_loss_.back() + 1.0 / (n + 1.0) <= alpha;
}

NodeSet RiskControlPredictor::predict_at(const PropagatedScores& scores,
                                         std::size_t grid_index) const {
  const double tau = risk_grid_threshold(std::min(grid_index, kRiskGridSteps));
  NodeSet out(scores.size());
  for (NodeIndex v : cover_.member_list) {
    if (scores[v] >= tau) out.insert(v);
  }
  return out;
}

double recall_loss(const NolCover& cover, const NodeSet& predicted, const GroundTruth& truth) {
  std::size_t relevant = 0, hit = 0;
  for (NodeIndex v : cover.member_list) {
    if (!truth.ancestor_set.contains(v)) continue;
    ++relevant;
    if (predicted.contains(v)) ++hit;
  }
  if (relevant == 0) fail(ErrorCode::kInternal, "cover has no true member");
  return 1.0 - static_cast<double>(hit) / static_cast<double>(relevant);
}

RiskControlPredictor crc_recall_calibrate(const Taxonomy& t, const NolCover& cover,
                                          std::span<const CalibrationRecord> records,
                                          double alpha) {
  check_alpha(alpha);
  if (records.empty()) fail(ErrorCode::kInvalidArgument, "empty calibration set");
  // recall_delta[i]: recall gained by the records at the first grid index
  // where a true member enters the set.
  std::vector<double> recall_delta(kRiskGridSteps + 1, 0.0);
  for (const auto& r : records) {
    if (r.scores.size() != t.size()) {
      fail(ErrorCode::kInvalidArgument, "calibration record from a different taxonomy");
    }
    std::size_t relevant = 0;
    for (NodeIndex v : cover.member_list) relevant += r.truth.ancestor_set.contains(v) ? 1 : 0;
    if (relevant == 0) fail(ErrorCode::kInternal, "cover has no true member");
    const double weight = 1.0 / static_cast<double>(relevant);
    for (NodeIndex v : cover.member_list) {
      if (!r.truth.ancestor_set.contains(v)) continue;
      const double g = r.scores[v];
      const double guess = std::ceil(static_cast<double>(kRiskGridSteps) * (1.0 - g));
      std::size_t i = guess <= 0.0 ? 0
                      : guess >= static_cast<double>(kRiskGridSteps)
                          ? kRiskGridSteps
                          : static_cast<std::size_t>(guess);
      while (i > 0 && g >= risk_grid_threshold(i - 1)) --i;
      while (i < kRiskGridSteps && !(g >= risk_grid_threshold(i))) ++i;
      recall_delta[i] += weight;
    }
  }
  std::vector<double> mean_loss(kRiskGridSteps + 1);
  const double n = static_cast<double>(records.size());
  double recall_sum = 0.0;
  for (std::size_t i = 0; i <= kRiskGridSteps; ++i) {
    recall_sum += recall_delta[i];
    mean_loss[i] = std::clamp(1.0 - recall_sum / n, 0.0, 1.0);
  }
  return RiskControlPredictor(cover, std::move(mean_loss), records.size(), alpha);
}

RiskControlFamily::RiskControlFamily(CoverSpace space, std::vector<RiskControlPredictor> predictors)
    : space_(std::move(space)), predictors_(std::move(predictors)) {
  if (predictors_.size() != space_.size() || predictors_.empty()) {
    fail(ErrorCode::kInternal, "risk-control predictor count does not match the cover space");
  }
  (void)space_.all_leaves_id();
}

void RiskControlFamily::check_taxonomy(const Taxonomy& t) const {
  if (t.fingerprint() != space_.taxonomy_fingerprint()) {
    fail(ErrorCode::kHashMismatch, "risk-control family was calibrated on a different taxonomy");
  }
}

RiskControlFamily calibrate_risk_family(const Taxonomy& t, const CoverSpace& space,
                                        std::span<const CalibrationRecord> records,
                                        unsigned threads) {
  if (space.size() == 0) fail(ErrorCode::kInvalidArgument, "cover space is empty");
  std::vector<std::optional<RiskControlPredictor>> slots(space.size());
  detail::parallel_for(space.size(), threads, [&](std::size_t i) {
    slots[i].emplace(crc_recall_calibrate(t, space[i], records, 0.1));
  });
  std::vector<RiskControlPredictor> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return RiskControlFamily(space, std::move(out));
}

CandidatePool hcc_crc_candidates(const RiskControlFamily& fam, const Taxonomy& t,
                                 const PropagatedScores& scores, double alpha) {
  fam.check_taxonomy(t);
  return collect_candidates(
      fam.space(), t,
      [&](std::size_t id, double a) { return fam.predictor(id).predict(scores, a); }, alpha,
      PipelineVariant{});
}

HccPrediction hcc_crc_predict(const RiskControlFamily& fam, const Taxonomy& t,
                              const PropagatedScores& scores, double alpha, const CostParams& cp) {
  return select_prediction(t, hcc_crc_candidates(fam, t, scores, alpha), cp);
}

const char* method_name(Method m) {
  switch (m) {
    case Method::kStandard:
      return "standard";
    case Method::kLca:
      return "lca";
    case Method::kHcc:
      return "hcc";
    case Method::kHccNoPrune:
      return "hcc-no-prune";
    case Method::kHccNoCorrection:
      return "hcc-no-correction";
    case Method::kHccCrc:
      return "hcc-crc";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (Method m : all_methods()) {
    if (name == method_name(m)) return m;
  }
  fail(ErrorCode::kInvalidArgument,
       "unknown method '" + std::string(name) +
           "' (expected standard, lca, hcc, hcc-no-prune, hcc-no-correction or hcc-crc)");
}

std::vector<Method> all_methods() {
  return {Method::kStandard,   Method::kLca,           Method::kHcc,
          Method::kHccNoPrune, Method::kHccNoCorrection, Method::kHccCrc};
}

HccPrediction predict_method(Method method, const PredictorFamily& fam,
                             const RiskControlFamily* risk, const Taxonomy& t,
                             const PropagatedScores& scores, double alpha, const CostParams& cp,
                             const InferenceOptions& opts) {
  fam.check_taxonomy(t);
  auto baseline = [&](NodeSet selected) {
    HccPrediction p;
    p.covered_leaves = t.leaf_cover(selected);
    p.cost = set_cost(t, selected, cp);
    p.selected = std::move(selected);
    p.alpha_corrected = alpha;
    p.candidates_evaluated = 1;
    p.pruned = 0;
    return p;
  };
  switch (method) {
    case Method::kStandard: {
      auto p = baseline(standard_cp_predict(fam, scores, alpha, opts.pad_empty));
      p.selected_cover_id = fam.leaf_predictor_id();
      return p;
    }
    case Method::kLca:
      return baseline(lca_baseline_predict(t, standard_cp_predict(fam, scores, alpha), scores));
    case Method::kHcc:
      return select_prediction(t, hcc_candidates(fam, t, scores, alpha, {}, opts), cp);
    case Method::kHccNoPrune:
      return hcc_no_pruning_predict(fam, t, scores, alpha, cp, opts);
    case Method::kHccNoCorrection:
      return hcc_no_correction_predict(fam, t, scores, alpha, cp, opts);
    case Method::kHccCrc:
      if (risk == nullptr) {
        fail(ErrorCode::kInvalidArgument,
             "method hcc-crc needs risk-control calibration (calibrate with --with-crc)");
      }
      return hcc_crc_predict(*risk, t, scores, alpha, cp);
  }
  fail(ErrorCode::kInvalidArgument, "unknown method");
}

}  // namespace hcc
