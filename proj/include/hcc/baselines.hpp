#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hcc/conformal.hpp"
#include "hcc/inference.hpp"

namespace hcc {

NodeSet standard_cp_predict(const PredictorFamily& fam, const PropagatedScores& scores,
                            double alpha, bool pad_empty = false);

/// lca_set(leaf_set). An empty leaf set yields the top-scoring leaf.
NodeSet lca_baseline_predict(const Taxonomy& t, const NodeSet& leaf_set,
                             const PropagatedScores& scores);

HccPrediction hcc_no_pruning_predict(const PredictorFamily& fam, const Taxonomy& t,
                                     const PropagatedScores& scores, double alpha,
                                     const CostParams& cp, const InferenceOptions& opts = {});

HccPrediction hcc_no_correction_predict(const PredictorFamily& fam, const Taxonomy& t,
                                        const PropagatedScores& scores, double alpha,
                                        const CostParams& cp, const InferenceOptions& opts = {});

inline constexpr std::size_t kRiskGridSteps = 1000;  // grid of kRiskGridSteps + 1 points on [0, 1]

/// Grid value lambda_i = i / kRiskGridSteps, and its score threshold 1 - lambda_i.
double risk_grid_lambda(std::size_t i);
double risk_grid_threshold(std::size_t i);

/// Conformal risk control with loss 1 - recall over the true members of a
/// cover. The set at lambda is {v : g(v) >= 1 - lambda}; the loss is
/// non-increasing in lambda. The mean calibration loss is kept for every
/// grid point so lambda_hat can be derived for any alpha.
class RiskControlPredictor {
 public:
  RiskControlPredictor(NolCover cover, std::vector<double> mean_loss, std::size_t n,
                       double alpha);

  const NolCover& cover() const { return cover_; }
  std::span<const double> mean_loss() const { return mean_loss_; }
  std::size_t calibration_size() const { return n_; }

  double alpha() const { return alpha_; }
  double lambda_hat() const { return risk_grid_lambda(lambda_index(alpha_)); }
  bool feasible() const { return feasible(alpha_); }

  /// Smallest grid index whose adjusted risk n/(n+1) R + 1/(n+1) <= alpha;
  /// the last index (lambda = 1) when none qualifies.
  std::size_t lambda_index(double alpha) const;
  bool feasible(double alpha) const;

  NodeSet predict_at(const PropagatedScores& scores, std::size_t grid_index) const;
  NodeSet predict(const PropagatedScores& scores, double alpha) const {
    return predict_at(scores, lambda_index(alpha));
  }

 private:
  NolCover cover_;
  std::vector<double> mean_loss_;
  std::size_t n_ = 0;
  double alpha_ = 0.1;
};

/// 1 - |C cap truth| / |truth| over the cover members.
double recall_loss(const NolCover& cover, const NodeSet& predicted, const GroundTruth& truth);

RiskControlPredictor crc_recall_calibrate(const Taxonomy& t, const NolCover& cover,
                                          std::span<const CalibrationRecord> records,
                                          double alpha);

inline NodeSet crc_recall_predict(const RiskControlPredictor& p, const PropagatedScores& scores) {
  return p.predict(scores, p.alpha());
}

class RiskControlFamily {
 public:
  RiskControlFamily(CoverSpace space, std::vector<RiskControlPredictor> predictors);

  const CoverSpace& space() const { return space_; }
  const std::vector<RiskControlPredictor>& predictors() const { return predictors_; }
  const RiskControlPredictor& predictor(std::size_t id) const { return predictors_.at(id); }
  void check_taxonomy(const Taxonomy& t) const;

 private:
  CoverSpace space_;
  std::vector<RiskControlPredictor> predictors_;
};

RiskControlFamily calibrate_risk_family(const Taxonomy& t, const CoverSpace& space,
                                        std::span<const CalibrationRecord> records,
                                        unsigned threads = 1);

/// HCC pipeline with risk-controlled per-cover sets: the probe, dynamic
/// pruning and Bonferroni correction all run on the CRC predictors.
CandidatePool hcc_crc_candidates(const RiskControlFamily& fam, const Taxonomy& t,
                                 const PropagatedScores& scores, double alpha);

HccPrediction hcc_crc_predict(const RiskControlFamily& fam, const Taxonomy& t,
                              const PropagatedScores& scores, double alpha, const CostParams& cp);

enum class Method { kStandard, kLca, kHcc, kHccNoPrune, kHccNoCorrection, kHccCrc };

const char* method_name(Method m);
// Throws kInvalidArgument on unknown names.
Method parse_method(std::string_view name);
std::vector<Method> all_methods();

/// Dispatches one instance to the given method. Baselines report m = 1 and
/// alpha' = alpha. kHccCrc requires `risk`.
HccPrediction predict_method(Method method, const PredictorFamily& fam,
                             const RiskControlFamily* risk, const Taxonomy& t,
                             const PropagatedScores& scores, double alpha, const CostParams& cp,
                             const InferenceOptions& opts = {});

}  // namespace hcc
