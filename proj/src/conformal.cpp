#include "hcc/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "hcc/error.hpp"
#include "parallel.hpp"

namespace hcc {
namespace {

constexpr double kScoreTolerance = 1e-6;

// Shared by the indicator and ground-truth routes of the conformity score.
template <class IsTrue>
std::optional<double> best_true_score(const PropagatedScores& scores, const NolCover& cover,
                                      IsTrue&& is_true) {
  std::optional<double> best;
  for (std::size_t j = 0; j < cover.member_list.size(); ++j) {
    if (!is_true(j)) continue;
    const double g = scores[cover.member_list[j]];
    // Strict comparison keeps the lowest node index on ties.
    if (!best || g > *best) best = g;
  }
  return best;
}

}  // namespace

CalibrationRecord make_record(const Taxonomy& t, const LeafScores& scores, NodeIndex true_leaf,
                              SimplexPolicy policy) {
  return CalibrationRecord{propagate_scores(t, scores, policy),
                           propagated_label_set(t, true_leaf)};
}

void check_alpha(double alpha) {
  if (!std::isfinite(alpha) || alpha < 0.0 || alpha >= 1.0) {
    fail(ErrorCode::kInvalidArgument,
         "alpha must lie in [0, 1), got " + std::to_string(alpha));
  }
}

std::size_t quantile_rank(std::size_t n, double alpha) {
  check_alpha(alpha);
  const double target = static_cast<double>(n + 1) * (1.0 - alpha);
  return static_cast<std::size_t>(std::ceil(target - 1e-9));
}

double conformity_score(const PropagatedScores& scores, std::span<const std::uint8_t> indicator,
                        const NolCover& cover) {
  if (indicator.size() != cover.member_list.size()) {
    fail(ErrorCode::kInvalidArgument, "indicator length does not match the cover size");
  }
  auto best = best_true_score(scores, cover, [&](std::size_t j) { return indicator[j] != 0; });
  if (!best) fail(ErrorCode::kInvalidArgument, "label indicator has no set bit");
  return *best;
}

CoverPredictor::CoverPredictor(NolCover cover, std::vector<double> conformity)
    : cover_(std::move(cover)), sorted_(std::move(conformity)) {
  if (sorted_.empty()) fail(ErrorCode::kInvalidArgument, "empty calibration set");
  for (double s : sorted_) {
    if (!std::isfinite(s) || s < -kScoreTolerance || s > 1.0 + kScoreTolerance) {
      fail(ErrorCode::kValidation,
           "conformity score " + std::to_string(s) + " outside [0, 1]");
    }
  }
  std::sort(sorted_.begin(), sorted_.end());
}

double CoverPredictor::nonconformity_quantile(double alpha) const {
  return 1.0 - threshold_at(alpha);
}

double CoverPredictor::threshold_at(double alpha) const {
  const std::size_t n = sorted_.size();
  const std::size_t k = quantile_rank(n, alpha);
  if (k > n) return 0.0;
  // k-th smallest nonconformity == (n - k + 1)-th smallest conformity.
  // k == 0 only happens for n == 0, which the constructor rejects.
  return sorted_[n - k];
}

NodeSet CoverPredictor::predict(const PropagatedScores& scores, double alpha,
                                bool pad_empty) const {
  const double tau = threshold_at(alpha);
  NodeSet out(scores.size());
  for (NodeIndex v : cover_.member_list) {
    if (scores[v] >= tau) out.insert(v);
  }
  if (out.empty() && pad_empty && !cover_.member_list.empty()) {
    NodeIndex best = cover_.member_list.front();
    for (NodeIndex v : cover_.member_list) {
      if (scores[v] > scores[best]) best = v;
    }
    out.insert(best);
  }
  return out;
}

CoverPredictor calibrate_cover(const Taxonomy& t, const NolCover& cover,
                               std::span<const CalibrationRecord> records) {
  if (records.empty()) fail(ErrorCode::kInvalidArgument, "empty calibration set");
  std::vector<double> conformity;
  conformity.reserve(records.size());
  for (const auto& r : records) {
    if (r.scores.size() != t.size() || r.truth.ancestor_set.universe() != t.size()) {
      fail(ErrorCode::kInvalidArgument, "calibration record from a different taxonomy");
    }
    auto best = best_true_score(r.scores, cover, [&](std::size_t j) {
      return r.truth.ancestor_set.contains(cover.member_list[j]);
    });
    if (!best) {
      fail(ErrorCode::kInternal, "cover " + std::to_string(cover.id) +
                                     " has no true member for leaf '" +
                                     t.name(r.truth.true_leaf) + "'");
    }
    conformity.push_back(*best);
  }
  return CoverPredictor(cover, std::move(conformity));
}

PredictorFamily::PredictorFamily(CoverSpace space, std::vector<CoverPredictor> predictors)
    : space_(std::move(space)), predictors_(std::move(predictors)) {
  if (predictors_.empty()) fail(ErrorCode::kInvalidArgument, "predictor family has no covers");
  if (predictors_.size() != space_.size()) {
    fail(ErrorCode::kInternal, "predictor count does not match the cover space");
  }
  const std::size_t n = predictors_.front().calibration_size();
  for (std::size_t i = 0; i < predictors_.size(); ++i) {
    if (predictors_[i].cover().id != i) fail(ErrorCode::kInternal, "predictors out of order");
    if (predictors_[i].calibration_size() != n) {
      fail(ErrorCode::kValidation, "predictors calibrated on different record counts");
    }
  }
  (void)space_.all_leaves_id();
}

std::size_t PredictorFamily::calibration_size() const {
  return predictors_.front().calibration_size();
}

void PredictorFamily::check_taxonomy(const Taxonomy& t) const {
  if (t.fingerprint() != taxonomy_fingerprint()) {
    fail(ErrorCode::kHashMismatch, "predictor family was calibrated on a different taxonomy");
  }
}

PredictorFamily calibrate_family(const Taxonomy& t, const CoverSpace& space,
                                 std::span<const CalibrationRecord> records, unsigned threads) {
  if (space.size() == 0) fail(ErrorCode::kInvalidArgument, "cover space is empty");
  if (records.empty()) fail(ErrorCode::kInvalidArgument, "empty calibration set");
  if (space.taxonomy_fingerprint() != t.fingerprint()) {
    fail(ErrorCode::kHashMismatch, "cover space belongs to a different taxonomy");
  }
  std::vector<std::optional<CoverPredictor>> slots(space.size());
  detail::parallel_for(space.size(), threads, [&](std::size_t i) {
    slots[i].emplace(calibrate_cover(t, space[i], records));
  });
  std::vector<CoverPredictor> predictors;
  predictors.reserve(slots.size());
  for (auto& s : slots) predictors.push_back(std::move(*s));
  return PredictorFamily(space, std::move(predictors));
}

}  // namespace hcc
