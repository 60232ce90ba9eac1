#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hcc/covers.hpp"
#include "hcc/propagation.hpp"
#include "hcc/taxonomy.hpp"

namespace hcc {

struct CalibrationRecord {
  PropagatedScores scores;
  GroundTruth truth;
};

CalibrationRecord make_record(const Taxonomy& t, const LeafScores& scores, NodeIndex true_leaf,
                              SimplexPolicy policy = SimplexPolicy::kReject);

// Throws kInvalidArgument unless alpha is finite and in [0, 1).
void check_alpha(double alpha);

/// ceil((n + 1) * (1 - alpha)), guarded against round-up when the product is
/// an integer up to floating-point noise. May exceed n.
std::size_t quantile_rank(std::size_t n, double alpha);

/// Propagated score of the highest-scoring true member of `cover`.
/// Ties resolve to the lowest node index. Throws kInvalidArgument if no
/// indicator bit is set.
double conformity_score(const PropagatedScores& scores, std::span<const std::uint8_t> indicator,
                        const NolCover& cover);

/// Split-conformal predictor for one NOL-cover.
///
/// Holds the sorted calibration conformity scores only; thresholds are
/// derived per query so Bonferroni-corrected levels need no recalibration.
/// With nonconformity r = 1 - s and k = quantile_rank(n, alpha), the
/// nonconformity quantile is the k-th smallest r (1 when k > n) and a
/// member v is predicted iff g(v) >= 1 - q. The threshold is read straight
/// from the (n - k + 1)-th smallest conformity score so no rounding enters
/// through 1 - (1 - s).
class CoverPredictor {
 public:
  CoverPredictor(NolCover cover, std::vector<double> conformity);

  const NolCover& cover() const { return cover_; }
  std::span<const double> sorted_conformity() const { return sorted_; }
  std::size_t calibration_size() const { return sorted_.size(); }

  double nonconformity_quantile(double alpha) const;
  double threshold_at(double alpha) const;

  /// Cover members with propagated score >= threshold_at(alpha). When
  /// pad_empty is set an empty result is replaced by the top-scoring member.
  NodeSet predict(const PropagatedScores& scores, double alpha, bool pad_empty = false) const;

 private:
  NolCover cover_;
  std::vector<double> sorted_;
};

CoverPredictor calibrate_cover(const Taxonomy& t, const NolCover& cover,
                               std::span<const CalibrationRecord> records);

inline NodeSet predict_cover(const CoverPredictor& p, const PropagatedScores& scores,
                             double alpha, bool pad_empty = false) {
  return p.predict(scores, alpha, pad_empty);
}

/// One calibrated predictor per cover of a CoverSpace.
class PredictorFamily {
 public:
  PredictorFamily(CoverSpace space, std::vector<CoverPredictor> predictors);

  const CoverSpace& space() const { return space_; }
  const std::vector<CoverPredictor>& predictors() const { return predictors_; }
  const CoverPredictor& predictor(std::size_t cover_id) const { return predictors_.at(cover_id); }
  std::size_t size() const { return predictors_.size(); }
  std::size_t leaf_predictor_id() const { return space_.all_leaves_id(); }
  const CoverPredictor& leaf_predictor() const { return predictor(leaf_predictor_id()); }
  std::size_t calibration_size() const;
  std::uint64_t taxonomy_fingerprint() const { return space_.taxonomy_fingerprint(); }

  // Throws kHashMismatch when calibrated against a different taxonomy.
  void check_taxonomy(const Taxonomy& t) const;

 private:
  CoverSpace space_;
  std::vector<CoverPredictor> predictors_;
};

/// Calibrates every cover of `space` on the same records; covers are
/// independent and are split across `threads` workers.
PredictorFamily calibrate_family(const Taxonomy& t, const CoverSpace& space,
                                 std::span<const CalibrationRecord> records,
                                 unsigned threads = 1);

}  // namespace hcc
