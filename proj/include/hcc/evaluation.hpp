#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "hcc/baselines.hpp"
#include "hcc/conformal.hpp"
#include "hcc/error.hpp"
#include "hcc/inference.hpp"

namespace hcc {

struct Summary {
  double mean = 0.0;
  double sd = 0.0;  // population standard deviation
};

Summary summarize(std::span<const double> values);

struct Metrics {
  Summary coverage;
  Summary cost;
  Summary ps_size;
  Summary covered_leaves;
  std::size_t n_test = 0;
};

/// Inverse median leaf-cover size over the internal nodes (root included).
/// Even counts use the mean of the two central values.
double default_beta(const Taxonomy& t);

int coverage_indicator(const Taxonomy& t, const NodeSet& prediction, NodeIndex truth_leaf);

Metrics evaluate_run(const Taxonomy& t, std::span<const NodeSet> predictions,
                     std::span<const NodeIndex> truths, double beta);

/// Seeded permutation used by split_data; the first floor(n * ratio)
/// positions form the calibration side.
std::vector<std::size_t> split_permutation(std::size_t n, double ratio, std::uint64_t seed);

template <class T>
std::pair<std::vector<T>, std::vector<T>> split_data(const std::vector<T>& records, double ratio,
                                                     std::uint64_t seed) {
  const auto order = split_permutation(records.size(), ratio, seed);
  const std::size_t n_cal =
      static_cast<std::size_t>(static_cast<double>(records.size()) * ratio);
  std::pair<std::vector<T>, std::vector<T>> out;
  out.first.reserve(n_cal);
  out.second.reserve(records.size() - n_cal);
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_cal ? out.first : out.second).push_back(records[order[i]]);
  }
  return out;
}

/// Runs `method` on every record (data-parallel; output order matches input).
std::vector<HccPrediction> predict_batch(Method method, const PredictorFamily& fam,
                                         const RiskControlFamily* risk, const Taxonomy& t,
                                         std::span<const CalibrationRecord> records,
                                         double alpha, const CostParams& cp,
                                         const InferenceOptions& opts = {}, unsigned threads = 1);
std::vector<HccPrediction> predict_batch(Method method, const PredictorFamily& fam,
                                         const RiskControlFamily* risk, const Taxonomy& t,
                                         std::span<const PropagatedScores> scores, double alpha,
                                         const CostParams& cp, const InferenceOptions& opts = {},
                                         unsigned threads = 1);

Metrics evaluate_predictions(const Taxonomy& t, std::span<const HccPrediction> predictions,
                             std::span<const CalibrationRecord> records, double beta);

struct SweepRow {
  double beta = 0.0;
  double mean_ps_size = 0.0;
  double mean_covered_leaves = 0.0;
  Metrics metrics;
};

/// Re-selects among fixed per-instance candidates for every beta.
/// `method` must be one of the HCC variants.
std::vector<SweepRow> sweep_beta(const PredictorFamily& fam, const Taxonomy& t,
                                 std::span<const CalibrationRecord> test_records, double alpha,
                                 std::span<const double> betas, Method method = Method::kHcc,
                                 const RiskControlFamily* risk = nullptr,
                                 const InferenceOptions& opts = {}, unsigned threads = 1);

struct SynthConfig {
  std::size_t n = 1000;
  double signal = 2.0;
  double noise = 1.0;
  std::uint64_t seed = 0;
};

struct LabeledScores {
  LeafScores scores;
  NodeIndex truth = 0;
};

/// Uniform truth leaf; scores = softmax(signal * onehot(truth) + noise * N(0, I)).
std::vector<LabeledScores> synth_generate(const Taxonomy& t, const SynthConfig& cfg);

std::vector<CalibrationRecord> to_records(const Taxonomy& t, std::span<const LabeledScores> data);

/// Spearman rank correlation with average ranks for ties; 0 when either
/// side is constant.
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace hcc
