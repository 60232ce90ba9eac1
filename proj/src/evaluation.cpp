#include "hcc/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "parallel.hpp"

namespace hcc {

Summary summarize(std::span<const double> values) {
  Summary s;
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.sd = std::sqrt(ss / n);
  return s;
}

double default_beta(const Taxonomy& t) {
  std::vector<double> sizes;
  for (NodeIndex v = 0; v < t.size(); ++v) {
    if (!t.is_leaf(v)) sizes.push_back(static_cast<double>(t.leaf_cover(v).count()));
  }
  if (sizes.empty()) {
    fail(ErrorCode::kInvalidArgument, "default beta needs at least one internal node");
  }
  std::sort(sizes.begin(), sizes.end());
  const std::size_t m = sizes.size();
  const double median = m % 2 == 1 ? sizes[m / 2] : 0.5 * (sizes[m / 2 - 1] + sizes[m / 2]);
  return 1.0 / median;
}

int coverage_indicator(const Taxonomy& t, const NodeSet& prediction, NodeIndex truth_leaf) {
  if (!t.is_leaf(truth_leaf)) {
    fail(ErrorCode::kInvalidArgument, "'" + t.name(truth_leaf) + "' is not a leaf");
  }
  return t.leaf_cover(prediction).contains(truth_leaf) ? 1 : 0;
}

Metrics evaluate_run(const Taxonomy& t, std::span<const NodeSet> predictions,
                     std::span<const NodeIndex> truths, double beta) {
  if (predictions.size() != truths.size()) {
    fail(ErrorCode::kInvalidArgument, "predictions and truths differ in length");
  }
  const CostParams cp{beta};
  check_cost_params(cp);
  const std::size_t n = predictions.size();
  std::vector<double> cov(n), cost(n), size(n), leaves(n);
  for (std::size_t i = 0; i < n; ++i) {
    const NodeSet covered = t.leaf_cover(predictions[i]);
    cov[i] = coverage_indicator(t, predictions[i], truths[i]);
    size[i] = static_cast<double>(predictions[i].count());
    leaves[i] = static_cast<double>(covered.count());
    cost[i] = size[i] + beta * leaves[i];
  }
  Metrics m;
  m.coverage = summarize(cov);
  m.cost = summarize(cost);
  m.ps_size = summarize(size);
  m.covered_leaves = summarize(leaves);
  m.n_test = n;
  return m;
}

std::vector<std::size_t> split_permutation(std::size_t n, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    fail(ErrorCode::kInvalidArgument, "split ratio must lie in (0, 1)");
  }
  const std::size_t n_cal = static_cast<std::size_t>(static_cast<double>(n) * ratio);
  if (n_cal == 0 || n_cal == n) {
    fail(ErrorCode::kValidation, "cannot split " + std::to_string(n) +
                                     " records at ratio " + std::to_string(ratio) +
                                     " into two nonempty sides");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

std::vector<HccPrediction> predict_batch(Method method, const PredictorFamily& fam,
                                         const RiskControlFamily* risk, const Taxonomy& t,
                                         std::span<const CalibrationRecord> records,
                                         double alpha, const CostParams& cp,
                                         const InferenceOptions& opts, unsigned threads) {
  check_alpha(alpha);
  check_cost_params(cp);
  std::vector<HccPrediction> out(records.size());
  detail::parallel_for(records.size(), threads, [&](std::size_t i) {
    out[i] = predict_method(method, fam, risk, t, records[i].scores, alpha, cp, opts);
  });
  return out;
}

std::vector<HccPrediction> predict_batch(Method method, const PredictorFamily& fam,
                                         const RiskControlFamily* risk, const Taxonomy& t,
                                         std::span<const PropagatedScores> scores, double alpha,
                                         const CostParams& cp, const InferenceOptions& opts,
                                         unsigned threads) {
  check_alpha(alpha);
  check_cost_params(cp);
  std::vector<HccPrediction> out(scores.size());
  detail::parallel_for(scores.size(), threads, [&](std::size_t i) {
    out[i] = predict_method(method, fam, risk, t, scores[i], alpha, cp, opts);
  });
  return out;
}

Metrics evaluate_predictions(const Taxonomy& t, std::span<const HccPrediction> predictions,
                             std::span<const CalibrationRecord> records, double beta) {
  std::vector<NodeSet> sets;
  std::vector<NodeIndex> truths;
  sets.reserve(predictions.size());
  truths.reserve(records.size());
  for (const auto& p : predictions) sets.push_back(p.selected);
  for (const auto& r : records) truths.push_back(r.truth.true_leaf);
  return evaluate_run(t, sets, truths, beta);
}

std::vector<SweepRow> sweep_beta(const PredictorFamily& fam, const Taxonomy& t,
                                 std::span<const CalibrationRecord> test_records, double alpha,
                                 std::span<const double> betas, Method method,
                                 const RiskControlFamily* risk, const InferenceOptions& opts,
                                 unsigned threads) {
  if (betas.empty()) fail(ErrorCode::kInvalidArgument, "beta sweep needs at least one beta");
  for (double b : betas) check_cost_params(CostParams{b});
  check_alpha(alpha);
  fam.check_taxonomy(t);
  if (method == Method::kStandard || method == Method::kLca) {
    fail(ErrorCode::kInvalidArgument,
         std::string("beta sweep is defined for HCC variants, not ") + method_name(method));
  }
  if (method == Method::kHccCrc && risk == nullptr) {
    fail(ErrorCode::kInvalidArgument, "hcc-crc sweep needs risk control");
  }

  std::vector<CandidatePool> pools(test_records.size());
  detail::parallel_for(test_records.size(), threads, [&](std::size_t i) {
    const auto& ps = test_records[i].scores;
    switch (method) {
      case Method::kHcc:
        pools[i] = hcc_candidates(fam, t, ps, alpha, {}, opts);
        break;
      case Method::kHccNoPrune:
        pools[i] = hcc_candidates(fam, t, ps, alpha, PipelineVariant{false, true}, opts);
        break;
      case Method::kHccNoCorrection:
        pools[i] = hcc_candidates(fam, t, ps, alpha, PipelineVariant{true, false}, opts);
        break;
      case Method::kHccCrc:
        pools[i] = hcc_crc_candidates(*risk, t, ps, alpha);
        break;
      default:
        break;
    }
  });

  std::vector<SweepRow> rows;
  for (double beta : betas) {
    std::vector<HccPrediction> preds;
    preds.reserve(pools.size());
    for (const auto& pool : pools) preds.push_back(select_prediction(t, pool, CostParams{beta}));
    SweepRow row;
    row.beta = beta;
    row.metrics = evaluate_predictions(t, preds, test_records, beta);
    row.mean_ps_size = row.metrics.ps_size.mean;
    row.mean_covered_leaves = row.metrics.covered_leaves.mean;
    rows.push_back(row);
  }
  return rows;
}

std::vector<LabeledScores> synth_generate(const Taxonomy& t, const SynthConfig& cfg) {
  if (cfg.n == 0) fail(ErrorCode::kInvalidArgument, "synthetic instance count must be >= 1");
  if (!(cfg.signal >= 0.0) || !(cfg.noise >= 0.0) || !std::isfinite(cfg.signal) ||
      !std::isfinite(cfg.noise)) {
    fail(ErrorCode::kInvalidArgument, "signal and noise must be finite and nonnegative");
  }
  const std::size_t k = t.leaf_count();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<std::size_t> pick(0, k - 1);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<LabeledScores> out;
  out.reserve(cfg.n);
  std::vector<double> logits(k);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    const std::size_t truth = pick(rng);
    for (std::size_t j = 0; j < k; ++j) {
      logits[j] = cfg.noise * gauss(rng) + (j == truth ? cfg.signal : 0.0);
    }
    const double top = *std::max_element(logits.begin(), logits.end());
    LabeledScores row;
    row.scores.instance_id = "synth-" + std::to_string(i);
    row.scores.values.resize(k);
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      row.scores.values[j] = std::exp(logits[j] - top);
      sum += row.scores.values[j];
    }
    for (double& v : row.scores.values) v /= sum;
    row.truth = t.leaf_order()[truth];
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<CalibrationRecord> to_records(const Taxonomy& t, std::span<const LabeledScores> data) {
  std::vector<CalibrationRecord> out;
  out.reserve(data.size());
  for (const auto& d : data) out.push_back(make_record(t, d.scores, d.truth));
  return out;
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail(ErrorCode::kInvalidArgument, "spearman needs equal lengths");
  if (x.size() < 2) return 0.0;
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const Summary sx = summarize(rx), sy = summarize(ry);
  if (sx.sd == 0.0 || sy.sd == 0.0) return 0.0;
  double cov = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) cov += (rx[i] - sx.mean) * (ry[i] - sy.mean);
  cov /= static_cast<double>(rx.size());
  return cov / (sx.sd * sy.sd);
}

}  // namespace hcc
