// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hcc/baselines.hpp"
#include "hcc/covers.hpp"
#include "hcc/evaluation.hpp"
#include "hcc/io.hpp"
#include "support.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Check {
  bool ok = true;
  std::string detail;

  void expect(bool cond, const std::string& what) {
    if (!cond && ok) detail = what;
    ok = ok && cond;
  }
};

int failures = 0;

void report(int id, const char* name, const Check& c, const std::string& info) {
  std::printf("%s %d %s: %s\n", c.ok ? "PASS" : "FAIL", id, name,
              c.ok ? info.c_str() : c.detail.c_str());
  std::fflush(stdout);
  if (!c.ok) ++failures;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// Mean and standard error over seeds.
struct SeedStats {
  double mean = 0.0;
  double se = 0.0;
};

SeedStats seed_stats(const std::vector<double>& v) {
  const auto s = hcc::summarize(v);
  return {s.mean, s.sd / std::sqrt(static_cast<double>(v.size()))};
}

void criterion_1() {
  Check c;
  const auto start = Clock::now();
  std::mt19937_64 rng(20240611);
  for (int trial = 0; trial < 100; ++trial) {
    const auto t = testing::random_dag(rng, 16).build();
    const auto fast = testing::member_lists(hcc::enumerate_nol_covers(t, std::nullopt));
    const auto slow = testing::member_lists(hcc::brute_force_nol_covers(t));
    c.expect(fast == slow, "random DAG " + std::to_string(trial) + " differs from brute force");
  }
  const std::size_t counts[] = {1, 2, 5, 26};
  for (std::size_t d = 0; d <= 3; ++d) {
    const auto t = testing::perfect_binary_tree(d).build();
    const auto s = hcc::enumerate_nol_covers(t);
    c.expect(testing::member_lists(s) == testing::member_lists(hcc::brute_force_nol_covers(t)),
             "binary tree depth " + std::to_string(d) + " differs from brute force");
    c.expect(s.size() == counts[d], "binary tree depth " + std::to_string(d) + " has " +
                                        std::to_string(s.size()) + " covers");
  }
  const double secs = seconds_since(start);
  c.expect(secs < 10.0, fmt("took %.2f s", secs));
  report(1, "cover enumeration oracle", c,
         fmt("100 random DAGs and binary trees d=0..3 match; counts 1,2,5,26; %.2f s", secs));
}

void criterion_2() {
  Check c;
  const auto t = testing::dish();
  const auto s = hcc::enumerate_nol_covers(t);
  c.expect(s.size() == 11, "got " + std::to_string(s.size()) + " covers");
  const auto lc = t.names_of(t.leaf_cover(t.make_set({"breakfast", "sandwich"})));
  const std::vector<std::string> want{"omelette", "pancakes", "cheese sandwich", "ham sandwich",
                                      "tuna sandwich"};
  c.expect(lc == want, "leaf_cover({breakfast, sandwich}) mismatch");
  const auto lca = t.names_of(t.lca_set(t.make_set({"Caesar salad", "cheese sandwich"})));
  c.expect(lca == std::vector<std::string>{"lunch"}, "LCA({Caesar salad, cheese sandwich}) mismatch");
  report(2, "running example", c, "11 covers; leaf cover and LCA as stated");
}

// Coverage of every cover predictor and of end-to-end HCC, per seed.
void criterion_3() {
  Check c;
  const auto start = Clock::now();
  const double alphas[] = {.05, .1, .2};
  constexpr int kSeeds = 50;
  constexpr std::size_t kN = 2000;
  double worst_margin = 1.0;
  std::size_t checks = 0;
  for (const auto& t : {testing::dish(), testing::diamond()}) {
    const auto space = hcc::enumerate_nol_covers(t);
    const hcc::CostParams cp{hcc::default_beta(t)};
    // cov[alpha][cover or HCC][seed]
    std::vector<std::vector<std::vector<double>>> cov(
        3, std::vector<std::vector<double>>(space.size() + 1));
    for (int seed = 0; seed < kSeeds; ++seed) {
      const auto cal = testing::synth_records(t, kN, 1000 + 2 * seed);
      const auto test = testing::synth_records(t, kN, 1001 + 2 * seed);
      const auto fam = hcc::calibrate_family(t, space, cal, 4);
      for (int a = 0; a < 3; ++a) {
        for (std::size_t id = 0; id < space.size(); ++id) {
          std::size_t hit = 0;
          for (const auto& r : test) {
            hit += hcc::coverage_indicator(t, fam.predictor(id).predict(r.scores, alphas[a]),
                                           r.truth.true_leaf);
          }
          cov[a][id].push_back(static_cast<double>(hit) / kN);
        }
        const auto preds =
            hcc::predict_batch(hcc::Method::kHcc, fam, nullptr, t, test, alphas[a], cp, {}, 4);
        cov[a][space.size()].push_back(hcc::evaluate_predictions(t, preds, test, cp.beta).coverage.mean);
      }
    }
    for (int a = 0; a < 3; ++a) {
      for (std::size_t k = 0; k <= space.size(); ++k) {
        const auto st = seed_stats(cov[a][k]);
        const double bound = 1 - alphas[a] - 2 * st.se;
        worst_margin = std::min(worst_margin, st.mean - bound);
        ++checks;
        c.expect(st.mean >= bound,
                 fmt("alpha %.2f: mean coverage %.4f below %.4f", alphas[a], st.mean, bound) +
                     (k == space.size() ? " (HCC)" : " (cover " + std::to_string(k) + ")"));
      }
    }
  }
  const double secs = seconds_since(start);
  c.expect(secs < 120.0, fmt("took %.1f s", secs));
  report(3, "hierarchical coverage", c,
         std::to_string(checks) + fmt(" predictor/alpha pairs; min margin %.4f; %.1f s", worst_margin, secs));
}

void criterion_4() {
  Check c;
  const auto t = testing::dish();
  const auto s = hcc::enumerate_nol_covers(t);
  const auto& leaves = s[s.all_leaves_id()];
  const auto leaf = leaves.member_list.front();
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> grid(0, 50);
  std::uniform_int_distribution<std::size_t> size(1, 40);
  std::uniform_int_distribution<int> level(1, 999);
  std::size_t included_count = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = size(rng);
    std::vector<int> cal(n);
    for (auto& v : cal) v = grid(rng);
    const int test = grid(rng);
    const int a = level(rng);
    std::vector<double> conformity;
    for (int v : cal) conformity.push_back(v / 50.0);
    const hcc::CoverPredictor p(leaves, conformity);
    hcc::PropagatedScores g;
    g.values.assign(t.size(), 0.0);
    g.values[leaf] = test / 50.0;
    const bool included = p.predict(g, a / 1000.0).contains(leaf);
    std::size_t smaller = 0;
    for (int v : cal) smaller += (50 - v) < (50 - test) ? 1 : 0;
    const std::size_t k = ((n + 1) * static_cast<std::size_t>(1000 - a) + 999) / 1000;
    c.expect(included == (smaller + 1 <= k), "trial " + std::to_string(trial) + " disagrees");
    included_count += included ? 1 : 0;
  }
  report(4, "rank oracle", c,
         "1000 random calibration sets agree exactly (" + std::to_string(included_count) +
             " inclusions)");
}

void criterion_5() {
  Check c;
  std::size_t instances = 0;
  for (const auto& t : {testing::dish(), testing::perfect_binary_tree(3).build()}) {
    const auto space = hcc::enumerate_nol_covers(t);
    for (int seed = 0; seed < 10; ++seed) {
      const auto fam = hcc::calibrate_family(t, space, testing::synth_records(t, 1000, 50 + seed));
      const auto test = testing::synth_records(t, 1000, 80 + seed);
      for (double alpha : {.05, .1, .2}) {
        const auto lca = hcc::predict_batch(hcc::Method::kLca, fam, nullptr, t, test, alpha, {});
        const auto std_cp =
            hcc::predict_batch(hcc::Method::kStandard, fam, nullptr, t, test, alpha, {});
        for (const auto& p : lca) c.expect(p.selected.count() == 1, "LCA set size is not 1");
        const auto ml = hcc::evaluate_predictions(t, lca, test, 0.0);
        const auto ms = hcc::evaluate_predictions(t, std_cp, test, 0.0);
        c.expect(ml.coverage.mean >= ms.coverage.mean, "LCA coverage below standard CP");
        instances += test.size();
      }
    }
  }
  report(5, "LCA baseline", c,
         std::to_string(instances) + " instances on two trees: size 1, coverage >= standard CP");
}

void criterion_6() {
  Check c;
  std::size_t pairs = 0;
  for (const auto& t : {testing::dish(), testing::diamond()}) {
    const auto space = hcc::enumerate_nol_covers(t);
    const auto fam = hcc::calibrate_family(t, space, testing::synth_records(t, 1000, 61));
    const auto test = testing::synth_records(t, 1000, 62);
    for (double alpha : {.05, .1, .2}) {
      for (const auto& r : test) {
        const auto full = hcc::hcc_candidates(fam, t, r.scores, alpha);
        const auto no_prune = hcc::hcc_candidates(fam, t, r.scores, alpha, {false, true});
        c.expect(no_prune.m_effective >= full.m_effective, "disabling pruning lowered m");
        const double corrected = full.alpha_corrected;
        for (std::size_t id = 0; id < space.size(); ++id) {
          const auto& p = fam.predictor(id);
          c.expect(p.predict(r.scores, alpha).is_subset_of(p.predict(r.scores, corrected)),
                   "uncorrected set not inside corrected set");
          ++pairs;
        }
      }
    }
  }
  // Cover space of only the all-leaves cover.
  for (const auto& t : {testing::dish(), testing::diamond()}) {
    hcc::NodeSet all(t.size());
    for (auto v : t.leaf_order()) all.insert(v);
    const hcc::CoverSpace lone({all}, t, hcc::CoverMode::kExhaustive);
    const auto fam = hcc::calibrate_family(t, lone, testing::synth_records(t, 1000, 63));
    for (const auto& r : testing::synth_records(t, 1000, 64)) {
      for (double alpha : {.05, .1, .2}) {
        const auto h = hcc::predict_method(hcc::Method::kHcc, fam, nullptr, t, r.scores, alpha, {.3});
        c.expect(h.selected == hcc::standard_cp_predict(fam, r.scores, alpha),
                 "lone all-leaves HCC differs from standard CP");
      }
    }
  }
  report(6, "ablation orderings", c,
         std::to_string(pairs) + " cover/instance pairs nested; pruning never lowers m; "
                                 "all-leaves-only HCC equals standard CP");
}

void criterion_7() {
  Check c;
  const std::vector<double> betas{0, .05, .1, .2, .3, .5, .75, 1, 1.5, 2};
  std::string info;
  for (const auto& t : {testing::dish(), testing::perfect_binary_tree(3).build()}) {
    const auto space = hcc::enumerate_nol_covers(t);
    const auto fam = hcc::calibrate_family(t, space, testing::synth_records(t, 2000, 71));
    const auto test = testing::synth_records(t, 2000, 72);
    const auto rows = hcc::sweep_beta(fam, t, test, .1, betas, hcc::Method::kHcc, nullptr, {}, 4);
    std::vector<double> ps, leaves;
    for (const auto& r : rows) {
      ps.push_back(r.mean_ps_size);
      leaves.push_back(r.mean_covered_leaves);
    }
    const double r_ps = hcc::spearman(betas, ps);
    const double r_leaves = hcc::spearman(betas, leaves);
    c.expect(r_ps >= 0.0, fmt("Spearman(beta, ps_size) = %.3f", r_ps));
    c.expect(r_leaves <= 0.0, fmt("Spearman(beta, covered_leaves) = %.3f", r_leaves));
    c.expect(ps.front() <= *std::min_element(ps.begin(), ps.end()), "beta = 0 is not the minimum");
    info += fmt("rho_ps %.3f rho_leaves %.3f ps(0) %.3f; ", r_ps, r_leaves, ps.front());
  }
  report(7, "beta sweep", c, info);
}

void criterion_8() {
  Check c;
  const double beta = hcc::default_beta(testing::dish());
  c.expect(std::abs(beta - 1.0 / 3) < 1e-12, fmt("dish default beta %.6f", beta));
  // {3, 2}: mean of the central pair.
  const auto even = hcc::Taxonomy::parse(
      R"({"nodes": ["r", "a", "x", "y", "z"], "edges": [["r", "a"], ["r", "z"], ["a", "x"], ["a", "y"]]})");
  c.expect(std::abs(hcc::default_beta(even) - .4) < 1e-12, "even-median rule");
  std::string info = fmt("dish %.6f; even-median rule holds", beta);

  // Released taxonomies, when supplied: HCC_EXTERNAL_DATA/{gtz,dbp}.json.
  if (const char* dir = std::getenv("HCC_EXTERNAL_DATA")) {
    const std::pair<const char*, double> expected[] = {{"gtz.json", .25}, {"dbp.json", .19}};
    for (const auto& [file, want] : expected) {
      const auto path = std::filesystem::path(dir) / file;
      if (!std::filesystem::exists(path)) {
        c.expect(false, std::string("missing ") + path.string());
        continue;
      }
      const double b = hcc::default_beta(hcc::Taxonomy::load(path));
      c.expect(std::abs(b - want) <= .01, std::string(file) + fmt(" beta %.4f", b));
      info += std::string("; ") + file + fmt(" %.4f", b);
    }
  } else {
    info += "; external taxonomies not supplied, skipped";
  }
  report(8, "default beta", c, info);
}

void criterion_9() {
  Check c;
  constexpr int kSeeds = 30;
  std::string info;
  for (double alpha : {.05, .1}) {
    double worst = 1.0;
    for (const auto& t : {testing::dish(), testing::diamond()}) {
      const auto space = hcc::enumerate_nol_covers(t);
      std::vector<std::vector<double>> risk(space.size());
      for (int seed = 0; seed < kSeeds; ++seed) {
        const auto cal = testing::synth_records(t, 2000, 900 + 2 * seed);
        const auto test = testing::synth_records(t, 2000, 901 + 2 * seed);
        for (std::size_t id = 0; id < space.size(); ++id) {
          const auto p = hcc::crc_recall_calibrate(t, space[id], cal, alpha);
          double loss = 0.0;
          for (const auto& r : test) {
            loss += hcc::recall_loss(space[id], hcc::crc_recall_predict(p, r.scores), r.truth);
          }
          risk[id].push_back(loss / test.size());
        }
      }
      for (std::size_t id = 0; id < space.size(); ++id) {
        const auto st = seed_stats(risk[id]);
        worst = std::min(worst, alpha + 2 * st.se - st.mean);
        c.expect(st.mean <= alpha + 2 * st.se,
                 fmt("alpha %.2f: cover risk %.4f above %.4f", alpha, st.mean, alpha + 2 * st.se));
      }
    }
    info += fmt("alpha %.2f min margin %.4f; ", alpha, worst);
  }
  report(9, "risk control", c, info);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void criterion_10() {
  Check c;
  const auto t = testing::dish();
  const auto dir = std::filesystem::temp_directory_path() / "hcc_acceptance";
  std::filesystem::create_directories(dir);
  const auto csv = dir / "scores.csv";
  {
    const auto data = hcc::synth_generate(t, {1500, 2.0, 1.0, 101});
    const auto again = hcc::synth_generate(t, {1500, 2.0, 1.0, 101});
    bool same = true;
    for (std::size_t i = 0; i < data.size(); ++i) {
      same = same && data[i].scores.values == again[i].scores.values && data[i].truth == again[i].truth;
    }
    c.expect(same, "synthetic data differs between identical seeds");
    std::ofstream out(csv);
    hcc::write_scores(out, t, hcc::table_from_synthetic(data).rows);
  }
  hcc::RunConfig cfg;
  cfg.taxonomy_path = testing::fixture("dish.json");
  cfg.scores_path = csv.string();
  cfg.methods = hcc::all_methods();
  cfg.seed = 7;
  auto run = [&](unsigned threads, const std::string& sub) {
    cfg.threads = threads;
    cfg.output_path = (dir / sub).string();
    (void)hcc::run_pipeline(cfg);
    std::vector<std::string> files;
    for (const char* f : {"model.json", "predictions.jsonl", "metrics.json", "metrics.csv"}) {
      files.push_back(slurp(dir / sub / f));
    }
    return files;
  };
  const auto a = run(1, "a");
  const auto b = run(1, "b");
  const auto m = run(4, "c");
  c.expect(a == b, "repeated runs differ");
  c.expect(a == m, "1-thread and 4-thread runs differ");

  // Reloaded model predicts identically.
  const auto space = hcc::enumerate_nol_covers(t);
  const auto cal = testing::synth_records(t, 800, 102);
  const auto test = testing::synth_records(t, 800, 103);
  const auto model = hcc::calibrate_model(t, space, cal, true);
  const auto back = hcc::load_model_string(hcc::save_model_string(model, t), t);
  for (auto method : hcc::all_methods()) {
    const auto p = hcc::predict_batch(method, model.family, &*model.risk, t, test, .1, {.3});
    const auto q = hcc::predict_batch(method, back.family, &*back.risk, t, test, .1, {.3}, {}, 4);
    for (std::size_t i = 0; i < p.size(); ++i) {
      c.expect(p[i].selected == q[i].selected && p[i].cost == q[i].cost,
               std::string("reloaded model differs for ") + hcc::method_name(method));
    }
  }
  std::filesystem::remove_all(dir);
  report(10, "determinism and persistence", c,
         "identical artifacts across runs and thread counts; reload predicts identically");
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> criteria{criterion_1, criterion_2, criterion_3,
                                                    criterion_4, criterion_5, criterion_6,
                                                    criterion_7, criterion_8, criterion_9,
                                                    criterion_10};
  for (const auto& run : criteria) {
    try {
      run();
    } catch (const std::exception& e) {
      std::printf("FAIL (exception) %s\n", e.what());
      ++failures;
    }
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
