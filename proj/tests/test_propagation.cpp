#include <doctest.h>

#include <random>

#include "hcc/covers.hpp"
#include "hcc/error.hpp"
#include "hcc/propagation.hpp"
#include "support.hpp"

using doctest::Approx;

TEST_CASE("propagated scores on the dish example") {
  const auto t = testing::dish();
  const auto g = hcc::propagate_scores(t, testing::dish_scores(t));
  CHECK(g[t.index_of("salad")] == Approx(.50));
  CHECK(g[t.index_of("sandwich")] == Approx(.40));
  CHECK(g[t.index_of("lunch")] == Approx(.90));
  CHECK(g[t.index_of("breakfast")] == Approx(.10));
  CHECK(g[t.index_of("dish")] == Approx(1.0));
  CHECK(g[t.index_of("Caesar salad")] == .40);
}

TEST_CASE("one-hot propagation") {
  const auto t = testing::dish();
  const auto g = hcc::propagate_scores(t, testing::leaf_scores(t, {{"Caesar salad", 1.0}}));
  const auto on = t.make_set({"Caesar salad", "salad", "lunch", "dish"});
  for (hcc::NodeIndex v = 0; v < t.size(); ++v) CHECK(g[v] == (on.contains(v) ? 1.0 : 0.0));
}

TEST_CASE("diamond propagation counts the shared leaf under both parents") {
  const auto t = testing::diamond();
  const auto g = hcc::propagate_scores(t, testing::leaf_scores(t, {{"x", .2}, {"y", .5}, {"z", .3}}));
  CHECK(g[t.index_of("A")] == Approx(.7));
  CHECK(g[t.index_of("B")] == Approx(.8));
  CHECK(g[t.index_of("root")] == Approx(1.0));
}

TEST_CASE("simplex contract") {
  const auto t = testing::dish();
  auto ls = testing::dish_scores(t);
  ls.values[0] -= .02;  // sums to .98
  CHECK_THROWS_AS(hcc::propagate_scores(t, ls), hcc::Error);
  const auto g = hcc::propagate_scores(t, ls, hcc::SimplexPolicy::kRenormalize);
  CHECK(g[t.root()] == Approx(1.0));

  auto tiny = testing::dish_scores(t);
  tiny.values[0] += 5e-7;
  CHECK_NOTHROW(hcc::propagate_scores(t, tiny));

  auto neg = testing::dish_scores(t);
  neg.values[0] = -.05;
  neg.values[1] = .15;
  CHECK_THROWS_AS(hcc::propagate_scores(t, neg, hcc::SimplexPolicy::kRenormalize), hcc::Error);

  hcc::LeafScores short_row;
  short_row.values = {1.0};
  CHECK_THROWS_AS(hcc::propagate_scores(t, short_row), hcc::Error);

  hcc::LeafScores zeros;
  zeros.values.assign(t.leaf_count(), 0.0);
  CHECK_THROWS_AS(hcc::propagate_scores(t, zeros, hcc::SimplexPolicy::kRenormalize), hcc::Error);
}

TEST_CASE("propagated label sets") {
  const auto t = testing::dish();
  CHECK(hcc::propagated_label_set(t, t.index_of("Caesar salad")).ancestor_set ==
        t.make_set({"Caesar salad", "salad", "lunch", "dish"}));
  CHECK_THROWS_AS(hcc::propagated_label_set(t, t.index_of("salad")), hcc::Error);

  const auto one = hcc::Taxonomy::parse(R"({"nodes": ["root"], "edges": []})");
  CHECK(hcc::propagated_label_set(one, 0).ancestor_set == one.make_set({"root"}));

  const auto d = testing::diamond();
  CHECK(hcc::propagated_label_set(d, d.index_of("y")).ancestor_set ==
        d.make_set({"y", "A", "B", "root"}));
}

TEST_CASE("label indicators") {
  const auto t = testing::dish();
  const auto s = hcc::enumerate_nol_covers(t);
  const auto truth = hcc::propagated_label_set(t, t.index_of("Caesar salad"));
  const auto& c = s[*s.find(t.make_set({"breakfast", "salad", "sandwich"}))];
  // member_list is in node-index order: breakfast, salad, sandwich.
  CHECK(hcc::label_indicator(c, truth) == std::vector<std::uint8_t>{0, 1, 0});
  const auto& leaves = s[s.all_leaves_id()];
  const auto ind = hcc::label_indicator(leaves, truth);
  for (std::size_t j = 0; j < ind.size(); ++j) {
    CHECK(ind[j] == (leaves.member_list[j] == t.index_of("Caesar salad") ? 1 : 0));
  }

  const auto d = testing::diamond();
  const auto ds = hcc::enumerate_nol_covers(d);
  const auto& ab = ds[*ds.find(d.make_set({"A", "B"}))];
  CHECK(hcc::label_indicator(ab, hcc::propagated_label_set(d, d.index_of("y"))) ==
        std::vector<std::uint8_t>{1, 1});
}

TEST_CASE("every cover has a true member for every leaf") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 60; ++trial) {
    const auto t = testing::random_dag(rng, 14).build();
    const auto s = hcc::enumerate_nol_covers(t);
    for (auto leaf : t.leaf_order()) {
      const auto truth = hcc::propagated_label_set(t, leaf);
      for (const auto& c : s.covers()) {
        const auto ind = hcc::label_indicator(c, truth);
        std::size_t set = 0;
        for (auto b : ind) set += b;
        CHECK(set >= 1);
      }
    }
  }
}

TEST_CASE("propagation is linear") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const auto t = testing::random_dag(rng, 20).build();
    auto draw = [&] {
      hcc::LeafScores ls;
      double sum = 0.0;
      for (std::size_t i = 0; i < t.leaf_count(); ++i) {
        ls.values.push_back(u(rng));
        sum += ls.values.back();
      }
      for (double& v : ls.values) v /= sum;
      return ls;
    };
    const auto p = draw();
    const auto q = draw();
    const double a = u(rng);
    hcc::LeafScores mix;
    for (std::size_t i = 0; i < t.leaf_count(); ++i) {
      mix.values.push_back(a * p.values[i] + (1 - a) * q.values[i]);
    }
    const auto gp = hcc::propagate_scores(t, p);
    const auto gq = hcc::propagate_scores(t, q);
    const auto gm = hcc::propagate_scores(t, mix);
    for (hcc::NodeIndex v = 0; v < t.size(); ++v) {
      CHECK(gm[v] == Approx(a * gp[v] + (1 - a) * gq[v]).epsilon(1e-12));
    }
  }
}

TEST_CASE("cover mass on trees equals the leaf mass") {
  const auto t = testing::dish();
  const auto g = hcc::propagate_scores(t, testing::dish_scores(t));
  const auto space = hcc::enumerate_nol_covers(t);
  for (const auto& c : space.covers()) {
    double sum = 0.0;
    for (auto v : c.member_list) sum += g[v];
    CHECK(sum == Approx(1.0).epsilon(1e-9));
    CHECK(sum <= 1.0 + 1e-6);
  }
}
