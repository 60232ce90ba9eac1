#pragma once

#include <algorithm>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "hcc/covers.hpp"
#include "hcc/evaluation.hpp"
#include "hcc/taxonomy.hpp"

namespace testing {

inline std::string fixture(const std::string& name) {
  return std::string(HCC_FIXTURE_DIR) + "/" + name;
}

inline hcc::Taxonomy dish() { return hcc::Taxonomy::load(fixture("dish.json")); }
inline hcc::Taxonomy diamond() { return hcc::Taxonomy::load(fixture("diamond.json")); }

struct Graph {
  std::vector<std::string> names;
  std::vector<std::pair<std::string, std::string>> edges;

  hcc::Taxonomy build() const { return hcc::Taxonomy::from_edges(names, edges); }
};

// Node 0 is the only parentless node; every other node gets one or two
// parents among the earlier nodes, so the result is a rooted DAG.
inline Graph random_dag(std::mt19937_64& rng, std::size_t max_nodes = 16,
                        double second_parent = 0.3) {
  std::uniform_int_distribution<std::size_t> size(2, max_nodes);
  const std::size_t n = size(rng);
  Graph g;
  for (std::size_t i = 0; i < n; ++i) g.names.push_back("n" + std::to_string(i));
  std::bernoulli_distribution extra(second_parent);
  for (std::size_t i = 1; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    const std::size_t p = pick(rng);
    g.edges.emplace_back(g.names[p], g.names[i]);
    if (i > 1 && extra(rng)) {
      std::size_t q = pick(rng);
      if (q != p) g.edges.emplace_back(g.names[q], g.names[i]);
    }
  }
  return g;
}

inline Graph perfect_binary_tree(std::size_t depth) {
  Graph g;
  const std::size_t n = (std::size_t{1} << (depth + 1)) - 1;
  for (std::size_t i = 0; i < n; ++i) g.names.push_back("b" + std::to_string(i));
  for (std::size_t i = 1; i < n; ++i) g.edges.emplace_back(g.names[(i - 1) / 2], g.names[i]);
  return g;
}

// Independent helpers over the raw edge list.
struct Oracle {
  std::size_t n = 0;
  std::vector<std::vector<std::size_t>> parents, children;

  explicit Oracle(const hcc::Taxonomy& t) : n(t.size()), parents(n), children(n) {
    for (hcc::NodeIndex v = 0; v < n; ++v) {
      for (auto c : t.children(v)) {
        children[v].push_back(c);
        parents[c].push_back(v);
      }
    }
  }

  std::set<std::size_t> ancestors(std::size_t v) const {
    std::set<std::size_t> out;
    std::vector<std::size_t> stack(parents[v].begin(), parents[v].end());
    while (!stack.empty()) {
      auto u = stack.back();
      stack.pop_back();
      if (out.insert(u).second) stack.insert(stack.end(), parents[u].begin(), parents[u].end());
    }
    return out;
  }

  std::set<std::size_t> leaves_under(std::size_t v) const {
    std::set<std::size_t> out;
    std::vector<std::size_t> stack{v};
    std::set<std::size_t> seen;
    while (!stack.empty()) {
      auto u = stack.back();
      stack.pop_back();
      if (!seen.insert(u).second) continue;
      if (children[u].empty()) out.insert(u);
      stack.insert(stack.end(), children[u].begin(), children[u].end());
    }
    return out;
  }

  std::set<std::size_t> leaves() const {
    std::set<std::size_t> out;
    for (std::size_t v = 0; v < n; ++v) {
      if (children[v].empty()) out.insert(v);
    }
    return out;
  }
};

inline std::vector<std::vector<hcc::NodeIndex>> member_lists(const hcc::CoverSpace& s) {
  std::vector<std::vector<hcc::NodeIndex>> out;
  for (const auto& c : s.covers()) out.push_back(c.member_list);
  return out;
}

inline hcc::LeafScores leaf_scores(const hcc::Taxonomy& t,
                                   std::initializer_list<std::pair<const char*, double>> values) {
  hcc::LeafScores ls;
  ls.values.assign(t.leaf_count(), 0.0);
  for (const auto& [name, v] : values) ls.values[*t.leaf_position(t.index_of(name))] = v;
  return ls;
}

// Scores from the running example.
inline hcc::LeafScores dish_scores(const hcc::Taxonomy& t) {
  return leaf_scores(t, {{"omelette", .05},
                         {"pancakes", .05},
                         {"Greek salad", .10},
                         {"Caesar salad", .40},
                         {"cheese sandwich", .25},
                         {"ham sandwich", .10},
                         {"tuna sandwich", .05}});
}

inline std::vector<hcc::CalibrationRecord> synth_records(const hcc::Taxonomy& t, std::size_t n,
                                                         std::uint64_t seed, double signal = 2.0,
                                                         double noise = 1.0) {
  const auto data = hcc::synth_generate(t, hcc::SynthConfig{n, signal, noise, seed});
  return hcc::to_records(t, data);
}

}  // namespace testing
