#pragma once

// Scenario trees over scalar netload and the four constructions used by the
// controllers: fan, averaged single branch, clustered fan, and the
// stagewise-reduced tree.

#include <cstdint>
#include <string>
#include <vector>

#include "mgbench/core.hpp"

namespace mgbench {

// K sampled scenarios of equal length. Row probabilities default to uniform.
struct ScenarioMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;           // row-major, rows*cols
  std::vector<double> row_probability;  // empty = uniform 1/rows

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  double prob(std::size_t r) const {
    return row_probability.empty() ? 1.0 / static_cast<double>(rows) : row_probability[r];
  }
  // First `c` columns of each row.
  ScenarioMatrix truncated(std::size_t c) const;
  void validate() const;
};

struct TreeNode {
  std::int32_t parent = -1;  // -1 for the root
  std::int32_t depth = 0;
  double value = 0.0;        // netload at this node, kWh
  double probability = 1.0;  // unconditional path probability
};

// Nodes are stored root-first; a node's id is its index and parents precede
// children. All leaves sit at the same depth.
struct ScenarioTree {
  std::vector<TreeNode> nodes;

  std::size_t size() const { return nodes.size(); }
  std::int32_t depth() const;
  std::vector<std::vector<std::int32_t>> children() const;
  // Checks the structural invariants: one root with probability 1, child
  // probabilities summing to the parent's, uniform leaf depth.
  void validate() const;

  std::string to_json() const;
  static ScenarioTree from_json(const std::string& text);
};

// One branch per sample row, all attached to the root.
ScenarioTree build_fan(const ScenarioMatrix& samples, double root_value);

// Single branch carrying the probability-weighted column means.
ScenarioTree average_branch(const ScenarioMatrix& samples, double root_value);

// K-means (k-means++ seeding, Lloyd iterations) on the rows; fan over the
// non-empty centroids, each weighted by its cluster mass.
ScenarioTree cluster_fan(const ScenarioMatrix& samples, double root_value, std::size_t clusters,
                         std::uint64_t seed);

// Forward stagewise construction with per-stage backward reduction. At each
// stage, scenarios in a node's bundle are merged while the cumulative
// probability-weighted deletion distance stays within eps_construction times
// the bundle's maximum pairwise stage distance. eps_reduction applies one
// whole-scenario reduction pass (max-over-stages distance) beforehand.
ScenarioTree reduce_to_tree(const ScenarioMatrix& samples, double root_value,
                            double eps_construction, double eps_reduction);

namespace detail {

struct KMeansResult {
  std::size_t clusters = 0;             // non-empty clusters
  std::vector<double> centroids;        // clusters x dim, row-major
  std::vector<double> mass;             // probability mass per cluster
  std::vector<std::size_t> assignment;  // per input row, index into kept clusters
};

// Weighted Lloyd's algorithm with k-means++ seeding. Deterministic for a
// fixed seed; ties break toward the lowest index. Empty clusters are dropped
// from the result.
KMeansResult kmeans(const ScenarioMatrix& samples, std::size_t k, std::uint64_t seed,
                    std::size_t max_iters = 100, std::vector<double>* wcss_trace = nullptr);

}  // namespace detail

}  // namespace mgbench
