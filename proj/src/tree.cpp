#include "mgbench/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "mgbench/rng.hpp"

namespace mgbench {

namespace {
constexpr double kProbTol = 1e-9;
}

ScenarioMatrix ScenarioMatrix::truncated(std::size_t c) const {
  if (c > cols) throw ConfigError("ScenarioMatrix::truncated: wider than source");
  ScenarioMatrix out;
  out.rows = rows;
  out.cols = c;
  out.values.reserve(rows * c);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < c; ++j) out.values.push_back(at(r, j));
  out.row_probability = row_probability;
  return out;
}

void ScenarioMatrix::validate() const {
  if (rows == 0) throw ConfigError("scenario matrix: no rows");
  if (values.size() != rows * cols) throw ConfigError("scenario matrix: size mismatch");
  for (double v : values)
    if (!std::isfinite(v)) throw ConfigError("scenario matrix: non-finite value");
  if (!row_probability.empty()) {
    if (row_probability.size() != rows)
      throw ConfigError("scenario matrix: probability count mismatch");
    double sum = 0.0;
    for (double p : row_probability) {
      if (!(p >= 0.0)) throw ConfigError("scenario matrix: negative probability");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kProbTol)
      throw ConfigError("scenario matrix: probabilities do not sum to 1");
  }
}

std::int32_t ScenarioTree::depth() const {
  std::int32_t d = 0;
  for (const auto& n : nodes) d = std::max(d, n.depth);
  return d;
}

std::vector<std::vector<std::int32_t>> ScenarioTree::children() const {
  std::vector<std::vector<std::int32_t>> out(nodes.size());
  for (std::size_t i = 1; i < nodes.size(); ++i)
    out[static_cast<std::size_t>(nodes[i].parent)].push_back(static_cast<std::int32_t>(i));
  return out;
}

void ScenarioTree::validate() const {
  if (nodes.empty()) throw ConfigError("scenario tree: empty");
  if (nodes[0].parent != -1 || nodes[0].depth != 0)
    throw ConfigError("scenario tree: node 0 is not a root");
  if (std::abs(nodes[0].probability - 1.0) > kProbTol)
    throw ConfigError("scenario tree: root probability != 1");
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    if (n.parent < 0 || static_cast<std::size_t>(n.parent) >= i)
      throw ConfigError("scenario tree: parent must precede child");
    if (n.depth != nodes[static_cast<std::size_t>(n.parent)].depth + 1)
      throw ConfigError("scenario tree: child depth != parent depth + 1");
    if (!std::isfinite(n.value) || !(n.probability >= 0.0))
      throw ConfigError("scenario tree: bad node value or probability");
  }
  const auto kids = children();
  const std::int32_t leaf_depth = depth();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (kids[i].empty()) {
      if (nodes[i].depth != leaf_depth)
        throw ConfigError("scenario tree: leaves at mixed depths");
    } else {
      double sum = 0.0;
      for (auto c : kids[i]) sum += nodes[static_cast<std::size_t>(c)].probability;
      if (std::abs(sum - nodes[i].probability) > kProbTol)
        throw ConfigError("scenario tree: child probabilities do not sum to parent's");
    }
  }
}

std::string ScenarioTree::to_json() const {
  nlohmann::ordered_json doc;
  doc["nodes"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    nlohmann::ordered_json n;
    n["id"] = i;
    if (nodes[i].parent < 0)
      n["parent"] = nullptr;
    else
      n["parent"] = nodes[i].parent;
    n["depth"] = nodes[i].depth;
    n["value"] = nodes[i].value;
    n["probability"] = nodes[i].probability;
    doc["nodes"].push_back(std::move(n));
  }
  return doc.dump(2);
}

ScenarioTree ScenarioTree::from_json(const std::string& text) {
  const auto doc = nlohmann::json::parse(text);
  ScenarioTree tree;
  for (const auto& n : doc.at("nodes")) {
    TreeNode node;
    node.parent = n.at("parent").is_null() ? -1 : n.at("parent").get<std::int32_t>();
    node.depth = n.at("depth").get<std::int32_t>();
    node.value = n.at("value").get<double>();
    node.probability = n.at("probability").get<double>();
    tree.nodes.push_back(node);
  }
  tree.validate();
  return tree;
}

ScenarioTree build_fan(const ScenarioMatrix& samples, double root_value) {
  samples.validate();
  ScenarioTree tree;
  tree.nodes.push_back(TreeNode{-1, 0, root_value, 1.0});
  for (std::size_t r = 0; r < samples.rows; ++r) {
    std::int32_t parent = 0;
    const double p = samples.prob(r);
    for (std::size_t c = 0; c < samples.cols; ++c) {
      tree.nodes.push_back(
          TreeNode{parent, static_cast<std::int32_t>(c + 1), samples.at(r, c), p});
      parent = static_cast<std::int32_t>(tree.nodes.size() - 1);
    }
  }
  return tree;
}

ScenarioTree average_branch(const ScenarioMatrix& samples, double root_value) {
  samples.validate();
  ScenarioTree tree;
  tree.nodes.push_back(TreeNode{-1, 0, root_value, 1.0});
  std::int32_t parent = 0;
  for (std::size_t c = 0; c < samples.cols; ++c) {
    double num = 0.0, den = 0.0;
    for (std::size_t r = 0; r < samples.rows; ++r) {
      num += samples.prob(r) * samples.at(r, c);
      den += samples.prob(r);
    }
    tree.nodes.push_back(TreeNode{parent, static_cast<std::int32_t>(c + 1), num / den, 1.0});
    parent = static_cast<std::int32_t>(tree.nodes.size() - 1);
  }
  return tree;
}

namespace detail {

namespace {

double sq_dist(const double* a, const double* b, std::size_t dim) {
  double s = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

// CDF-inversion draw over non-negative weights; deterministic for a fixed rng
// state. Returns the lowest index if all weights are zero.
std::size_t draw_weighted(std::mt19937_64& rng, const std::vector<double>& w) {
  double total = 0.0;
  for (double v : w) total += v;
  if (!(total > 0.0)) {
    for (std::size_t i = 0; i < w.size(); ++i)
      if (w[i] >= 0.0) return i;
    return 0;
  }
  const double u = uniform01(rng) * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    acc += w[i];
    if (u < acc) return i;
  }
  return w.size() - 1;
}

}  // namespace

KMeansResult kmeans(const ScenarioMatrix& samples, std::size_t k, std::uint64_t seed,
                    std::size_t max_iters, std::vector<double>* wcss_trace) {
  samples.validate();
  const std::size_t n = samples.rows;
  const std::size_t dim = samples.cols;
  if (k == 0 || k > n) throw ConfigError("kmeans: cluster count must be in [1, rows]");

  std::mt19937_64 rng(seed);
  std::vector<double> mass(n);
  for (std::size_t i = 0; i < n; ++i) mass[i] = samples.prob(i);

  // k-means++ seeding: first centre by mass, then proportional to mass * D^2.
  std::vector<double> centroids;
  centroids.reserve(k * dim);
  std::vector<char> chosen(n, 0);
  {
    const std::size_t first = draw_weighted(rng, mass);
    chosen[first] = 1;
    centroids.insert(centroids.end(), samples.values.begin() + first * dim,
                     samples.values.begin() + (first + 1) * dim);
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i)
      d2[i] = sq_dist(&samples.values[i * dim], &centroids[0], dim);
    std::vector<double> w(n);
    for (std::size_t c = 1; c < k; ++c) {
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        w[i] = chosen[i] ? 0.0 : mass[i] * d2[i];
        total += w[i];
      }
      std::size_t pick;
      if (total > 0.0) {
        pick = draw_weighted(rng, w);
      } else {
        // Remaining points duplicate the chosen ones; take the lowest unchosen.
        pick = 0;
        while (pick < n && chosen[pick]) ++pick;
        if (pick == n) throw ConfigError("kmeans: fewer distinct points than clusters");
      }
      chosen[pick] = 1;
      centroids.insert(centroids.end(), samples.values.begin() + pick * dim,
                       samples.values.begin() + (pick + 1) * dim);
      for (std::size_t i = 0; i < n; ++i)
        d2[i] = std::min(d2[i], sq_dist(&samples.values[i * dim], &centroids[c * dim], dim));
    }
  }

  std::vector<std::size_t> assign(n, 0), prev(n, std::numeric_limits<std::size_t>::max());
  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t arg = 0;
      for (std::size_t c = 0; c < k; ++c) {
        const double d = sq_dist(&samples.values[i * dim], &centroids[c * dim], dim);
        if (d < best) {
          best = d;
          arg = c;
        }
      }
      assign[i] = arg;
    }
    if (assign == prev) break;
    prev = assign;

    std::vector<double> num(k * dim, 0.0), den(k, 0.0);
    std::vector<std::size_t> count(k, 0), last_member(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      den[assign[i]] += mass[i];
      ++count[assign[i]];
      last_member[assign[i]] = i;
      for (std::size_t j = 0; j < dim; ++j) num[assign[i] * dim + j] += mass[i] * samples.at(i, j);
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (count[c] == 1) {
        // The mean of one point is that point; keep it exact.
        for (std::size_t j = 0; j < dim; ++j)
          centroids[c * dim + j] = samples.at(last_member[c], j);
      } else if (den[c] > 0.0) {
        for (std::size_t j = 0; j < dim; ++j) centroids[c * dim + j] = num[c * dim + j] / den[c];
      }
      // Empty clusters keep their centroid; they are dropped at the end.
    }
    if (wcss_trace) {
      double wcss = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        wcss += mass[i] * sq_dist(&samples.values[i * dim], &centroids[assign[i] * dim], dim);
      wcss_trace->push_back(wcss);
    }
  }

  // Drop empty clusters, remapping assignments.
  std::vector<double> cluster_mass(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) cluster_mass[assign[i]] += mass[i];
  std::vector<std::size_t> remap(k, std::numeric_limits<std::size_t>::max());
  KMeansResult out;
  for (std::size_t c = 0; c < k; ++c) {
    bool used = false;
    for (std::size_t i = 0; i < n && !used; ++i) used = (assign[i] == c);
    if (!used) continue;
    remap[c] = out.clusters++;
    out.centroids.insert(out.centroids.end(), centroids.begin() + c * dim,
                         centroids.begin() + (c + 1) * dim);
    out.mass.push_back(cluster_mass[c]);
  }
  out.assignment.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.assignment[i] = remap[assign[i]];
  return out;
}

}  // namespace detail

ScenarioTree cluster_fan(const ScenarioMatrix& samples, double root_value, std::size_t clusters,
                         std::uint64_t seed) {
  samples.validate();
  if (clusters < 1 || clusters > samples.rows)
    throw ConfigError("cluster_fan: cluster count must be in [1, rows]");
  const auto km = detail::kmeans(samples, clusters, seed);
  ScenarioMatrix centres;
  centres.rows = km.clusters;
  centres.cols = samples.cols;
  centres.values = km.centroids;
  centres.row_probability = km.mass;
  return build_fan(centres, root_value);
}

namespace {

// One pass of backward reduction over `alive` (indices into a distance
// functor domain). Deletes the scenario minimizing mass * distance-to-nearest
// while the cumulative cost stays within budget, transferring mass and group
// membership to the nearest kept scenario. Ties break toward lower indices.
template <typename DistFn>
void backward_reduce(std::vector<std::size_t>& alive, std::vector<double>& mass,
                     std::vector<std::vector<std::size_t>>* groups, double budget,
                     DistFn&& dist) {
  double spent = 0.0;
  while (alive.size() > 1) {
    double best_cost = std::numeric_limits<double>::infinity();
    std::size_t best_pos = 0, best_nearest = 0;
    for (std::size_t a = 0; a < alive.size(); ++a) {
      const std::size_t i = alive[a];
      double dmin = std::numeric_limits<double>::infinity();
      std::size_t nearest = 0;
      for (std::size_t b = 0; b < alive.size(); ++b) {
        if (b == a) continue;
        const double d = dist(i, alive[b]);
        if (d < dmin) {
          dmin = d;
          nearest = alive[b];
        }
      }
      const double cost = mass[i] * dmin;
      if (cost < best_cost) {
        best_cost = cost;
        best_pos = a;
        best_nearest = nearest;
      }
    }
    if (spent + best_cost > budget) break;
    spent += best_cost;
    const std::size_t removed = alive[best_pos];
    mass[best_nearest] += mass[removed];
    mass[removed] = 0.0;
    if (groups) {
      auto& dst = (*groups)[best_nearest];
      auto& src = (*groups)[removed];
      dst.insert(dst.end(), src.begin(), src.end());
      std::sort(dst.begin(), dst.end());
      src.clear();
    }
    alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(best_pos));
  }
}

}  // namespace

ScenarioTree reduce_to_tree(const ScenarioMatrix& samples, double root_value,
                            double eps_construction, double eps_reduction) {
  samples.validate();
  if (!(eps_construction >= 0.0 && eps_construction <= 1.0) ||
      !(eps_reduction >= 0.0 && eps_reduction <= 1.0))
    throw ConfigError("reduce_to_tree: eps values must be in [0, 1]");
  const std::size_t K = samples.rows;
  const std::size_t R = samples.cols;

  std::vector<double> mass(K);
  for (std::size_t i = 0; i < K; ++i) mass[i] = samples.prob(i);

  // Whole-scenario pre-reduction with max-over-stages distance.
  std::vector<std::size_t> alive(K);
  std::iota(alive.begin(), alive.end(), 0);
  if (K > 1 && R > 0) {
    auto scen_dist = [&](std::size_t i, std::size_t j) {
      double d = 0.0;
      for (std::size_t c = 0; c < R; ++c)
        d = std::max(d, std::abs(samples.at(i, c) - samples.at(j, c)));
      return d;
    };
    double dmax = 0.0;
    for (std::size_t a = 0; a < K; ++a)
      for (std::size_t b = a + 1; b < K; ++b) dmax = std::max(dmax, scen_dist(a, b));
    backward_reduce(alive, mass, nullptr, eps_reduction * dmax, scen_dist);
  }

  ScenarioTree tree;
  tree.nodes.push_back(TreeNode{-1, 0, root_value, 1.0});

  struct Bundle {
    std::vector<std::size_t> members;
    std::int32_t parent;
  };
  std::vector<Bundle> bundles{{alive, 0}};

  for (std::size_t stage = 0; stage < R; ++stage) {
    std::vector<Bundle> next;
    for (const auto& bundle : bundles) {
      auto stage_dist = [&](std::size_t i, std::size_t j) {
        return std::abs(samples.at(i, stage) - samples.at(j, stage));
      };
      std::vector<double> local_mass(K, 0.0);
      std::vector<std::vector<std::size_t>> groups(K);
      for (std::size_t i : bundle.members) {
        local_mass[i] = mass[i];
        groups[i] = {i};
      }
      std::vector<std::size_t> kept = bundle.members;
      if (kept.size() > 1) {
        double dmax = 0.0;
        for (std::size_t a = 0; a < bundle.members.size(); ++a)
          for (std::size_t b = a + 1; b < bundle.members.size(); ++b)
            dmax = std::max(dmax, stage_dist(bundle.members[a], bundle.members[b]));
        backward_reduce(kept, local_mass, &groups, eps_construction * dmax, stage_dist);
      }
      for (std::size_t j : kept) {
        tree.nodes.push_back(TreeNode{bundle.parent, static_cast<std::int32_t>(stage + 1),
                                      samples.at(j, stage), local_mass[j]});
        next.push_back({groups[j], static_cast<std::int32_t>(tree.nodes.size() - 1)});
      }
    }
    bundles = std::move(next);
  }
  return tree;
}

}  // namespace mgbench
