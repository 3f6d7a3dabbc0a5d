#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fluxmine/distances.hpp"
#include "fluxmine/error.hpp"
#include "fluxmine/parallel.hpp"
#include "fluxmine/spaces.hpp"

namespace fluxmine {

inline constexpr int kOutlier = -1;

enum class Engine { kmeans, fuzzy, hca };

inline std::string_view to_string(Engine e) {
  switch (e) {
    case Engine::kmeans: return "kmeans";
    case Engine::fuzzy: return "fuzzy";
    case Engine::hca: return "hca";
  }
  return "?";
}

inline std::optional<Engine> parse_engine(std::string_view s) {
  if (s == "kmeans") return Engine::kmeans;
  if (s == "fuzzy") return Engine::fuzzy;
  if (s == "hca") return Engine::hca;
  return std::nullopt;
}

/// What produced a model: space name plus every hyperparameter as text.
struct Provenance {
  std::string space;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> hyperparameters;
};

/// Result of any engine. Labels are 0-based cluster indices (kOutlier for
/// filtered series); `membership` is row-major N x k and only set for fuzzy
/// models.
template <class Point>
struct ClusterModel {
  Engine method = Engine::kmeans;
  std::size_t k = 0;
  std::vector<Point> centroids;
  std::vector<int> labels;
  std::vector<double> membership;
  double objective = 0.0;
  std::vector<double> objective_history;  // one entry per iteration
  int iterations = 0;
  bool converged = false;
  Provenance provenance;

  double u(std::size_t i, std::size_t c) const { return membership[i * k + c]; }
  bool fuzzy() const { return !membership.empty(); }
};

// ---------------------------------------------------------------------------
// D^2 seeding

/// k-means++ seeding: first centre uniform, each next one drawn with
/// probability proportional to the squared distance to the nearest chosen
/// centre. When every remaining point coincides with a centre, the next one is
/// drawn uniformly among the unchosen. Returns point indices.
template <ClusterSpace Space>
std::vector<std::size_t> kmeans_pp_init(std::span<const typename Space::Point> points, std::size_t k,
                                        const Space& space, std::uint64_t seed) {
  const std::size_t n = points.size();
  if (k == 0) throw Error(ErrorCode::invalid_argument, "k must be >= 1");
  if (k > n)
    throw Error(ErrorCode::too_many_clusters, "k = " + std::to_string(k) + " > " + std::to_string(n) + " points");
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> chosen;
  std::vector<bool> taken(n, false);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());

  auto add = [&](std::size_t idx) {
    chosen.push_back(idx);
    taken[idx] = true;
    parallel_for(n, [&](std::size_t i) {
      const double d = space.distance(points[i], points[idx]);
      d2[i] = std::min(d2[i], d * d);
    });
  };

  add(std::uniform_int_distribution<std::size_t>(0, n - 1)(rng));
  while (chosen.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (!taken[i]) total += d2[i];
    std::size_t pick = n;
    if (total > 0.0) {
      const double target = std::uniform_real_distribution<double>(0.0, total)(rng);
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (taken[i] || d2[i] == 0.0) continue;
        acc += d2[i];
        pick = i;
        if (acc > target) break;
      }
    } else {
      std::size_t remaining = n - chosen.size();
      std::size_t r = std::uniform_int_distribution<std::size_t>(0, remaining - 1)(rng);
      for (std::size_t i = 0; i < n; ++i) {
        if (taken[i]) continue;
        if (r-- == 0) {
          pick = i;
          break;
        }
      }
    }
    add(pick);
  }
  return chosen;
}

// ---------------------------------------------------------------------------
// k-means

struct KMeansOptions {
  std::size_t k = 3;
  std::uint64_t seed = 0;
  int max_iters = 100;
  double tol = 1e-6;  // centroid shift (in the space's distance)
};

namespace detail {

template <ClusterSpace Space>
std::vector<double> distance_table(std::span<const typename Space::Point> points,
                                   std::span<const typename Space::Point> centroids, const Space& space) {
  const std::size_t k = centroids.size();
  std::vector<double> d(points.size() * k);
  parallel_for(points.size(), [&](std::size_t i) {
    for (std::size_t c = 0; c < k; ++c) d[i * k + c] = space.distance(points[i], centroids[c]);
  });
  return d;
}

template <ClusterSpace Space>
Provenance make_provenance(const Space& space, std::uint64_t seed, std::map<std::string, std::string> hyper) {
  return {space.name(), seed, std::move(hyper)};
}

}  // namespace detail

/// Lloyd iterations with nearest-centroid assignment (ties to the lowest
/// index) and centroids from the space's averaging. Stops on an assignment
/// fixpoint, a centroid shift below tol, or max_iters. An empty cluster is
/// re-seeded with the point farthest from its own centroid.
template <ClusterSpace Space>
ClusterModel<typename Space::Point> kmeans(std::span<const typename Space::Point> points, const Space& space,
                                           const KMeansOptions& opt) {
  using Point = typename Space::Point;
  const std::size_t n = points.size(), k = opt.k;
  ClusterModel<Point> model;
  model.method = Engine::kmeans;
  model.k = k;
  model.provenance = detail::make_provenance(
      space, opt.seed,
      {{"k", std::to_string(k)}, {"max_iters", std::to_string(opt.max_iters)}, {"tol", std::to_string(opt.tol)}});
  for (std::size_t idx : kmeans_pp_init(points, k, space, opt.seed)) model.centroids.push_back(points[idx]);

  std::vector<int> labels(n, -1), previous;
  std::vector<double> nearest(n);
  double shift = std::numeric_limits<double>::infinity();
  for (int iter = 0;; ++iter) {
    auto d = detail::distance_table<Space>(points, model.centroids, space);
    double objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      for (std::size_t c = 1; c < k; ++c)
        if (d[i * k + c] < d[i * k + best]) best = c;
      labels[i] = int(best);
      nearest[i] = d[i * k + best];
      objective += nearest[i] * nearest[i];
    }
    model.objective_history.push_back(objective);
    model.iterations = iter + 1;
    if ((iter > 0 && labels == previous) || shift < opt.tol) {
      model.converged = true;
      break;
    }
    if (iter >= opt.max_iters) break;
    previous = labels;

    std::vector<Point> updated(model.centroids);
    std::vector<bool> reseeded(n, false);
    std::vector<double> weights(n);
    for (std::size_t c = 0; c < k; ++c) {
      bool empty = true;
      for (std::size_t i = 0; i < n; ++i) {
        weights[i] = labels[i] == int(c) ? 1.0 : 0.0;
        empty = empty && weights[i] == 0.0;
      }
      if (empty) {
        std::size_t far = n;
        for (std::size_t i = 0; i < n; ++i)
          if (!reseeded[i] && (far == n || nearest[i] > nearest[far])) far = i;
        reseeded[far] = true;
        updated[c] = points[far];
      } else {
        updated[c] = space.average(points, weights, &model.centroids[c]);
      }
    }
    shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) shift = std::max(shift, space.distance(model.centroids[c], updated[c]));
    model.centroids = std::move(updated);
  }
  model.labels = std::move(labels);
  model.objective = model.objective_history.back();
  return model;
}

// ---------------------------------------------------------------------------
// Fuzzy c-means

struct FuzzyOptions {
  std::size_t c = 3;
  double m = 2.0;
  std::uint64_t seed = 0;
  int max_iters = 100;
  double tol = 1e-5;  // max membership change
};

/// Membership of one point given its distances to every centroid:
/// u_k = 1 / sum_j (d_k / d_j)^(2/(m-1)); a zero distance takes the whole
/// membership (first such centroid).
inline void fcm_memberships(std::span<const double> d, double m, std::span<double> u) {
  const std::size_t k = d.size();
  for (std::size_t c = 0; c < k; ++c) {
    if (d[c] == 0.0) {
      std::fill(u.begin(), u.end(), 0.0);
      u[c] = 1.0;
      return;
    }
  }
  const double expo = 2.0 / (m - 1.0);
  double total = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) s += std::pow(d[c] / d[j], expo);
    u[c] = 1.0 / s;
    total += u[c];
  }
  for (double& v : u) v /= total;
}

/// Fuzzy c-means with D^2 seeding. Alternates membership and centroid
/// updates (centroid weights u^m) until the largest membership change is
/// below tol or max_iters is reached. `labels` holds the hardened argmax.
template <ClusterSpace Space>
ClusterModel<typename Space::Point> fuzzy_cmeans(std::span<const typename Space::Point> points, const Space& space,
                                                 const FuzzyOptions& opt) {
  using Point = typename Space::Point;
  if (!(opt.m > 1.0)) throw Error(ErrorCode::invalid_argument, "fuzziness m must be > 1");
  const std::size_t n = points.size(), k = opt.c;
  ClusterModel<Point> model;
  model.method = Engine::fuzzy;
  model.k = k;
  model.provenance = detail::make_provenance(space, opt.seed,
                                             {{"c", std::to_string(k)},
                                              {"m", std::to_string(opt.m)},
                                              {"max_iters", std::to_string(opt.max_iters)},
                                              {"tol", std::to_string(opt.tol)}});
  for (std::size_t idx : kmeans_pp_init(points, k, space, opt.seed)) model.centroids.push_back(points[idx]);

  std::vector<double> u(n * k, 0.0), u_next(n * k);
  for (int iter = 0;; ++iter) {
    auto d = detail::distance_table<Space>(points, model.centroids, space);
    double objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::span<double> row(u_next.data() + i * k, k);
      fcm_memberships(std::span<const double>(d.data() + i * k, k), opt.m, row);
      for (std::size_t c = 0; c < k; ++c) objective += std::pow(row[c], opt.m) * d[i * k + c] * d[i * k + c];
    }
    model.objective_history.push_back(objective);
    model.iterations = iter + 1;
    double change = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) change = std::max(change, std::abs(u_next[j] - u[j]));
    std::swap(u, u_next);
    if (iter > 0 && change < opt.tol) {
      model.converged = true;
      break;
    }
    if (iter >= opt.max_iters) break;

    std::vector<double> weights(n);
    for (std::size_t c = 0; c < k; ++c) {
      double mass = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        weights[i] = std::pow(u[i * k + c], opt.m);
        mass += weights[i];
      }
      if (mass > 0.0) model.centroids[c] = space.average(points, weights, &model.centroids[c]);
    }
  }
  model.membership = std::move(u);
  model.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < k; ++c)
      if (model.u(i, c) > model.u(i, best)) best = c;
    model.labels[i] = int(best);
  }
  model.objective = model.objective_history.back();
  return model;
}

// ---------------------------------------------------------------------------
// Agglomerative clustering (average linkage)

struct Merge {
  std::size_t left = 0;   // node id: leaves are 0..N-1, merge s creates N+s
  std::size_t right = 0;
  double height = 0.0;
  std::size_t size = 0;
};

struct Dendrogram {
  std::size_t n = 0;
  std::vector<Merge> merges;          // N-1 steps in merge order
  std::vector<std::size_t> leaf_order;
  std::size_t inversions = 0;         // steps whose height is below the previous one
};

/// UPGMA on a precomputed matrix. Each step merges the closest pair of live
/// clusters; ties go to the lowest (left, right) pair, where a cluster is
/// identified by its smallest leaf index. Runs in O(N^2) memory with cached
/// per-row nearest neighbours.
inline Dendrogram hca(const DistanceMatrix& dist) {
  const std::size_t n = dist.size();
  if (n < 2) throw Error(ErrorCode::invalid_argument, "hca needs at least 2 points");
  DistanceMatrix d = dist;
  std::vector<bool> active(n, true);
  std::vector<std::size_t> size(n, 1), node(n);
  std::iota(node.begin(), node.end(), 0);
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> nn(n, n);
  std::vector<double> nn_dist(n, inf);

  auto refresh = [&](std::size_t i) {
    nn[i] = n;
    nn_dist[i] = inf;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!active[j]) continue;
      const double v = d(i, j);
      if (v < nn_dist[i]) {
        nn_dist[i] = v;
        nn[i] = j;
      }
    }
  };
  for (std::size_t i = 0; i < n; ++i) refresh(i);

  Dendrogram out;
  out.n = n;
  out.merges.reserve(n - 1);
  for (std::size_t step = 0; step + 1 < n; ++step) {
    std::size_t a = n;
    for (std::size_t i = 0; i < n; ++i)
      if (active[i] && nn[i] < n && (a == n || nn_dist[i] < nn_dist[a])) a = i;
    const std::size_t b = nn[a];
    const double height = d(a, b);
    out.merges.push_back({node[a], node[b], height, size[a] + size[b]});
    if (step > 0 && height < out.merges[step - 1].height) ++out.inversions;

    const double wa = double(size[a]), wb = double(size[b]);
    active[b] = false;
    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k] || k == a) continue;
      d.set(a, k, (wa * d(a, k) + wb * d(b, k)) / (wa + wb));
    }
    size[a] += size[b];
    node[a] = n + step;

    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k]) continue;
      if (k == a) {
        refresh(k);
      } else if (k < a) {
        if (nn[k] == a || nn[k] == b) {
          refresh(k);
        } else {
          const double v = d(k, a);
          if (v < nn_dist[k] || (v == nn_dist[k] && a < nn[k])) {
            nn_dist[k] = v;
            nn[k] = a;
          }
        }
      } else if (k < b && nn[k] == b) {
        refresh(k);
      }
    }
  }

  // left-to-right leaf order of the final tree
  std::vector<std::size_t> stack{n + out.merges.size() - 1};
  while (!stack.empty()) {
    const std::size_t id = stack.back();
    stack.pop_back();
    if (id < n) {
      out.leaf_order.push_back(id);
    } else {
      stack.push_back(out.merges[id - n].right);
      stack.push_back(out.merges[id - n].left);
    }
  }
  return out;
}

template <ClusterSpace Space>
Dendrogram hca(std::span<const typename Space::Point> points, const Space& space) {
  return hca(pairwise_distances(points, [&](const auto& a, const auto& b) { return space.distance(a, b); }));
}

/// Flat labels after applying the first `steps` merges. Clusters are numbered
/// in order of their smallest leaf.
inline std::vector<int> cut_after(const Dendrogram& dg, std::size_t steps) {
  const std::size_t n = dg.n;
  std::vector<std::size_t> parent(n + dg.merges.size());
  std::iota(parent.begin(), parent.end(), 0);
  for (std::size_t s = 0; s < steps && s < dg.merges.size(); ++s) {
    parent[dg.merges[s].left] = n + s;
    parent[dg.merges[s].right] = n + s;
  }
  auto root = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x];
    return x;
  };
  std::vector<int> labels(n);
  std::map<std::size_t, int> ids;
  for (std::size_t i = 0; i < n; ++i) {
    auto [it, inserted] = ids.try_emplace(root(i), int(ids.size()));
    labels[i] = it->second;
  }
  return labels;
}

/// For each merge step s (after applying merges 0..s), the number of live
/// clusters holding more than p series.
inline std::vector<std::size_t> count_p_significant(const Dendrogram& dg, std::size_t p) {
  const std::size_t n = dg.n;
  std::vector<std::size_t> size(n + dg.merges.size(), 0);
  std::fill(size.begin(), size.begin() + n, 1);
  std::size_t count = 1 > p ? n : 0;
  std::vector<std::size_t> counts;
  counts.reserve(dg.merges.size());
  for (std::size_t s = 0; s < dg.merges.size(); ++s) {
    const auto& m = dg.merges[s];
    if (size[m.left] > p) --count;
    if (size[m.right] > p) --count;
    size[n + s] = m.size;
    if (m.size > p) ++count;
    counts.push_back(count);
  }
  return counts;
}

inline constexpr double kDefaultMinPlateauFrac = 0.05;

/// p default: max(5, ceil(0.3% of N)).
inline std::size_t default_significance(std::size_t n) {
  return std::max<std::size_t>(5, (3 * n + 999) / 1000);
}

struct PlateauCut {
  std::optional<std::vector<int>> labels;  // nullopt: no stable phase
  std::size_t plateau_begin = 0;           // merge steps, inclusive
  std::size_t plateau_end = 0;
  std::size_t plateau_length = 0;          // 0 when no run with >= 2 clusters exists
  std::size_t plateau_count = 0;           // p-significant clusters on the plateau
  std::vector<std::size_t> counts;

  bool stable() const { return labels.has_value(); }
};

/// Finds the longest run of consecutive merge steps with a constant number
/// (>= 2) of p-significant clusters; equal lengths prefer the later run. If
/// the run spans at least min_plateau_frac * (N-1) steps, the dendrogram is
/// cut at its last step.
inline PlateauCut plateau_cut(const Dendrogram& dg, std::size_t p, double min_plateau_frac = kDefaultMinPlateauFrac) {
  if (!(min_plateau_frac > 0.0 && min_plateau_frac < 1.0))
    throw Error(ErrorCode::invalid_argument, "min_plateau_frac must lie in (0, 1)");
  PlateauCut out;
  out.counts = count_p_significant(dg, p);
  const auto& counts = out.counts;
  std::size_t& best_len = out.plateau_length;
  for (std::size_t s = 0; s < counts.size();) {
    std::size_t e = s;
    while (e + 1 < counts.size() && counts[e + 1] == counts[s]) ++e;
    const std::size_t len = e - s + 1;
    if (counts[s] >= 2 && len >= best_len) {
      best_len = len;
      out.plateau_begin = s;
      out.plateau_end = e;
      out.plateau_count = counts[s];
    }
    s = e + 1;
  }
  if (best_len > 0 && double(best_len) >= min_plateau_frac * double(dg.merges.size()))
    out.labels = cut_after(dg, out.plateau_end + 1);
  return out;
}

/// Marks members of clusters smaller than min_size as kOutlier; other labels
/// are left as they are.
inline std::vector<int> filter_small_clusters(std::span<const int> labels, std::size_t min_size) {
  if (min_size < 1) throw Error(ErrorCode::invalid_argument, "min_size must be >= 1");
  std::map<int, std::size_t> sizes;
  for (int l : labels)
    if (l != kOutlier) ++sizes[l];
  std::vector<int> out(labels.begin(), labels.end());
  for (int& l : out)
    if (l != kOutlier && sizes[l] < min_size) l = kOutlier;
  return out;
}

/// filter_small_clusters threshold for fleets of about 31k series.
inline constexpr std::size_t kLargeFleetMinClusterSize = 1000;

struct HcaOptions {
  std::optional<std::size_t> p;  // default_significance(N) when unset
  double min_plateau_frac = kDefaultMinPlateauFrac;
  std::size_t min_cluster_size = 1;
};

struct HcaOutcome {
  Dendrogram dendrogram;
  PlateauCut cut;
};

/// HCA followed by the plateau cut and the small-cluster filter; surviving
/// clusters are renumbered 0..k-1 and get centroids from the space's
/// averaging. The model is empty (nullopt) when no stable phase exists.
template <ClusterSpace Space>
std::optional<ClusterModel<typename Space::Point>> hca_model(std::span<const typename Space::Point> points,
                                                             const Space& space, const HcaOptions& opt,
                                                             HcaOutcome* outcome = nullptr) {
  using Point = typename Space::Point;
  const std::size_t p = opt.p.value_or(default_significance(points.size()));
  auto dg = hca(points, space);
  auto cut = plateau_cut(dg, p, opt.min_plateau_frac);
  std::optional<ClusterModel<Point>> result;
  if (cut.stable()) {
    auto filtered = filter_small_clusters(*cut.labels, opt.min_cluster_size);
    std::map<int, int> renumber;
    for (int l : filtered)
      if (l != kOutlier) renumber.try_emplace(l, 0);
    int next = 0;
    for (auto& [old, id] : renumber) id = next++;
    ClusterModel<Point> model;
    model.method = Engine::hca;
    model.k = renumber.size();
    model.labels.resize(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
      model.labels[i] = filtered[i] == kOutlier ? kOutlier : renumber[filtered[i]];
    std::vector<double> weights(points.size());
    double objective = 0.0;
    for (std::size_t c = 0; c < model.k; ++c) {
      for (std::size_t i = 0; i < points.size(); ++i) weights[i] = model.labels[i] == int(c) ? 1.0 : 0.0;
      model.centroids.push_back(space.average(points, weights, nullptr));
      for (std::size_t i = 0; i < points.size(); ++i) {
        if (weights[i] == 0.0) continue;
        const double dd = space.distance(points[i], model.centroids.back());
        objective += dd * dd;
      }
    }
    model.objective = objective;
    model.objective_history = {objective};
    model.converged = true;
    model.provenance = detail::make_provenance(space, 0,
                                               {{"p", std::to_string(p)},
                                                {"min_plateau_frac", std::to_string(opt.min_plateau_frac)},
                                                {"min_cluster_size", std::to_string(opt.min_cluster_size)},
                                                {"plateau_begin", std::to_string(cut.plateau_begin)},
                                                {"plateau_end", std::to_string(cut.plateau_end)},
                                                {"inversions", std::to_string(dg.inversions)}});
    result = std::move(model);
  }
  if (outcome) *outcome = {std::move(dg), std::move(cut)};
  return result;
}

}  // namespace fluxmine
