#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "fluxmine/clustering.hpp"
#include "fluxmine/distances.hpp"
#include "fluxmine/error.hpp"
#include "fluxmine/spaces.hpp"

namespace fluxmine {

struct ValidationResult {
  std::string index_name;
  double value = 0.0;
  std::vector<double> per_cluster;  // in ascending label order
};

/// Mean silhouette over all non-outlier series. Singleton clusters score 0.
inline ValidationResult silhouette(const DistanceMatrix& dist, std::span<const int> labels) {
  const std::size_t n = dist.size();
  if (labels.size() != n) throw Error(ErrorCode::invalid_argument, "one label per series required");
  std::map<int, int> slot;
  for (int l : labels)
    if (l != kOutlier) slot.try_emplace(l, 0);
  if (slot.size() < 2) throw Error(ErrorCode::undefined_index, "silhouette needs at least 2 clusters");
  int next = 0;
  for (auto& [label, s] : slot) s = next++;
  const std::size_t k = slot.size();
  std::vector<std::size_t> sizes(k, 0);
  for (int l : labels)
    if (l != kOutlier) ++sizes[slot[l]];

  std::vector<double> s(n, 0.0);
  std::vector<int> cls(n, -1);
  for (std::size_t i = 0; i < n; ++i)
    if (labels[i] != kOutlier) cls[i] = slot[labels[i]];

  parallel_for(n, [&](std::size_t i) {
    if (cls[i] < 0 || sizes[cls[i]] < 2) return;
    std::vector<double> sums(k, 0.0);
    for (std::size_t j = 0; j < n; ++j)
      if (j != i && cls[j] >= 0) sums[cls[j]] += dist(i, j);
    const double a = sums[cls[i]] / double(sizes[cls[i]] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c)
      if (int(c) != cls[i]) b = std::min(b, sums[c] / double(sizes[c]));
    const double denom = std::max(a, b);
    s[i] = denom > 0.0 ? (b - a) / denom : 0.0;
  });

  ValidationResult out{"silhouette", 0.0, std::vector<double>(k, 0.0)};
  std::size_t counted = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (cls[i] < 0) continue;
    out.value += s[i];
    out.per_cluster[cls[i]] += s[i];
    ++counted;
  }
  out.value /= double(counted);
  for (std::size_t c = 0; c < k; ++c) out.per_cluster[c] /= double(sizes[c]);
  return out;
}

template <ClusterSpace Space>
ValidationResult silhouette(std::span<const typename Space::Point> points, std::span<const int> labels,
                            const Space& space) {
  return silhouette(pairwise_distances(points, [&](const auto& a, const auto& b) { return space.distance(a, b); }),
                    labels);
}

/// PCAES, unnormalised:
///   sum_k sum_i u_ik^2 / u_M  -  sum_k exp(-min_{j != k} d(v_k, v_j)^2 / beta_T)
/// with u_M = min_k sum_i u_ik^2 and beta_T = sum_k d(v_k, vbar)^2 / k, where
/// vbar is the space's plain average of the centroids.
/// `membership` is row-major N x k. per_cluster holds each cluster's term.
template <ClusterSpace Space>
ValidationResult pcaes(std::span<const double> membership, std::span<const typename Space::Point> centroids,
                       const Space& space) {
  const std::size_t k = centroids.size();
  if (k < 2) throw Error(ErrorCode::undefined_index, "pcaes needs at least 2 clusters");
  if (membership.size() % k != 0) throw Error(ErrorCode::shape_mismatch, "membership is not N x k");
  const std::size_t n = membership.size() / k;

  std::vector<double> coeff(k, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < k; ++c) coeff[c] += membership[i * k + c] * membership[i * k + c];
  const double u_min = *std::min_element(coeff.begin(), coeff.end());

  const auto mean = space.average(centroids, {}, nullptr);
  double beta = 0.0;
  for (const auto& v : centroids) {
    const double d = space.distance(v, mean);
    beta += d * d;
  }
  beta /= double(k);

  ValidationResult out{"pcaes", 0.0, std::vector<double>(k, 0.0)};
  for (std::size_t c = 0; c < k; ++c) {
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < k; ++j)
      if (j != c) nearest = std::min(nearest, space.distance(centroids[c], centroids[j]));
    // all centroids coincide: beta is 0 and the penalty is at its maximum
    const double penalty = beta > 0.0 ? std::exp(-nearest * nearest / beta) : 1.0;
    out.per_cluster[c] = (u_min > 0.0 ? coeff[c] / u_min : 0.0) - penalty;
    out.value += out.per_cluster[c];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Model-selection sweep

struct SweepRow {
  std::string method;
  std::string representation;
  std::size_t k = 0;
  double index_value = 0.0;
  std::uint64_t seed = 0;
};

inline constexpr std::string_view kSweepHeader = "method,representation,k,index_value,seed";

inline void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows, bool header = true) {
  if (header) out << kSweepHeader << '\n';
  out.precision(17);
  for (const auto& r : rows)
    out << r.method << ',' << r.representation << ',' << r.k << ',' << r.index_value << ',' << r.seed << '\n';
}

/// Runs k-means (silhouette) or fuzzy c-means (PCAES) for every k in
/// [k_min, k_max] and reports the index value.
template <ClusterSpace Space>
std::vector<SweepRow> index_sweep(std::span<const typename Space::Point> points, const Space& space, Engine engine,
                                  std::size_t k_min, std::size_t k_max, std::uint64_t seed,
                                  const std::string& representation, int max_iters = 100) {
  if (engine == Engine::hca) throw Error(ErrorCode::invalid_argument, "index sweeps apply to kmeans and fuzzy only");
  if (k_min < 2 || k_max < k_min) throw Error(ErrorCode::invalid_argument, "sweep range must satisfy 2 <= k_min <= k_max");
  std::vector<SweepRow> rows;
  std::optional<DistanceMatrix> dist;
  for (std::size_t k = k_min; k <= k_max && k <= points.size(); ++k) {
    SweepRow row{std::string(to_string(engine)), representation, k, 0.0, seed};
    if (engine == Engine::kmeans) {
      if (!dist) dist = pairwise_distances(points, [&](const auto& a, const auto& b) { return space.distance(a, b); });
      auto model = kmeans(points, space, KMeansOptions{k, seed, max_iters});
      std::map<int, int> used;
      for (int l : model.labels) used[l]++;
      row.index_value = used.size() >= 2 ? silhouette(*dist, model.labels).value : 0.0;
    } else {
      FuzzyOptions fo;
      fo.c = k;
      fo.seed = seed;
      fo.max_iters = max_iters;
      auto model = fuzzy_cmeans(points, space, fo);
      row.index_value = pcaes<Space>(model.membership, model.centroids, space).value;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace fluxmine
