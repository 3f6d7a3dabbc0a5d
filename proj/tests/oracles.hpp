#pragma once

// Slow reference implementations used only by the tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

namespace oracle {

/// Minimum over every admissible warping path of the summed squared
/// differences, by explicit depth-first enumeration. radius < 0 = unbounded.
inline double brute_dtw(std::span<const double> a, std::span<const double> b, int radius) {
  const long n = long(a.size()), m = long(b.size());
  double best = std::numeric_limits<double>::infinity();
  auto inside = [&](long i, long j) { return radius < 0 || std::labs(i - j) <= radius; };
  auto walk = [&](auto&& self, long i, long j, double acc) -> void {
    if (!inside(i, j)) return;
    const double d = a[i] - b[j];
    acc += d * d;
    if (acc >= best) return;
    if (i == n - 1 && j == m - 1) {
      best = acc;
      return;
    }
    if (i + 1 < n && j + 1 < m) self(self, i + 1, j + 1, acc);
    if (i + 1 < n) self(self, i + 1, j, acc);
    if (j + 1 < m) self(self, i, j + 1, acc);
  };
  walk(walk, 0, 0, 0.0);
  return std::sqrt(best);
}

/// Symbol distance from raw breakpoints (betas[0..l-2]).
inline double cell(int i, int j, const std::vector<double>& betas) {
  if (std::abs(i - j) <= 1) return 0.0;
  const int lo = std::min(i, j), hi = std::max(i, j);
  return betas[hi - 2] - betas[lo - 1];
}

/// Weighted sum over members of squared MINDIST (prefactor n/w applied).
inline double symbolic_cost(const std::vector<std::vector<int>>& words, const std::vector<double>& weights,
                            const std::vector<int>& candidate, const std::vector<double>& betas, double n_over_w) {
  double total = 0.0;
  for (std::size_t i = 0; i < words.size(); ++i) {
    double ss = 0.0;
    for (std::size_t k = 0; k < candidate.size(); ++k) {
      const double d = cell(words[i][k], candidate[k], betas);
      ss += d * d;
    }
    total += weights[i] * n_over_w * ss;
  }
  return total;
}

/// Exhaustive minimum over all l^w candidate words.
inline double brute_symbolic_min(const std::vector<std::vector<int>>& words, const std::vector<double>& weights,
                                 int alphabet, const std::vector<double>& betas, double n_over_w) {
  const std::size_t len = words.front().size();
  std::vector<int> cand(len, 1);
  double best = std::numeric_limits<double>::infinity();
  for (;;) {
    best = std::min(best, symbolic_cost(words, weights, cand, betas, n_over_w));
    std::size_t pos = 0;
    while (pos < len && cand[pos] == alphabet) cand[pos++] = 1;
    if (pos == len) break;
    ++cand[pos];
  }
  return best;
}

/// Quadratic-per-step average-linkage clustering from scratch: linkage is
/// recomputed from the original distances every step. Returns merge heights.
template <class Dist>
std::vector<double> naive_upgma_heights(std::size_t n, Dist&& d) {
  std::vector<std::vector<std::size_t>> clusters;
  for (std::size_t i = 0; i < n; ++i) clusters.push_back({i});
  std::vector<double> heights;
  while (clusters.size() > 1) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t ba = 0, bb = 0;
    for (std::size_t x = 0; x < clusters.size(); ++x)
      for (std::size_t y = x + 1; y < clusters.size(); ++y) {
        double s = 0.0;
        for (auto i : clusters[x])
          for (auto j : clusters[y]) s += d(i, j);
        s /= double(clusters[x].size() * clusters[y].size());
        if (s < best) {
          best = s;
          ba = x;
          bb = y;
        }
      }
    heights.push_back(best);
    clusters[ba].insert(clusters[ba].end(), clusters[bb].begin(), clusters[bb].end());
    clusters.erase(clusters.begin() + long(bb));
  }
  return heights;
}

/// Mean silhouette straight from the definition; label < 0 = excluded.
template <class Dist>
double naive_silhouette(const std::vector<int>& labels, Dist&& d) {
  const std::size_t n = labels.size();
  std::set<int> ids;
  for (int l : labels)
    if (l >= 0) ids.insert(l);
  double total = 0.0;
  std::size_t counted = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] < 0) continue;
    ++counted;
    std::map<int, std::pair<double, int>> acc;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || labels[j] < 0) continue;
      acc[labels[j]].first += d(i, j);
      acc[labels[j]].second += 1;
    }
    if (acc[labels[i]].second == 0) continue;  // singleton: s = 0
    const double a = acc[labels[i]].first / acc[labels[i]].second;
    double b = std::numeric_limits<double>::infinity();
    for (int c : ids)
      if (c != labels[i]) b = std::min(b, acc[c].first / acc[c].second);
    const double m = std::max(a, b);
    total += m > 0 ? (b - a) / m : 0.0;
  }
  return total / double(counted);
}

/// Fraction of point pairs on which two partitions agree.
inline double rand_index(const std::vector<int>& x, const std::vector<int>& y) {
  std::size_t agree = 0, pairs = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      ++pairs;
      if ((x[i] == x[j]) == (y[i] == y[j])) ++agree;
    }
  return pairs ? double(agree) / double(pairs) : 1.0;
}

}  // namespace oracle
