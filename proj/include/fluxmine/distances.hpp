#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fluxmine/error.hpp"
#include "fluxmine/parallel.hpp"
#include "fluxmine/representations.hpp"

namespace fluxmine {

inline constexpr int kDefaultBandRadius = 6;

inline double euclidean(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw Error(ErrorCode::length_mismatch,
                "euclidean: lengths " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  double ss = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) ss += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(ss);
}

/// Euclidean distance between PAA series, rescaled by sqrt(n/w) so it is
/// comparable with the distance between the raw series.
inline double paa_euclidean(const PaaSeries& a, const PaaSeries& b) {
  if (a.n != b.n || a.w != b.w) throw Error(ErrorCode::shape_mismatch, "paa_euclidean: (n, w) differ");
  return std::sqrt(double(a.n) / a.w) * euclidean(a.values, b.values);
}

// ---------------------------------------------------------------------------
// MINDIST

/// Distance between the intervals of symbols i and j (1-based): zero for equal
/// or adjacent symbols, otherwise the gap between the nearer breakpoints.
inline double symbol_dist(int i, int j, const Breakpoints& bp) {
  if (i < 1 || i > bp.alphabet || j < 1 || j > bp.alphabet)
    throw Error(ErrorCode::invalid_symbol, "symbol outside alphabet of size " + std::to_string(bp.alphabet));
  if (std::abs(i - j) <= 1) return 0.0;
  if (i < j) return bp.beta(j - 1) - bp.beta(i);
  return bp.beta(i - 1) - bp.beta(j);
}

/// Precomputed squared symbol distances for one alphabet.
class SymbolTable {
 public:
  explicit SymbolTable(const Breakpoints& bp) : alphabet_(bp.alphabet), sq_((alphabet_ + 1) * (alphabet_ + 1), 0.0) {
    for (int i = 1; i <= alphabet_; ++i)
      for (int j = 1; j <= alphabet_; ++j) {
        const double d = symbol_dist(i, j, bp);
        sq_[i * (alphabet_ + 1) + j] = d * d;
      }
  }

  int alphabet() const { return alphabet_; }
  double squared(int i, int j) const { return sq_[i * (alphabet_ + 1) + j]; }

 private:
  int alphabet_;
  std::vector<double> sq_;
};

inline const SymbolTable& symbol_table(int alphabet) {
  static const std::vector<SymbolTable> tables = [] {
    std::vector<SymbolTable> t;
    for (int a = 2; a <= kMaxAlphabet; ++a) t.emplace_back(cached_breakpoints(a));
    return t;
  }();
  if (alphabet < 2 || alphabet > kMaxAlphabet)
    throw Error(ErrorCode::invalid_alphabet, "alphabet size " + std::to_string(alphabet));
  return tables[alphabet - 2];
}

/// sqrt(n/w) * sqrt(sum_k dist(a_k, b_k)^2) over every word position; ESAX
/// words use the same prefactor.
inline double mindist(const SymbolicWord& a, const SymbolicWord& b) {
  if (!a.same_shape(b)) throw Error(ErrorCode::shape_mismatch, "mindist: words differ in flavor/alphabet/n/w");
  const auto& table = symbol_table(a.alphabet);
  double ss = 0.0;
  for (std::size_t k = 0; k < a.symbols.size(); ++k) ss += table.squared(a.symbols[k], b.symbols[k]);
  return std::sqrt(double(a.n) / a.w) * std::sqrt(ss);
}

// ---------------------------------------------------------------------------
// DTW

/// Sakoe-Chiba half-width in samples; no radius means unconstrained.
struct BandConfig {
  std::optional<int> radius;

  static BandConfig unbounded() { return {}; }
  static BandConfig sakoe_chiba(int r) {
    if (r < 0) throw Error(ErrorCode::invalid_argument, "band radius must be >= 0");
    return {r};
  }
  bool admits(std::size_t i, std::size_t j) const {
    return !radius || (i > j ? i - j : j - i) <= std::size_t(*radius);
  }
};

/// 0-based index pairs from (0,0) to (n-1,m-1).
using WarpPath = std::vector<std::pair<std::size_t, std::size_t>>;

struct DtwResult {
  double distance = 0.0;
  WarpPath path;
};

namespace detail {

inline void check_dtw_args(std::size_t n, std::size_t m, const BandConfig& band) {
  if (n == 0 || m == 0) throw Error(ErrorCode::invalid_argument, "dtw on empty series");
  if (band.radius && std::size_t(*band.radius) < (n > m ? n - m : m - n))
    throw Error(ErrorCode::band_too_narrow,
                "radius " + std::to_string(*band.radius) + " < |n - m| = " + std::to_string(n > m ? n - m : m - n));
}

inline std::pair<std::size_t, std::size_t> band_columns(std::size_t i, std::size_t m, const BandConfig& band) {
  if (!band.radius) return {0, m};
  const std::size_t r = std::size_t(*band.radius);
  return {i > r ? i - r : 0, std::min(m, i + r + 1)};
}

}  // namespace detail

/// Sum of squared differences along the cheapest admissible path (no root).
inline double dtw_squared_cost(std::span<const double> a, std::span<const double> b, const BandConfig& band) {
  const std::size_t n = a.size(), m = b.size();
  detail::check_dtw_args(n, m, band);
  constexpr double inf = std::numeric_limits<double>::infinity();
  // Two rolling rows over columns 0..m, with column 0 as the boundary.
  std::vector<double> prev(m + 1, inf), cur(m + 1, inf);
  prev[0] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(cur.begin(), cur.end(), inf);
    auto [lo, hi] = detail::band_columns(i, m, band);
    for (std::size_t j = lo; j < hi; ++j) {
      const double d = a[i] - b[j];
      const double best = std::min({prev[j], prev[j + 1], cur[j]});
      cur[j + 1] = d * d + best;
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

inline double dtw_distance(std::span<const double> a, std::span<const double> b, const BandConfig& band) {
  return std::sqrt(dtw_squared_cost(a, b, band));
}

/// Full dynamic program with path recovery. The returned path attains the
/// minimum; on equal predecessors the diagonal step is preferred.
inline DtwResult dtw(std::span<const double> a, std::span<const double> b, const BandConfig& band) {
  const std::size_t n = a.size(), m = b.size();
  detail::check_dtw_args(n, m, band);
  constexpr double inf = std::numeric_limits<double>::infinity();
  const std::size_t stride = m + 1;
  std::vector<double> cost((n + 1) * stride, inf);
  cost[0] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    auto [lo, hi] = detail::band_columns(i, m, band);
    for (std::size_t j = lo; j < hi; ++j) {
      const double d = a[i] - b[j];
      const double best = std::min({cost[i * stride + j], cost[i * stride + j + 1], cost[(i + 1) * stride + j]});
      cost[(i + 1) * stride + j + 1] = d * d + best;
    }
  }
  DtwResult result;
  result.distance = std::sqrt(cost[n * stride + m]);
  std::size_t i = n, j = m;
  result.path.emplace_back(i - 1, j - 1);
  while (i > 1 || j > 1) {
    const double diag = cost[(i - 1) * stride + (j - 1)];
    const double up = cost[(i - 1) * stride + j];
    const double left = cost[i * stride + (j - 1)];
    if (diag <= up && diag <= left) {
      --i;
      --j;
    } else if (up <= left) {
      --i;
    } else {
      --j;
    }
    result.path.emplace_back(i - 1, j - 1);
  }
  std::reverse(result.path.begin(), result.path.end());
  return result;
}

/// DTW between PAA series, rescaled by sqrt(n/w) like paa_euclidean.
inline double pdtw(const PaaSeries& a, const PaaSeries& b, const BandConfig& band) {
  if (a.n != b.n || a.w != b.w) throw Error(ErrorCode::shape_mismatch, "pdtw: (n, w) differ");
  return std::sqrt(double(a.n) / a.w) * dtw_distance(a.values, b.values, band);
}

inline double pdtw(std::span<const double> a, std::span<const double> b, int w,
                   const BandConfig& band = BandConfig::sakoe_chiba(kDefaultBandRadius)) {
  return pdtw(paa(a, w), paa(b, w), band);
}

// ---------------------------------------------------------------------------
// Multivariate sum rule

/// Sum of a per-feature distance over paired features.
template <class Feature, class FeatureDistance>
double multivariate_distance(std::span<const Feature> a, std::span<const Feature> b, FeatureDistance&& dist) {
  if (a.size() != b.size()) throw Error(ErrorCode::kind_mismatch, "bundles have different feature counts");
  double total = 0.0;
  for (std::size_t f = 0; f < a.size(); ++f) total += dist(a[f], b[f]);
  return total;
}

// ---------------------------------------------------------------------------
// Pairwise distance matrices

/// Symmetric matrix with zero diagonal, stored as the condensed upper
/// triangle (row-major, i < j).
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(std::size_t n) : n_(n), data_(n * (n > 0 ? n - 1 : 0) / 2, 0.0) {}

  std::size_t size() const { return n_; }

  double operator()(std::size_t i, std::size_t j) const {
    if (i == j) return 0.0;
    return data_[index(i, j)];
  }
  void set(std::size_t i, std::size_t j, double v) { data_[index(i, j)] = v; }

  std::span<const double> condensed() const { return data_; }
  std::span<double> condensed() { return data_; }

  /// Little-endian layout: uint64 N, then N(N-1)/2 float64 values.
  void write_binary(std::ostream& out) const {
    write_u64(out, n_);
    for (double v : data_) write_f64(out, v);
    if (!out) throw Error(ErrorCode::io_error, "failed writing distance matrix");
  }

  static DistanceMatrix read_binary(std::istream& in) {
    DistanceMatrix m(read_u64(in));
    for (double& v : m.data_) v = read_f64(in);
    if (!in) throw Error(ErrorCode::io_error, "truncated distance matrix");
    return m;
  }

  static void write_u64(std::ostream& out, std::uint64_t v) {
    unsigned char buf[8];
    for (int b = 0; b < 8; ++b) buf[b] = (unsigned char)((v >> (8 * b)) & 0xff);
    out.write(reinterpret_cast<const char*>(buf), 8);
  }
  static void write_f64(std::ostream& out, double v) { write_u64(out, std::bit_cast<std::uint64_t>(v)); }
  static std::uint64_t read_u64(std::istream& in) {
    unsigned char buf[8] = {};
    in.read(reinterpret_cast<char*>(buf), 8);
    std::uint64_t v = 0;
    for (int b = 0; b < 8; ++b) v |= std::uint64_t(buf[b]) << (8 * b);
    return v;
  }
  static double read_f64(std::istream& in) { return std::bit_cast<double>(read_u64(in)); }

 private:
  std::size_t index(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    return i * n_ - i * (i + 1) / 2 + (j - i - 1);
  }

  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// Fills all pairs in parallel over rows.
template <class Point, class Distance>
DistanceMatrix pairwise_distances(std::span<const Point> points, Distance&& dist) {
  DistanceMatrix m(points.size());
  parallel_for(points.size(), [&](std::size_t i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) m.set(i, j, dist(points[i], points[j]));
  });
  return m;
}

}  // namespace fluxmine
