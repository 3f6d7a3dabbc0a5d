#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "fluxmine/distances.hpp"
#include "fluxmine/error.hpp"
#include "fluxmine/representations.hpp"

namespace fluxmine {

template <class Payload>
struct Centroid {
  Payload value;
  double weight_mass = 0.0;  // total member weight that formed it
};

inline constexpr int kDefaultDbaIterations = 30;
inline constexpr double kDefaultDbaTolerance = 1e-4;

namespace detail {

/// Validates weights (empty = uniform) and returns their sum.
inline double check_weights(std::size_t count, std::span<const double> weights) {
  if (count == 0) throw Error(ErrorCode::empty_cluster, "cannot average an empty set");
  if (weights.empty()) return double(count);
  if (weights.size() != count) throw Error(ErrorCode::invalid_argument, "one weight per member required");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw Error(ErrorCode::invalid_argument, "weights must be finite and >= 0");
    total += w;
  }
  if (!(total > 0.0)) throw Error(ErrorCode::empty_cluster, "member weights sum to zero");
  return total;
}

inline double weight_at(std::span<const double> weights, std::size_t i) { return weights.empty() ? 1.0 : weights[i]; }

/// Weighted element-wise mean over members get(0..count-1). Members with
/// zero weight are skipped.
template <class Get>
std::vector<double> weighted_mean(std::size_t count, Get&& get, std::span<const double> weights) {
  const double total = check_weights(count, weights);
  const std::size_t len = get(0).size();
  std::vector<double> acc(len, 0.0);
  for (std::size_t i = 0; i < count; ++i) {
    const double w = weight_at(weights, i);
    if (w == 0.0) continue;
    std::span<const double> s = get(i);
    if (s.size() != len) throw Error(ErrorCode::length_mismatch, "members differ in length");
    for (std::size_t t = 0; t < len; ++t) acc[t] += w * s[t];
  }
  for (double& v : acc) v /= total;
  return acc;
}

struct DbaStep {
  std::vector<double> centroid;
  double objective_before = 0.0;  // sum_i w_i * DTW^2(member_i, old centroid)
};

/// One DBA pass: align every member to the current centroid and move each
/// centroid coordinate to the weighted mean of the member values aligned to
/// it. The weighted DTW sum of squares cannot increase.
template <class Get>
DbaStep dba_step(std::size_t count, Get&& get, std::span<const double> weights, std::span<const double> centroid,
                 const BandConfig& band) {
  const std::size_t len = centroid.size();
  std::vector<double> sum(len, 0.0), mass(len, 0.0);
  DbaStep step;
  for (std::size_t i = 0; i < count; ++i) {
    const double w = weight_at(weights, i);
    if (w == 0.0) continue;
    std::span<const double> s = get(i);
    auto aligned = dtw(centroid, s, band);
    step.objective_before += w * aligned.distance * aligned.distance;
    for (auto [c, t] : aligned.path) {
      sum[c] += w * s[t];
      mass[c] += w;
    }
  }
  step.centroid.resize(len);
  for (std::size_t c = 0; c < len; ++c) step.centroid[c] = sum[c] / mass[c];
  return step;
}

template <class Get>
double dba_objective(std::size_t count, Get&& get, std::span<const double> weights, std::span<const double> centroid,
                     const BandConfig& band) {
  double obj = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double w = weight_at(weights, i);
    if (w == 0.0) continue;
    obj += w * dtw_squared_cost(centroid, get(i), band);
  }
  return obj;
}

}  // namespace detail

inline Centroid<std::vector<double>> mean_centroid(std::span<const std::vector<double>> members,
                                                   std::span<const double> weights = {}) {
  const double mass = detail::check_weights(members.size(), weights);
  auto get = [&](std::size_t i) { return std::span<const double>(members[i]); };
  return {detail::weighted_mean(members.size(), get, weights), mass};
}

struct DbaOptions {
  BandConfig band = BandConfig::sakoe_chiba(kDefaultBandRadius);
  int max_iters = kDefaultDbaIterations;
  double tol = kDefaultDbaTolerance;
};

struct DbaResult {
  Centroid<std::vector<double>> centroid;
  int iterations = 0;
  /// Weighted DTW sum of squares of the initial centroid, then after each
  /// iteration. Non-increasing.
  std::vector<double> objective_history;
};

/// DTW barycenter averaging. Stops when no coordinate moves by tol or more,
/// or after max_iters passes.
inline DbaResult dba_centroid(std::span<const std::vector<double>> members, std::span<const double> init,
                              const DbaOptions& options = {}, std::span<const double> weights = {}) {
  const double mass = detail::check_weights(members.size(), weights);
  for (const auto& m : members)
    if (m.size() != init.size()) throw Error(ErrorCode::length_mismatch, "dba: init and members differ in length");
  auto get = [&](std::size_t i) { return std::span<const double>(members[i]); };

  DbaResult result;
  std::vector<double> current(init.begin(), init.end());
  for (int it = 0; it < options.max_iters; ++it) {
    auto step = detail::dba_step(members.size(), get, weights, current, options.band);
    result.objective_history.push_back(step.objective_before);
    double change = 0.0;
    for (std::size_t c = 0; c < current.size(); ++c) change = std::max(change, std::abs(step.centroid[c] - current[c]));
    current = std::move(step.centroid);
    result.iterations = it + 1;
    if (change < options.tol) break;
  }
  result.objective_history.push_back(detail::dba_objective(members.size(), get, weights, current, options.band));
  result.centroid = {std::move(current), mass};
  return result;
}

/// Medoid proxy used to start DBA: the member with the least summed DTW
/// distance to (up to) 10 members drawn at random.
inline std::size_t dba_initial_guess(std::span<const std::vector<double>> members, const BandConfig& band,
                                     std::uint64_t seed, std::size_t sample_size = 10) {
  if (members.empty()) throw Error(ErrorCode::empty_cluster, "cannot pick an initial centroid from an empty set");
  std::vector<std::size_t> idx(members.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(std::min(sample_size, idx.size()));
  std::size_t best = 0;
  double best_sum = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < members.size(); ++i) {
    double sum = 0.0;
    for (std::size_t j : idx) sum += dtw_distance(members[i], members[j], band);
    if (sum < best_sum) {
      best_sum = sum;
      best = i;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Symbolic averaging

/// Per position, the symbol b minimising sum_a n_a * dist(a, b)^2, where n_a
/// is the total weight of members showing symbol a there. Among tied symbols
/// the one carrying the most member weight wins, then the lowest index.
/// Minimises the weighted sum of squared MINDIST to the members over all words
/// of the same shape.
inline SymbolicWord weighted_symbolic_average(std::span<const SymbolicWord> words, std::span<const double> weights,
                                              const Breakpoints& bp) {
  detail::check_weights(words.size(), weights);
  const SymbolicWord& first = words.front();
  for (const auto& w : words)
    if (!w.same_shape(first)) throw Error(ErrorCode::shape_mismatch, "symbolic average over mixed shapes");
  if (bp.alphabet != first.alphabet) throw Error(ErrorCode::shape_mismatch, "breakpoints do not match alphabet");

  const SymbolTable table(bp);
  const int alphabet = first.alphabet;
  SymbolicWord out = first;
  std::vector<double> mass(alphabet + 1);
  for (std::size_t pos = 0; pos < first.symbols.size(); ++pos) {
    std::fill(mass.begin(), mass.end(), 0.0);
    for (std::size_t i = 0; i < words.size(); ++i) mass[words[i].symbols[pos]] += detail::weight_at(weights, i);
    double total = 0.0;
    for (double m : mass) total += m;
    const double tie = 1e-12 * total * table.squared(1, alphabet);
    int best = 1;
    double best_obj = std::numeric_limits<double>::infinity();
    for (int beta = 1; beta <= alphabet; ++beta) {
      double obj = 0.0;
      for (int alpha = 1; alpha <= alphabet; ++alpha) obj += mass[alpha] * table.squared(alpha, beta);
      if (obj < best_obj - tie || (obj <= best_obj + tie && mass[beta] > mass[best])) {
        best_obj = obj;
        best = beta;
      }
    }
    out.symbols[pos] = std::uint8_t(best);
  }
  return out;
}

inline SymbolicWord weighted_symbolic_average(std::span<const SymbolicWord> words, std::span<const double> weights) {
  if (words.empty()) throw Error(ErrorCode::empty_cluster, "cannot average an empty set");
  return weighted_symbolic_average(words, weights, cached_breakpoints(words.front().alphabet));
}

inline SymbolicWord symbolic_average(std::span<const SymbolicWord> words, const Breakpoints& bp) {
  return weighted_symbolic_average(words, {}, bp);
}

inline SymbolicWord symbolic_average(std::span<const SymbolicWord> words) {
  return weighted_symbolic_average(words, {});
}

/// sum_i w_i * mindist(word_i, candidate)^2, the quantity the symbolic
/// average minimises.
inline double symbolic_objective(std::span<const SymbolicWord> words, const SymbolicWord& candidate,
                                 std::span<const double> weights = {}) {
  double obj = 0.0;
  for (std::size_t i = 0; i < words.size(); ++i) {
    const double d = mindist(words[i], candidate);
    obj += detail::weight_at(weights, i) * d * d;
  }
  return obj;
}

}  // namespace fluxmine
