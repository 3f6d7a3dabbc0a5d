#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fluxmine/clustering.hpp"
#include "fluxmine/date.hpp"
#include "fluxmine/error.hpp"
#include "fluxmine/parallel.hpp"
#include "fluxmine/spaces.hpp"

namespace fluxmine {

// ---------------------------------------------------------------------------
// Per-detector scores

/// Distance to the closest centroid.
template <ClusterSpace Space>
double hard_score(const typename Space::Point& point, std::span<const typename Space::Point> centroids,
                  const Space& space) {
  if (centroids.empty()) throw Error(ErrorCode::invalid_argument, "model has no centroids");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : centroids) best = std::min(best, space.distance(point, c));
  return best;
}

/// sum_c u_c * d_c.
inline double membership_weighted(std::span<const double> u, std::span<const double> d) {
  if (u.size() != d.size()) throw Error(ErrorCode::shape_mismatch, "one membership per distance required");
  double score = 0.0;
  for (std::size_t c = 0; c < u.size(); ++c) score += u[c] * d[c];
  return score;
}

/// Membership-weighted mean distance to the centroids, with memberships from
/// the fuzzy c-means formula.
template <ClusterSpace Space>
double soft_score(const typename Space::Point& point, std::span<const typename Space::Point> centroids,
                  const Space& space, double m = 2.0) {
  if (centroids.empty()) throw Error(ErrorCode::invalid_argument, "model has no centroids");
  std::vector<double> d(centroids.size()), u(centroids.size());
  for (std::size_t c = 0; c < centroids.size(); ++c) d[c] = space.distance(point, centroids[c]);
  fcm_memberships(d, m, u);
  return membership_weighted(u, d);
}

/// A trained model reduced to "raw daily series -> anomaly score".
struct Detector {
  std::string name;
  std::function<double(std::span<const double>)> score;
};

/// Wraps a model; fuzzy models score softly, hard ones by nearest centroid.
template <ClusterSpace Space, class Encoder>
Detector make_detector(std::string name, const ClusterModel<typename Space::Point>& model, Space space,
                       Encoder encode, RepresentationParams params, double m = 2.0) {
  auto centroids = model.centroids;
  if (model.method == Engine::fuzzy) {
    return {std::move(name), [=](std::span<const double> raw) {
              return soft_score<Space>(encode(raw, params), centroids, space, m);
            }};
  }
  return {std::move(name), [=](std::span<const double> raw) {
            return hard_score<Space>(encode(raw, params), centroids, space);
          }};
}

// ---------------------------------------------------------------------------
// Score aggregation

/// Detector rows x series columns for one day.
struct ScoreMatrix {
  std::vector<std::string> detectors;
  Date day;
  std::vector<std::string> columns;
  std::vector<double> values;  // row-major, detectors.size() x columns.size()

  std::size_t rows() const { return detectors.size(); }
  std::size_t cols() const { return columns.size(); }
  double at(std::size_t i, std::size_t j) const { return values[i * cols() + j]; }
};

struct Aggregate {
  std::vector<double> values;
  std::vector<std::size_t> degenerate_rows;  // rows with no spread (all equal)
};

/// AGG: each row divided by its maximum, then averaged per column (higher is
/// more anomalous). An all-zero row contributes 0. With `minmax`, rows are
/// rescaled by (x - min) / (max - min) instead and a constant row contributes 0.
inline Aggregate agg(const ScoreMatrix& a, bool minmax = false) {
  const std::size_t l = a.rows(), n = a.cols();
  Aggregate out{std::vector<double>(n, 0.0), {}};
  if (l == 0 || n == 0) return out;
  for (std::size_t i = 0; i < l; ++i) {
    double lo = a.at(i, 0), hi = a.at(i, 0);
    for (std::size_t j = 1; j < n; ++j) {
      lo = std::min(lo, a.at(i, j));
      hi = std::max(hi, a.at(i, j));
    }
    if (lo == hi) out.degenerate_rows.push_back(i);
    if (minmax) {
      if (hi > lo)
        for (std::size_t j = 0; j < n; ++j) out.values[j] += (a.at(i, j) - lo) / (hi - lo);
    } else if (hi > 0.0) {
      for (std::size_t j = 0; j < n; ++j) out.values[j] += a.at(i, j) / hi;
    }
  }
  for (double& v : out.values) v /= double(l);
  return out;
}

/// Ranks of `row` from 1 (largest) to N (smallest); ties share their mean rank.
inline std::vector<double> descending_ranks(std::span<const double> row) {
  const std::size_t n = row.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return row[x] > row[y]; });
  std::vector<double> ranks(n);
  for (std::size_t s = 0; s < n;) {
    std::size_t e = s;
    while (e + 1 < n && row[order[e + 1]] == row[order[s]]) ++e;
    const double mean_rank = (double(s + 1) + double(e + 1)) / 2.0;
    for (std::size_t t = s; t <= e; ++t) ranks[order[t]] = mean_rank;
    s = e + 1;
  }
  return ranks;
}

/// POS: per-row ranks rescaled to (r - 1) / (N - 1), averaged per column
/// (lower is more anomalous). A single-series day yields 0.
inline Aggregate pos(const ScoreMatrix& a) {
  const std::size_t l = a.rows(), n = a.cols();
  Aggregate out{std::vector<double>(n, 0.0), {}};
  if (l == 0 || n < 2) return out;
  for (std::size_t i = 0; i < l; ++i) {
    std::span<const double> row(a.values.data() + i * n, n);
    auto ranks = descending_ranks(row);
    if (std::all_of(row.begin(), row.end(), [&](double v) { return v == row[0]; })) out.degenerate_rows.push_back(i);
    for (std::size_t j = 0; j < n; ++j) out.values[j] += (ranks[j] - 1.0) / double(n - 1);
  }
  for (double& v : out.values) v /= double(l);
  return out;
}

struct TopSets {
  std::vector<std::size_t> top_agg;  // column indices, rank order
  std::vector<std::size_t> top_pos;
};

/// k largest AGG (descending) and k smallest POS (ascending); ties broken by
/// series identifier.
inline TopSets top_sets(std::span<const std::string> ids, std::span<const double> agg_values,
                        std::span<const double> pos_values, std::size_t k) {
  const std::size_t n = ids.size();
  k = std::min(k, n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  TopSets out;
  auto by_agg = order;
  std::sort(by_agg.begin(), by_agg.end(), [&](std::size_t x, std::size_t y) {
    if (agg_values[x] != agg_values[y]) return agg_values[x] > agg_values[y];
    return ids[x] < ids[y];
  });
  out.top_agg.assign(by_agg.begin(), by_agg.begin() + k);
  auto by_pos = order;
  std::sort(by_pos.begin(), by_pos.end(), [&](std::size_t x, std::size_t y) {
    if (pos_values[x] != pos_values[y]) return pos_values[x] < pos_values[y];
    return ids[x] < ids[y];
  });
  out.top_pos.assign(by_pos.begin(), by_pos.begin() + k);
  return out;
}

// ---------------------------------------------------------------------------
// History, confidence, severity

inline constexpr std::size_t kDefaultTopK = 3;
inline constexpr std::size_t kDefaultMinRepeats = 2;  // g
inline constexpr int kDefaultHorizonDays = 7;         // h

/// Per-sensor dates on which the sensor was reported.
struct AnomalyHistory {
  std::map<std::string, std::set<Date>> flagged;

  /// Number of distinct days in [day - h, day - 1] on which `sensor` was flagged.
  std::size_t prior_flag_days(const std::string& sensor, const Date& day, int h) const {
    auto it = flagged.find(sensor);
    if (it == flagged.end()) return 0;
    return std::size_t(std::count_if(it->second.begin(), it->second.end(), [&](const Date& d) {
      const int age = day.days_since(d);
      return age >= 1 && age <= h;
    }));
  }

  /// Drops every date older than h days before `day`.
  void prune(const Date& day, int h) {
    for (auto it = flagged.begin(); it != flagged.end();) {
      auto& dates = it->second;
      dates.erase(dates.begin(), dates.lower_bound(day.plus_days(-h)));
      it = dates.empty() ? flagged.erase(it) : std::next(it);
    }
  }

  bool operator==(const AnomalyHistory&) const = default;
};

/// Inverted position (k for first place down to 1 for the k-th) of each set
/// the series belongs to, plus k when it is a repeat offender.
inline int confidence_score(std::optional<std::size_t> agg_rank, std::optional<std::size_t> pos_rank,
                            bool repeat_offender, std::size_t k) {
  auto inverted = [&](std::optional<std::size_t> r) { return r && *r >= 1 && *r <= k ? int(k - *r + 1) : 0; };
  return inverted(agg_rank) + inverted(pos_rank) + (repeat_offender ? int(k) : 0);
}

/// Confidence of `sensor` on `day` given the ranked top sets (sensor ids) and
/// the flags of the previous h days; the history bonus needs >= g of them.
inline int confidence(const std::string& sensor, std::span<const std::string> top_agg,
                      std::span<const std::string> top_pos, const AnomalyHistory& history, const Date& day,
                      std::size_t k = kDefaultTopK, std::size_t g = kDefaultMinRepeats, int h = kDefaultHorizonDays) {
  auto rank_in = [&](std::span<const std::string> set) -> std::optional<std::size_t> {
    auto it = std::find(set.begin(), set.end(), sensor);
    if (it == set.end()) return std::nullopt;
    return std::size_t(it - set.begin()) + 1;
  };
  return confidence_score(rank_in(top_agg), rank_in(top_pos), history.prior_flag_days(sensor, day, h) >= g, k);
}

enum class Severity { none, mild, moderate, severe };

inline std::string_view to_string(Severity s) {
  switch (s) {
    case Severity::none: return "none";
    case Severity::mild: return "mild";
    case Severity::moderate: return "moderate";
    case Severity::severe: return "severe";
  }
  return "?";
}

/// none at 0, mild in [1,k], moderate in (k,2k], severe in (2k,3k].
inline Severity severity(int c, std::size_t k = kDefaultTopK) {
  const int kk = int(k);
  if (c < 0 || c > 3 * kk) throw Error(ErrorCode::invalid_confidence, "confidence " + std::to_string(c));
  if (c == 0) return Severity::none;
  if (c <= kk) return Severity::mild;
  if (c <= 2 * kk) return Severity::moderate;
  return Severity::severe;
}

// ---------------------------------------------------------------------------
// Daily pipeline

struct AnomalyConfig {
  std::size_t k = kDefaultTopK;
  std::size_t g = kDefaultMinRepeats;
  int h = kDefaultHorizonDays;
  bool agg_minmax = false;
};

/// One series of the day's dataset.
struct DayEntry {
  std::string sensor_id;
  std::vector<double> values;
};

struct SeriesVerdict {
  std::string sensor_id;
  Date date;
  std::vector<double> scores;  // one per detector
  double agg = 0.0;
  double pos = 0.0;
  std::optional<std::size_t> top_agg_rank;  // 1-based
  std::optional<std::size_t> top_pos_rank;
  int confidence = 0;
  Severity severity = Severity::none;
};

struct AnomalyReport {
  Date day;
  std::vector<std::string> detectors;
  std::vector<SeriesVerdict> entries;     // same order as the input
  std::vector<std::string> flagged;       // topAGG ∪ topPOS, sorted
  bool degenerate_day = false;            // one series, or every detector row tied
  std::vector<std::size_t> degenerate_rows;
};

/// Scores every series with every detector (parallel over series).
inline ScoreMatrix score_day(const Date& day, std::span<const DayEntry> dataset, std::span<const Detector> detectors) {
  ScoreMatrix a;
  a.day = day;
  for (const auto& d : detectors) a.detectors.push_back(d.name);
  for (const auto& e : dataset) a.columns.push_back(e.sensor_id);
  const std::size_t l = detectors.size(), n = dataset.size();
  a.values.assign(l * n, 0.0);
  parallel_for(n, [&](std::size_t j) {
    for (std::size_t i = 0; i < l; ++i) a.values[i * n + j] = detectors[i].score(dataset[j].values);
  });
  for (double v : a.values)
    if (!(v >= 0.0) || !std::isfinite(v)) throw Error(ErrorCode::invalid_argument, "detector produced an invalid score");
  return a;
}

/// Aggregation, top sets, confidence and severity from a day's score matrix.
/// Returns the report and the history with this day's flags added and
/// entries beyond the horizon dropped.
inline std::pair<AnomalyReport, AnomalyHistory> evaluate_day(const ScoreMatrix& a, const AnomalyHistory& history,
                                                             const AnomalyConfig& cfg) {
  AnomalyReport report;
  report.day = a.day;
  report.detectors = a.detectors;
  AnomalyHistory updated = history;
  const std::size_t n = a.cols();
  if (n == 0) {
    updated.prune(a.day, cfg.h);
    return {std::move(report), std::move(updated)};
  }
  auto agg_values = agg(a, cfg.agg_minmax);
  auto pos_values = pos(a);
  auto tops = top_sets(a.columns, agg_values.values, pos_values.values, cfg.k);
  report.degenerate_rows = pos_values.degenerate_rows;
  report.degenerate_day = n == 1 || (a.rows() > 0 && pos_values.degenerate_rows.size() == a.rows());

  std::set<std::string> flagged;
  for (std::size_t j : tops.top_agg) flagged.insert(a.columns[j]);
  for (std::size_t j : tops.top_pos) flagged.insert(a.columns[j]);

  for (std::size_t j = 0; j < n; ++j) {
    SeriesVerdict v;
    v.sensor_id = a.columns[j];
    v.date = a.day;
    for (std::size_t i = 0; i < a.rows(); ++i) v.scores.push_back(a.at(i, j));
    v.agg = agg_values.values[j];
    v.pos = pos_values.values[j];
    auto find_rank = [&](const std::vector<std::size_t>& set) -> std::optional<std::size_t> {
      auto it = std::find(set.begin(), set.end(), j);
      if (it == set.end()) return std::nullopt;
      return std::size_t(it - set.begin()) + 1;
    };
    v.top_agg_rank = find_rank(tops.top_agg);
    v.top_pos_rank = find_rank(tops.top_pos);
    const bool repeat = history.prior_flag_days(v.sensor_id, a.day, cfg.h) >= cfg.g;
    v.confidence = confidence_score(v.top_agg_rank, v.top_pos_rank, repeat, cfg.k);
    v.severity = severity(v.confidence, cfg.k);
    report.entries.push_back(std::move(v));
  }
  report.flagged.assign(flagged.begin(), flagged.end());
  for (const auto& s : flagged) updated.flagged[s].insert(a.day);
  updated.prune(a.day, cfg.h);
  return {std::move(report), std::move(updated)};
}

/// Full daily pass: score matrix, AGG/POS, top sets, confidence, severity.
inline std::pair<AnomalyReport, AnomalyHistory> run_day(const Date& day, std::span<const DayEntry> dataset,
                                                        std::span<const Detector> detectors,
                                                        const AnomalyHistory& history, const AnomalyConfig& cfg = {}) {
  return evaluate_day(score_day(day, dataset, detectors), history, cfg);
}

}  // namespace fluxmine
