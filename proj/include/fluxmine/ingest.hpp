#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fluxmine/date.hpp"
#include "fluxmine/error.hpp"

namespace fluxmine {

inline constexpr int kMinutesPerDay = 1440;
inline constexpr std::string_view kRecordHeader = "sensor_id,station_id,lane,date,minute,class,flux";

enum class Lane { driving, passing };
enum class MacroClass { light, heavy, all };
enum class LaneScope { driving, passing, all };

inline std::string_view to_string(Lane lane) { return lane == Lane::driving ? "driving" : "passing"; }

inline std::optional<Lane> parse_lane(std::string_view s) {
  if (s == "driving") return Lane::driving;
  if (s == "passing") return Lane::passing;
  return std::nullopt;
}

inline std::string_view to_string(MacroClass c) {
  switch (c) {
    case MacroClass::light: return "light";
    case MacroClass::heavy: return "heavy";
    case MacroClass::all: return "all";
  }
  return "?";
}

inline std::optional<MacroClass> parse_macro_class(std::string_view s) {
  if (s == "light") return MacroClass::light;
  if (s == "heavy") return MacroClass::heavy;
  if (s == "all") return MacroClass::all;
  return std::nullopt;
}

inline std::string_view to_string(LaneScope s) {
  switch (s) {
    case LaneScope::driving: return "driving";
    case LaneScope::passing: return "passing";
    case LaneScope::all: return "all";
  }
  return "?";
}

inline std::optional<LaneScope> parse_lane_scope(std::string_view s) {
  if (s == "driving") return LaneScope::driving;
  if (s == "passing") return LaneScope::passing;
  if (s == "all") return LaneScope::all;
  return std::nullopt;
}

inline LaneScope scope_of(Lane lane) { return lane == Lane::driving ? LaneScope::driving : LaneScope::passing; }

/// One per-minute reading of one vehicle class under one sensor (one lane).
/// vehicle_class 0 is the sensor-provided aggregate; 1..5 are TLS classes.
struct MinuteRecord {
  std::string sensor_id;
  std::string station_id;
  Lane lane = Lane::driving;
  Date date;
  int minute = 0;
  int vehicle_class = 0;
  std::optional<std::int32_t> flux;  // nullopt = marked missing

  bool operator==(const MinuteRecord&) const = default;
};

using FluxValue = std::optional<std::int32_t>;

/// One sensor-day of per-minute flux counts. Always kMinutesPerDay long.
struct DailySeries {
  std::string sensor_id;
  std::string station_id;
  Date date;
  MacroClass macro_class = MacroClass::all;
  LaneScope lane_scope = LaneScope::all;
  std::vector<FluxValue> values = std::vector<FluxValue>(kMinutesPerDay);

  bool complete() const {
    for (const auto& v : values)
      if (!v) return false;
    return true;
  }

  /// Sum over observed minutes.
  std::int64_t total() const {
    std::int64_t sum = 0;
    for (const auto& v : values)
      if (v) sum += *v;
    return sum;
  }

  /// Real-valued copy; missing minutes become NaN.
  std::vector<double> as_real() const {
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
      out[i] = values[i] ? double(*values[i]) : std::nan("");
    return out;
  }
};

// ---------------------------------------------------------------------------
// CSV parsing

enum class RowErrorKind { malformed, unknown_token, out_of_range };

struct RowError {
  std::size_t line = 0;  // 1-based, header is line 1
  RowErrorKind kind = RowErrorKind::malformed;
  std::string message;
};

struct ParseReport {
  std::vector<MinuteRecord> records;
  std::vector<RowError> errors;

  std::size_t rejected() const { return errors.size(); }
};

namespace detail {

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

template <class Int>
std::optional<Int> parse_int(std::string_view s) {
  Int v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

inline std::string_view trim_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

}  // namespace detail

/// Parses the record CSV. A wrong header is fatal (throws parse_error); bad
/// rows are skipped and listed in the report with their line number.
inline ParseReport parse_records(std::istream& in) {
  ParseReport report;
  std::string line;
  if (!std::getline(in, line) || detail::trim_cr(line) != kRecordHeader)
    throw Error(ErrorCode::parse_error, "expected header '" + std::string(kRecordHeader) + "'");

  std::size_t lineno = 1;
  auto reject = [&](RowErrorKind kind, std::string msg) {
    report.errors.push_back({lineno, kind, "line " + std::to_string(lineno) + ": " + std::move(msg)});
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view row = detail::trim_cr(line);
    if (row.empty()) continue;
    auto f = detail::split_commas(row);
    if (f.size() != 7) {
      reject(RowErrorKind::malformed, "expected 7 fields, got " + std::to_string(f.size()));
      continue;
    }
    MinuteRecord rec;
    rec.sensor_id = std::string(f[0]);
    rec.station_id = std::string(f[1]);
    if (rec.sensor_id.empty() || rec.station_id.empty()) {
      reject(RowErrorKind::malformed, "empty sensor or station id");
      continue;
    }
    auto lane = parse_lane(f[2]);
    if (!lane) {
      reject(RowErrorKind::unknown_token, "unknown lane '" + std::string(f[2]) + "'");
      continue;
    }
    rec.lane = *lane;
    auto date = Date::parse(f[3]);
    if (!date) {
      reject(RowErrorKind::malformed, "bad date '" + std::string(f[3]) + "'");
      continue;
    }
    rec.date = *date;
    auto minute = detail::parse_int<int>(f[4]);
    if (!minute) {
      reject(RowErrorKind::malformed, "bad minute '" + std::string(f[4]) + "'");
      continue;
    }
    if (*minute < 0 || *minute >= kMinutesPerDay) {
      reject(RowErrorKind::out_of_range, "minute " + std::to_string(*minute) + " outside [0,1439]");
      continue;
    }
    rec.minute = *minute;
    auto cls = detail::parse_int<int>(f[5]);
    if (!cls || *cls < 0 || *cls > 5) {
      reject(RowErrorKind::unknown_token, "unknown class '" + std::string(f[5]) + "'");
      continue;
    }
    rec.vehicle_class = *cls;
    if (!f[6].empty()) {
      auto flux = detail::parse_int<std::int32_t>(f[6]);
      if (!flux) {
        reject(RowErrorKind::malformed, "bad flux '" + std::string(f[6]) + "'");
        continue;
      }
      if (*flux < 0) {
        reject(RowErrorKind::out_of_range, "negative flux");
        continue;
      }
      rec.flux = *flux;
    }
    report.records.push_back(std::move(rec));
  }
  return report;
}

inline void write_record(std::ostream& out, const MinuteRecord& r) {
  out << r.sensor_id << ',' << r.station_id << ',' << to_string(r.lane) << ',' << r.date.iso() << ','
      << r.minute << ',' << r.vehicle_class << ',';
  if (r.flux) out << *r.flux;
  out << '\n';
}

inline void write_records(std::ostream& out, std::span<const MinuteRecord> records) {
  out << kRecordHeader << '\n';
  for (const auto& r : records) write_record(out, r);
}

// ---------------------------------------------------------------------------
// Class aggregation

struct ClassAggregates {
  DailySeries light;
  DailySeries heavy;
  DailySeries all;
};

inline bool is_light_class(int c) { return c == 1 || c == 2; }
inline bool is_heavy_class(int c) { return c >= 3 && c <= 5; }

/// Builds light ({1,2}), heavy ({3,4,5}) and all series for one sensor-day.
/// A minute is missing in an aggregate when any contributing class is absent
/// or marked missing there. Class-0 rows are ignored and recomputed.
inline ClassAggregates aggregate_classes(std::span<const MinuteRecord> records) {
  // per class 1..5: value per minute, absent until seen
  std::array<std::vector<FluxValue>, 6> per_class;
  for (auto& v : per_class) v.assign(kMinutesPerDay, std::nullopt);
  std::array<std::vector<bool>, 6> seen;
  for (auto& v : seen) v.assign(kMinutesPerDay, false);

  for (const auto& r : records) {
    if (r.vehicle_class < 1 || r.vehicle_class > 5) continue;
    per_class[r.vehicle_class][r.minute] = r.flux;
    seen[r.vehicle_class][r.minute] = true;
  }

  ClassAggregates out;
  for (DailySeries* s : {&out.light, &out.heavy, &out.all}) {
    if (!records.empty()) {
      s->sensor_id = records.front().sensor_id;
      s->station_id = records.front().station_id;
      s->date = records.front().date;
      s->lane_scope = scope_of(records.front().lane);
    }
  }
  out.light.macro_class = MacroClass::light;
  out.heavy.macro_class = MacroClass::heavy;
  out.all.macro_class = MacroClass::all;

  auto sum_classes = [&](int lo, int hi, int minute) -> FluxValue {
    std::int32_t sum = 0;
    for (int c = lo; c <= hi; ++c) {
      if (!seen[c][minute] || !per_class[c][minute]) return std::nullopt;
      sum += *per_class[c][minute];
    }
    return sum;
  };
  for (int m = 0; m < kMinutesPerDay; ++m) {
    out.light.values[m] = sum_classes(1, 2, m);
    out.heavy.values[m] = sum_classes(3, 5, m);
    if (out.light.values[m] && out.heavy.values[m])
      out.all.values[m] = *out.light.values[m] + *out.heavy.values[m];
  }
  return out;
}

/// Minute-wise sum of same-day series (missing propagates). Used for
/// station-level lane aggregation.
inline DailySeries sum_series(const DailySeries& a, const DailySeries& b) {
  DailySeries out = a;
  for (int m = 0; m < kMinutesPerDay; ++m) {
    if (a.values[m] && b.values[m])
      out.values[m] = *a.values[m] + *b.values[m];
    else
      out.values[m] = std::nullopt;
  }
  if (a.lane_scope != b.lane_scope) out.lane_scope = LaneScope::all;
  return out;
}

using SensorDayKey = std::pair<std::string, Date>;

/// Groups records by (sensor_id, date), ordered by key.
inline std::map<SensorDayKey, std::vector<MinuteRecord>> group_by_sensor_day(
    std::span<const MinuteRecord> records) {
  std::map<SensorDayKey, std::vector<MinuteRecord>> groups;
  for (const auto& r : records) groups[{r.sensor_id, r.date}].push_back(r);
  return groups;
}

/// Groups records by (station_id, date), ordered by key.
inline std::map<SensorDayKey, std::vector<MinuteRecord>> group_by_station_day(
    std::span<const MinuteRecord> records) {
  std::map<SensorDayKey, std::vector<MinuteRecord>> groups;
  for (const auto& r : records) groups[{r.station_id, r.date}].push_back(r);
  return groups;
}

/// Aggregates every sensor-day in the stream and returns the series of the
/// requested macro class, in (sensor_id, date) order.
inline std::vector<DailySeries> assemble_daily_series(std::span<const MinuteRecord> records,
                                                      MacroClass macro = MacroClass::all) {
  std::vector<DailySeries> out;
  for (const auto& [key, recs] : group_by_sensor_day(records)) {
    auto agg = aggregate_classes(recs);
    switch (macro) {
      case MacroClass::light: out.push_back(std::move(agg.light)); break;
      case MacroClass::heavy: out.push_back(std::move(agg.heavy)); break;
      case MacroClass::all: out.push_back(std::move(agg.all)); break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cleaning

enum class RemovalReason { missing, low_flux };

inline std::string_view to_string(RemovalReason r) { return r == RemovalReason::missing ? "missing" : "low_flux"; }

struct Removal {
  DailySeries series;
  RemovalReason reason;
};

struct CleanResult {
  std::vector<DailySeries> kept;
  std::vector<Removal> removed;
};

inline constexpr std::int64_t kDefaultMinTotalFlux = 50;

inline std::optional<RemovalReason> removal_reason(const DailySeries& s, std::int64_t min_total_flux) {
  if (!s.complete()) return RemovalReason::missing;
  if (s.total() <= min_total_flux) return RemovalReason::low_flux;
  return std::nullopt;
}

/// Drops series with any missing minute, then series whose total flux does
/// not exceed min_total_flux.
inline CleanResult clean_dataset(std::vector<DailySeries> series, std::int64_t min_total_flux = kDefaultMinTotalFlux) {
  if (min_total_flux < 0) throw Error(ErrorCode::invalid_argument, "min_total_flux must be >= 0");
  CleanResult result;
  for (auto& s : series) {
    if (auto reason = removal_reason(s, min_total_flux))
      result.removed.push_back({std::move(s), *reason});
    else
      result.kept.push_back(std::move(s));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Multivariate bundles

enum class MultivariateKind { T1, T2, T3 };

inline std::string_view to_string(MultivariateKind k) {
  switch (k) {
    case MultivariateKind::T1: return "T1";
    case MultivariateKind::T2: return "T2";
    case MultivariateKind::T3: return "T3";
  }
  return "?";
}

inline std::optional<MultivariateKind> parse_multivariate_kind(std::string_view s) {
  if (s == "T1" || s == "t1") return MultivariateKind::T1;
  if (s == "T2" || s == "t2") return MultivariateKind::T2;
  if (s == "T3" || s == "t3") return MultivariateKind::T3;
  return std::nullopt;
}

inline std::size_t feature_count(MultivariateKind k) { return k == MultivariateKind::T3 ? 3 : 2; }

/// Feature roles:
///   T1 = (driving heavy, driving light)
///   T2 = (driving heavy, all-lanes light)
///   T3 = (driving heavy, driving light, passing light)
struct MultivariateSeries {
  MultivariateKind kind = MultivariateKind::T1;
  std::string station_id;
  Date date;
  std::vector<DailySeries> features;
};

struct BundleOutcome {
  std::optional<MultivariateSeries> bundle;
  std::optional<RemovalReason> removed;  // set when cleaning rejected the bundle
};

/// Assembles one station-day bundle. Several sensors on the same lane are
/// summed. Throws lane_absent when a lane the kind needs has no records.
inline BundleOutcome build_multivariate(std::span<const MinuteRecord> station_day_records, MultivariateKind kind,
                                        std::int64_t min_total_flux = kDefaultMinTotalFlux) {
  std::optional<ClassAggregates> driving, passing;
  for (const auto& [key, recs] : group_by_sensor_day(station_day_records)) {
    auto agg = aggregate_classes(recs);
    auto& slot = recs.front().lane == Lane::driving ? driving : passing;
    if (!slot) {
      slot = std::move(agg);
    } else {
      slot->light = sum_series(slot->light, agg.light);
      slot->heavy = sum_series(slot->heavy, agg.heavy);
      slot->all = sum_series(slot->all, agg.all);
    }
  }
  if (!driving) throw Error(ErrorCode::lane_absent, "station-day has no driving-lane records");
  if (kind == MultivariateKind::T3 && !passing)
    throw Error(ErrorCode::lane_absent, "T3 requires passing-lane records");

  MultivariateSeries mv;
  mv.kind = kind;
  mv.station_id = driving->heavy.station_id;
  mv.date = driving->heavy.date;
  mv.features.push_back(driving->heavy);
  switch (kind) {
    case MultivariateKind::T1: mv.features.push_back(driving->light); break;
    case MultivariateKind::T2: {
      DailySeries light = passing ? sum_series(driving->light, passing->light) : driving->light;
      light.lane_scope = LaneScope::all;
      mv.features.push_back(std::move(light));
      break;
    }
    case MultivariateKind::T3:
      mv.features.push_back(driving->light);
      mv.features.push_back(passing->light);
      break;
  }
  BundleOutcome out;
  for (const auto& f : mv.features) {
    if (auto reason = removal_reason(f, min_total_flux)) {
      out.removed = reason;
      return out;
    }
  }
  out.bundle = std::move(mv);
  return out;
}

// ---------------------------------------------------------------------------
// Smoothing (plots only)

inline constexpr double kDefaultSmoothingSigma = 10.0;

/// Gaussian smoothing with the kernel truncated at 4 sigma and renormalised
/// over the samples actually available (edges, NaN gaps).
inline std::vector<double> gaussian_smooth(std::span<const double> series, double sigma = kDefaultSmoothingSigma) {
  if (!(sigma > 0.0)) throw Error(ErrorCode::invalid_sigma, "sigma must be positive");
  const int radius = int(std::ceil(4.0 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  for (int k = -radius; k <= radius; ++k) kernel[k + radius] = std::exp(-0.5 * (k / sigma) * (k / sigma));

  const int n = int(series.size());
  std::vector<double> out(n, std::nan(""));
  for (int i = 0; i < n; ++i) {
    double acc = 0.0, wsum = 0.0;
    for (int k = -radius; k <= radius; ++k) {
      const int j = i + k;
      if (j < 0 || j >= n || std::isnan(series[j])) continue;
      acc += kernel[k + radius] * series[j];
      wsum += kernel[k + radius];
    }
    if (wsum > 0.0) out[i] = acc / wsum;
  }
  return out;
}

inline std::vector<double> gaussian_smooth(const DailySeries& series, double sigma = kDefaultSmoothingSigma) {
  auto real = series.as_real();
  return gaussian_smooth(std::span<const double>(real), sigma);
}

}  // namespace fluxmine
