#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fluxmine/date.hpp"
#include "fluxmine/error.hpp"
#include "fluxmine/ingest.hpp"

namespace fluxmine::synth {

struct Hump {
  double center = 0.0;     // minute of day
  double width = 90.0;     // standard deviation, minutes
  double amplitude = 0.0;  // vehicles/min at the peak
};

struct ProfileSpec {
  double base_level = 0.5;
  std::vector<Hump> humps{{480.0, 90.0, 8.0}, {1050.0, 90.0, 8.0}};
  double weekday_scale = 1.0;
  double weekend_scale = 0.7;
  double heavy_weekend_scale = 0.15;  // extra factor on classes 3..5 on weekends
  bool noise = true;
  std::uint64_t rng_seed = 0;

  void validate() const {
    if (!(base_level >= 0.0) || !(weekday_scale >= 0.0) || !(weekend_scale >= 0.0) ||
        !(heavy_weekend_scale >= 0.0))
      throw Error(ErrorCode::invalid_profile, "levels and scales must be >= 0");
    for (const auto& h : humps) {
      if (!(h.amplitude >= 0.0)) throw Error(ErrorCode::invalid_profile, "hump amplitude must be >= 0");
      if (!(h.center >= 0.0 && h.center <= kMinutesPerDay - 1))
        throw Error(ErrorCode::invalid_profile, "hump center outside [0,1439]");
      if (!(h.width > 0.0)) throw Error(ErrorCode::invalid_profile, "hump width must be > 0");
    }
  }

  /// Expected total vehicles/min at `minute` before day-type scaling.
  double expected(int minute) const {
    double v = base_level;
    for (const auto& h : humps) {
      const double z = (minute - h.center) / h.width;
      v += h.amplitude * std::exp(-0.5 * z * z);
    }
    return v;
  }
};

/// Share of each TLS class 1..5 in the total (index 0 unused).
struct ClassMix {
  std::array<double, 6> share{0.0, 0.70, 0.15, 0.08, 0.05, 0.02};

  void validate() const {
    double total = 0.0;
    for (int c = 1; c <= 5; ++c) {
      if (!(share[c] >= 0.0)) throw Error(ErrorCode::invalid_profile, "class shares must be >= 0");
      total += share[c];
    }
    if (!(total > 0.0)) throw Error(ErrorCode::invalid_profile, "class shares sum to zero");
  }
};

struct SensorSpec {
  std::string sensor_id;
  std::string station_id;
  Lane lane = Lane::driving;
  ProfileSpec profile;
};

/// One sensor-day of per-class per-minute counts (classes 1..5).
struct SensorDay {
  std::string sensor_id;
  std::string station_id;
  Lane lane = Lane::driving;
  Date date;
  std::array<std::vector<FluxValue>, 6> flux;

  /// Macro-class series as reals; a minute is NaN when any class is missing.
  std::vector<double> series(MacroClass mc = MacroClass::all) const {
    const int lo = mc == MacroClass::heavy ? 3 : 1;
    const int hi = mc == MacroClass::light ? 2 : 5;
    std::vector<double> out(kMinutesPerDay, 0.0);
    for (int m = 0; m < kMinutesPerDay; ++m) {
      for (int c = lo; c <= hi; ++c) {
        if (!flux[c][m]) {
          out[m] = std::nan("");
          break;
        }
        out[m] += *flux[c][m];
      }
    }
    return out;
  }

  bool operator==(const SensorDay&) const = default;
};

namespace detail {
inline std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace detail

/// Deterministic clean stream: for every sensor and every day in
/// [first, first + days), per-class counts drawn around the profile.
inline std::vector<SensorDay> generate(std::span<const SensorSpec> sensors, const Date& first, int days,
                                       const ClassMix& mix = {}) {
  if (days < 0) throw Error(ErrorCode::invalid_profile, "negative day count");
  mix.validate();
  double mix_total = 0.0;
  for (int c = 1; c <= 5; ++c) mix_total += mix.share[c];
  for (const auto& s : sensors) s.profile.validate();

  std::vector<SensorDay> out;
  out.reserve(sensors.size() * std::size_t(days));
  for (std::size_t si = 0; si < sensors.size(); ++si) {
    const auto& spec = sensors[si];
    const auto& p = spec.profile;
    for (int d = 0; d < days; ++d) {
      SensorDay day{spec.sensor_id, spec.station_id, spec.lane, first.plus_days(d), {}};
      const bool weekend = day.date.is_weekend();
      const double scale = weekend ? p.weekend_scale : p.weekday_scale;
      std::mt19937_64 rng(detail::splitmix(detail::splitmix(p.rng_seed ^ (si * 0x100000001b3ULL)) + std::uint64_t(d)));
      for (int c = 1; c <= 5; ++c) {
        day.flux[c].assign(kMinutesPerDay, 0);
        const double class_scale =
            scale * mix.share[c] / mix_total * (weekend && is_heavy_class(c) ? p.heavy_weekend_scale : 1.0);
        for (int m = 0; m < kMinutesPerDay; ++m) {
          const double lambda = p.expected(m) * class_scale;
          std::int32_t v = 0;
          if (p.noise) {
            if (lambda > 0.0) v = std::poisson_distribution<std::int32_t>(lambda)(rng);
          } else {
            v = std::int32_t(std::lround(lambda));
          }
          day.flux[c][m] = v;
        }
      }
      out.push_back(std::move(day));
    }
  }
  return out;
}

/// A fleet of n sensors in pairs (driving, passing) per station. Sensors
/// follow four daily shapes (commuter, morning-heavy, midday, evening) at two
/// volume levels, with small per-sensor timing and volume variation.
inline std::vector<SensorSpec> archetype_fleet(int n, std::uint64_t seed) {
  if (n < 0) throw Error(ErrorCode::invalid_profile, "negative sensor count");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-5, 5), scale(0.95, 1.05);
  std::vector<SensorSpec> out;
  for (int i = 0; i < n; ++i) {
    SensorSpec s{"S" + std::to_string(100 + i), "ST" + std::to_string(i / 2), i % 2 ? Lane::passing : Lane::driving,
                 {}};
    const double a = 8.0 * scale(rng) * ((i / 4) % 2 ? 1.25 : 0.8);
    switch (i % 4) {
      case 0: s.profile.humps = {{480 + jitter(rng), 80, a}, {1050 + jitter(rng), 90, a}}; break;
      case 1: s.profile.humps = {{450 + jitter(rng), 60, 1.4 * a}, {1020 + jitter(rng), 120, 0.6 * a}}; break;
      case 2: s.profile.humps = {{780 + jitter(rng), 180, a}}; break;
      default: s.profile.humps = {{1080 + jitter(rng), 100, 1.2 * a}}; break;
    }
    s.profile.rng_seed = seed * 1000 + std::uint64_t(i);
    out.push_back(s);
  }
  return out;
}

inline std::vector<MinuteRecord> to_records(std::span<const SensorDay> stream) {
  std::vector<MinuteRecord> out;
  out.reserve(stream.size() * 5 * kMinutesPerDay);
  for (const auto& day : stream)
    for (int m = 0; m < kMinutesPerDay; ++m)
      for (int c = 1; c <= 5; ++c)
        out.push_back({day.sensor_id, day.station_id, day.lane, day.date, m, c, day.flux[c][m]});
  return out;
}

inline void write_csv(std::ostream& out, std::span<const SensorDay> stream) {
  out << kRecordHeader << '\n';
  for (const auto& day : stream)
    for (int m = 0; m < kMinutesPerDay; ++m)
      for (int c = 1; c <= 5; ++c)
        write_record(out, {day.sensor_id, day.station_id, day.lane, day.date, m, c, day.flux[c][m]});
}

// ---------------------------------------------------------------------------
// Anomaly injection

struct ZeroRun {
  int start = 0;
  int length = 0;
};
struct Spike {
  int minute = 0;
  double magnitude = 10.0;
};
struct ConstantReading {
  std::int32_t value = 0;
};
struct CongestionDip {
  int start = 0;
  int length = 0;
  double residual = 0.1;  // fraction of the flux that still passes
};
struct MissingRun {
  int start = 0;
  int length = 0;
};

using InjectionKind = std::variant<ZeroRun, Spike, ConstantReading, CongestionDip, MissingRun>;

struct InjectionSpec {
  InjectionKind kind;
  std::string sensor_id;
  Date date;
};

inline std::string kind_name(const InjectionKind& k) {
  static constexpr std::array<const char*, 5> names{"zero_run", "spike", "constant_reading", "congestion_dip",
                                                    "missing_run"};
  return names[k.index()];
}

inline std::map<std::string, double> kind_params(const InjectionKind& k) {
  return std::visit(
      [](const auto& v) -> std::map<std::string, double> {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ZeroRun> || std::is_same_v<T, MissingRun>)
          return {{"start", v.start}, {"length", v.length}};
        else if constexpr (std::is_same_v<T, Spike>)
          return {{"minute", v.minute}, {"magnitude", v.magnitude}};
        else if constexpr (std::is_same_v<T, ConstantReading>)
          return {{"value", double(v.value)}};
        else
          return {{"start", v.start}, {"length", v.length}, {"residual", v.residual}};
      },
      k);
}

/// Rebuilds a kind from its manifest name and parameters.
inline InjectionKind make_kind(const std::string& name, const std::map<std::string, double>& params) {
  auto get = [&](const char* key) {
    auto it = params.find(key);
    if (it == params.end()) throw Error(ErrorCode::parse_error, name + ": missing parameter " + key);
    return it->second;
  };
  if (name == "zero_run") return ZeroRun{int(get("start")), int(get("length"))};
  if (name == "spike") return Spike{int(get("minute")), get("magnitude")};
  if (name == "constant_reading") return ConstantReading{std::int32_t(get("value"))};
  if (name == "congestion_dip") return CongestionDip{int(get("start")), int(get("length")), get("residual")};
  if (name == "missing_run") return MissingRun{int(get("start")), int(get("length"))};
  throw Error(ErrorCode::parse_error, "unknown injection kind " + name);
}

struct ManifestEntry {
  std::string sensor_id;
  Date date;
  std::string kind;
  std::map<std::string, double> params;

  bool operator==(const ManifestEntry&) const = default;
};

struct InjectionResult {
  std::vector<SensorDay> stream;
  std::vector<ManifestEntry> manifest;
};

namespace detail {
inline void check_window(int start, int length) {
  if (start < 0 || length < 0 || start + length > kMinutesPerDay)
    throw Error(ErrorCode::invalid_profile, "injection window outside the day");
}

inline void apply(SensorDay& day, const InjectionKind& kind) {
  auto each = [&](int lo, int len, auto&& fn) {
    for (int c = 1; c <= 5; ++c)
      for (int m = lo; m < lo + len; ++m) fn(day.flux[c][m]);
  };
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ZeroRun>) {
          check_window(v.start, v.length);
          each(v.start, v.length, [](FluxValue& f) { f = 0; });
        } else if constexpr (std::is_same_v<T, Spike>) {
          check_window(v.minute, 1);
          if (!(v.magnitude >= 0.0)) throw Error(ErrorCode::invalid_profile, "spike magnitude must be >= 0");
          each(v.minute, 1, [&](FluxValue& f) {
            if (f) f = std::int32_t(std::lround(*f * v.magnitude));
          });
        } else if constexpr (std::is_same_v<T, ConstantReading>) {
          if (v.value < 0) throw Error(ErrorCode::invalid_profile, "constant reading must be >= 0");
          each(0, kMinutesPerDay, [&](FluxValue& f) { f = v.value; });
        } else if constexpr (std::is_same_v<T, CongestionDip>) {
          check_window(v.start, v.length);
          if (!(v.residual >= 0.0)) throw Error(ErrorCode::invalid_profile, "dip residual must be >= 0");
          each(v.start, v.length, [&](FluxValue& f) {
            if (f) f = std::int32_t(std::lround(*f * v.residual));
          });
        } else {
          check_window(v.start, v.length);
          each(v.start, v.length, [](FluxValue& f) { f = std::nullopt; });
        }
      },
      kind);
}
}  // namespace detail

/// Applies each injection, in order, to its (sensor, date) target.
inline InjectionResult inject(std::vector<SensorDay> stream, std::span<const InjectionSpec> injections) {
  InjectionResult out;
  for (const auto& inj : injections) {
    auto it = std::find_if(stream.begin(), stream.end(),
                           [&](const SensorDay& d) { return d.sensor_id == inj.sensor_id && d.date == inj.date; });
    if (it == stream.end())
      throw Error(ErrorCode::target_not_found, inj.sensor_id + " on " + inj.date.iso());
    detail::apply(*it, inj.kind);
    out.manifest.push_back({inj.sensor_id, inj.date, kind_name(inj.kind), kind_params(inj.kind)});
  }
  out.stream = std::move(stream);
  return out;
}

/// Re-applies a manifest onto a clean stream.
inline std::vector<SensorDay> replay(std::vector<SensorDay> stream, std::span<const ManifestEntry> manifest) {
  std::vector<InjectionSpec> specs;
  for (const auto& e : manifest) specs.push_back({make_kind(e.kind, e.params), e.sensor_id, e.date});
  return inject(std::move(stream), specs).stream;
}

}  // namespace fluxmine::synth
