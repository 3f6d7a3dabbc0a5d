#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "fluxmine/ingest.hpp"
#include "fluxmine/synth.hpp"

using namespace fluxmine;
using namespace fluxmine::synth;

namespace {

const Date kMonday = *Date::parse("2022-01-10");

std::vector<SensorSpec> fleet(int n, bool noise = true) {
  std::vector<SensorSpec> out;
  for (int i = 0; i < n; ++i) {
    SensorSpec s{"S" + std::to_string(i), "ST" + std::to_string(i / 2), i % 2 ? Lane::passing : Lane::driving, {}};
    s.profile.noise = noise;
    s.profile.rng_seed = 42;
    out.push_back(s);
  }
  return out;
}

std::string csv(std::span<const SensorDay> stream) {
  std::ostringstream out;
  write_csv(out, stream);
  return out.str();
}

std::vector<DailySeries> daily(std::span<const SensorDay> stream) {
  std::istringstream in(csv(stream));
  auto parsed = parse_records(in);
  EXPECT_EQ(parsed.rejected(), 0u);
  return assemble_daily_series(parsed.records, MacroClass::all);
}

}  // namespace

TEST(Generate, NoiseOffFollowsTheProfile) {
  auto sensors = fleet(1, false);
  auto days = generate(sensors, kMonday, 1);
  ASSERT_EQ(days.size(), 1u);
  const ClassMix mix;
  for (int c = 1; c <= 5; ++c)
    for (int m : {0, 300, 480, 700, 1050, 1439})
      EXPECT_EQ(*days[0].flux[c][m], std::lround(sensors[0].profile.expected(m) * mix.share[c]));
  auto s = days[0].series();
  EXPECT_EQ(std::max_element(s.begin(), s.end()) - s.begin() < 720, true);
  EXPECT_GT(s[480], s[0]);
  EXPECT_GT(s[1050], s[720]);
}

TEST(Generate, WeekendHeavyTrafficIsSuppressed) {
  auto sensors = fleet(3);
  auto week = generate(sensors, kMonday, 7);
  for (const auto& weekday : week) {
    if (weekday.date.is_weekend()) continue;
    for (const auto& weekend : week) {
      if (!weekend.date.is_weekend() || weekend.sensor_id != weekday.sensor_id) continue;
      auto total = [](const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); };
      EXPECT_LE(total(weekend.series(MacroClass::heavy)), total(weekday.series(MacroClass::heavy)));
    }
  }
}

TEST(Generate, FixedSeedIsByteIdentical) {
  auto sensors = fleet(4);
  EXPECT_EQ(csv(generate(sensors, kMonday, 2)), csv(generate(sensors, kMonday, 2)));
  auto other = sensors;
  for (auto& s : other) s.profile.rng_seed = 43;
  EXPECT_NE(csv(generate(sensors, kMonday, 1)), csv(generate(other, kMonday, 1)));
}

TEST(Generate, CleanSeriesSurviveCleaning) {
  auto stream = generate(fleet(4), kMonday, 3);
  auto result = clean_dataset(daily(stream));
  EXPECT_EQ(result.kept.size(), 12u);
  EXPECT_TRUE(result.removed.empty());
}

TEST(Generate, InvalidProfile) {
  auto sensors = fleet(1);
  sensors[0].profile.humps[0].width = 0.0;
  try {
    generate(sensors, kMonday, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_profile);
  }
  sensors = fleet(1);
  sensors[0].profile.base_level = -1.0;
  EXPECT_THROW(generate(sensors, kMonday, 1), Error);
  EXPECT_THROW(generate(fleet(1), kMonday, -1), Error);
}


TEST(Generate, ArchetypeFleet) {
  const auto a = archetype_fleet(8, 3);
  const auto b = archetype_fleet(8, 3);
  ASSERT_EQ(a.size(), 8u);
  EXPECT_EQ(a[0].sensor_id, "S100");
  EXPECT_EQ(a[5].station_id, "ST2");
  EXPECT_EQ(a[0].lane, Lane::driving);
  EXPECT_EQ(a[1].lane, Lane::passing);
  const std::size_t humps[] = {2, 2, 1, 1};
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].profile.humps.size(), humps[i % 4]);
    EXPECT_EQ(a[i].profile.humps[0].center, b[i].profile.humps[0].center);
  }
  EXPECT_GT(a[4].profile.humps[0].amplitude, a[0].profile.humps[0].amplitude);
  EXPECT_NE(a[0].profile.rng_seed, a[1].profile.rng_seed);
  EXPECT_EQ(csv(generate(a, kMonday, 2)), csv(generate(b, kMonday, 2)));
  EXPECT_TRUE(archetype_fleet(0, 1).empty());
  EXPECT_THROW(archetype_fleet(-1, 1), Error);
}
TEST(Inject, ZeroRun) {
  auto clean = generate(fleet(2), kMonday, 1);
  std::vector<InjectionSpec> inj{{ZeroRun{720, 300}, "S1", kMonday}};
  auto r = inject(clean, inj);
  auto s = r.stream[1].series();
  for (int m = 720; m < 1020; ++m) EXPECT_EQ(s[m], 0.0);
  auto before = clean[1].series();
  for (int m : {719, 1020}) EXPECT_EQ(s[m], before[m]);
  EXPECT_EQ(r.stream[0], clean[0]);
  ASSERT_EQ(r.manifest.size(), 1u);
  EXPECT_EQ(r.manifest[0].kind, "zero_run");
  EXPECT_EQ(r.manifest[0].params.at("length"), 300.0);
}

TEST(Inject, Spike) {
  auto clean = generate(fleet(1, false), kMonday, 1);
  std::vector<InjectionSpec> inj{{Spike{600, 10.0}, "S0", kMonday}};
  auto r = inject(clean, inj);
  for (int c = 1; c <= 5; ++c) {
    EXPECT_EQ(*r.stream[0].flux[c][600], *clean[0].flux[c][600] * 10);
    EXPECT_EQ(r.stream[0].flux[c][601], clean[0].flux[c][601]);
  }
}

TEST(Inject, ConstantAndDip) {
  auto clean = generate(fleet(1, false), kMonday, 1);
  std::vector<InjectionSpec> inj{{ConstantReading{2}, "S0", kMonday}};
  auto flat = inject(clean, inj).stream[0].series();
  for (double v : flat) EXPECT_EQ(v, 10.0);
  std::vector<InjectionSpec> dip{{CongestionDip{400, 200, 0.0}, "S0", kMonday}};
  auto d = inject(clean, dip).stream[0].series();
  EXPECT_EQ(d[450], 0.0);
  EXPECT_EQ(d[700], clean[0].series()[700]);
}

TEST(Inject, MissingRunIsRemovedByCleaning) {
  auto clean = generate(fleet(2), kMonday, 1);
  std::vector<InjectionSpec> inj{{MissingRun{0, 60}, "S0", kMonday}};
  auto r = inject(clean, inj);
  EXPECT_TRUE(std::isnan(r.stream[0].series()[30]));
  auto result = clean_dataset(daily(r.stream));
  ASSERT_EQ(result.removed.size(), 1u);
  EXPECT_EQ(result.removed[0].series.sensor_id, "S0");
  EXPECT_EQ(result.removed[0].reason, RemovalReason::missing);
  EXPECT_EQ(result.kept.size(), 1u);
}

TEST(Inject, ReplayReproducesTheStream) {
  auto clean = generate(fleet(3), kMonday, 2);
  std::vector<InjectionSpec> inj{{ZeroRun{100, 50}, "S2", kMonday.plus_days(1)},
                                 {Spike{900, 7.5}, "S0", kMonday},
                                 {CongestionDip{300, 120, 0.25}, "S1", kMonday},
                                 {MissingRun{10, 5}, "S1", kMonday.plus_days(1)}};
  auto r = inject(clean, inj);
  EXPECT_EQ(csv(replay(clean, r.manifest)), csv(r.stream));
}

TEST(Inject, Errors) {
  auto clean = generate(fleet(1), kMonday, 1);
  std::vector<InjectionSpec> missing{{ZeroRun{0, 10}, "nope", kMonday}};
  try {
    inject(clean, missing);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::target_not_found);
  }
  std::vector<InjectionSpec> wrong_day{{ZeroRun{0, 10}, "S0", kMonday.plus_days(3)}};
  EXPECT_THROW(inject(clean, wrong_day), Error);
  std::vector<InjectionSpec> outside{{ZeroRun{1400, 100}, "S0", kMonday}};
  try {
    inject(clean, outside);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_profile);
  }
}

TEST(Inject, MakeKindRoundTrip) {
  std::vector<InjectionKind> kinds{ZeroRun{1, 2}, Spike{3, 4.5}, ConstantReading{6}, CongestionDip{7, 8, 0.5},
                                   MissingRun{9, 10}};
  for (const auto& k : kinds) {
    auto back = make_kind(kind_name(k), kind_params(k));
    EXPECT_EQ(back.index(), k.index());
    EXPECT_EQ(kind_params(back), kind_params(k));
  }
  EXPECT_THROW(make_kind("meteor", {}), Error);
  EXPECT_THROW(make_kind("spike", {{"minute", 1}}), Error);
}
