#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <sstream>

#include "fluxmine/io.hpp"

using namespace fluxmine;
namespace fs = std::filesystem;

namespace {

const Date kDay = *Date::parse("2022-03-01");

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / "fluxmine_io_test";
  fs::create_directories(dir);
  auto p = dir / name;
  fs::remove(p);
  return p;
}

}  // namespace

TEST(Io, ModelRoundTrip) {
  std::vector<std::vector<double>> pts{{0, 0}, {0, 1}, {9, 9}, {9, 10}};
  auto m = kmeans<EuclideanSpace>(pts, EuclideanSpace{}, {2, 5});
  m.provenance = {"E", 5, {{"k", "2"}}};
  json j = model_to_json(m);
  auto back = model_from_json<std::vector<double>>(json::parse(j.dump()));
  EXPECT_EQ(back.method, m.method);
  EXPECT_EQ(back.k, m.k);
  EXPECT_EQ(back.centroids, m.centroids);
  EXPECT_EQ(back.labels, m.labels);
  EXPECT_EQ(back.objective, m.objective);
  EXPECT_EQ(back.provenance.seed, 5u);
  EXPECT_EQ(back.provenance.hyperparameters.at("k"), "2");
  EXPECT_FALSE(j.at("fuzzy").get<bool>());
}

TEST(Io, SymbolicModelRoundTrip) {
  ClusterModel<SymbolicWord> m;
  m.method = Engine::hca;
  m.k = 1;
  m.centroids = {SymbolicWord::from_letters("abcd", WordFlavor::sax, 4, 1440, 4)};
  m.labels = {0, 0, kOutlier};
  auto back = model_from_json<SymbolicWord>(json::parse(model_to_json(m).dump()));
  EXPECT_EQ(back.centroids, m.centroids);
  EXPECT_EQ(back.labels, m.labels);
}

TEST(Io, PaaJson) {
  PaaSeries p{{1.5, -2.25}, 10, 2};
  json j = p;
  auto back = j.get<PaaSeries>();
  EXPECT_EQ(back.values, p.values);
  EXPECT_EQ(back.n, 10u);
}

TEST(Io, MembershipBinaryRoundTrip) {
  std::mt19937_64 rng(1);
  std::vector<double> u(7 * 3);
  for (double& v : u) v = std::uniform_real_distribution<double>(0, 1)(rng);
  std::stringstream buf;
  write_membership(buf, u, 3);
  EXPECT_EQ(buf.str().size(), 8u + u.size() * 8u);
  EXPECT_EQ(read_membership(buf, 3), u);
  std::stringstream truncated(buf.str().substr(0, 20));
  EXPECT_THROW(read_membership(truncated, 3), Error);
}

TEST(Io, HistorySaveLoad) {
  auto path = scratch("history.json");
  EXPECT_TRUE(load_history(path).flagged.empty());
  AnomalyHistory h;
  h.flagged["S1"] = {kDay, kDay.plus_days(-2)};
  h.flagged["S2"] = {kDay.plus_days(-1)};
  save_history(path, h);
  EXPECT_EQ(load_history(path), h);
  EXPECT_FALSE(fs::exists(path.string() + ".tmp"));
}

TEST(Io, SeriesStoreRoundTrip) {
  DailySeries a{"S1", "ST", kDay, MacroClass::heavy, LaneScope::driving};
  for (int m = 0; m < kMinutesPerDay; ++m) a.values[m] = m % 7;
  a.values[5] = std::nullopt;
  DailySeries b{"S2", "ST", kDay.plus_days(1), MacroClass::all, LaneScope::all};
  for (auto& v : b.values) v = 3;
  std::vector<DailySeries> in{a, b};
  std::stringstream buf;
  write_series_store(buf, in);
  EXPECT_EQ(buf.str().substr(0, kSeriesHeader.size()), kSeriesHeader);
  auto out = read_series_store(buf);
  ASSERT_EQ(out.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(out[i].sensor_id, in[i].sensor_id);
    EXPECT_EQ(out[i].date, in[i].date);
    EXPECT_EQ(out[i].macro_class, in[i].macro_class);
    EXPECT_EQ(out[i].lane_scope, in[i].lane_scope);
    EXPECT_EQ(out[i].values, in[i].values);
  }
}

TEST(Io, ManifestRoundTrip) {
  std::vector<synth::ManifestEntry> m{{"S1", kDay, "spike", {{"minute", 600}, {"magnitude", 10}}},
                                      {"S2", kDay, "zero_run", {{"start", 720}, {"length", 300}}}};
  EXPECT_EQ(manifest_from_json(json::parse(manifest_to_json(m).dump())), m);
}

TEST(Io, ReportKeys) {
  AnomalyReport r;
  r.day = kDay;
  r.entries.push_back({"S1", kDay, {0.5, 2.0}, 1.0, 0.0, 1u, std::nullopt, 2, Severity::none});
  json j = report_to_json(r);
  ASSERT_TRUE(j.is_array());
  for (const char* key : {"sensor_id", "date", "scores", "agg", "pos", "topAGG_rank", "topPOS_rank", "confidence",
                          "severity"})
    EXPECT_TRUE(j[0].contains(key)) << key;
  EXPECT_EQ(j[0]["topAGG_rank"], 1);
  EXPECT_TRUE(j[0]["topPOS_rank"].is_null());
  EXPECT_EQ(j[0]["date"], "2022-03-01");
}

TEST(Io, AtomicWriteReplaces) {
  auto path = scratch("text.txt");
  write_text_atomic(path, "one");
  write_text_atomic(path, "two");
  EXPECT_EQ(read_text(path), "two");
  EXPECT_THROW(read_text(scratch("absent.txt")), Error);
}
