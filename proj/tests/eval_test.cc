// Copyright 2026 The Geopid Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "geopid/error.h"
#include "geopid/eval.h"
#include "geopid/geocode.h"
#include "geopid/random.h"
#include "geopid/serialize.h"

namespace geopid {
namespace {

using Ranked = std::vector<std::vector<std::optional<std::string>>>;

std::string TempPath(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("geopid_eval_" + name)).string();
}

TEST(MetricsTest, RecallAndNdcgClosedForms) {
  const Ranked ranked = {{"a", "b", "c"}, {"x", "a", "y"}, {"q", "r", "s"}};
  const std::vector<std::string> truth = {"a", "a", "a"};
  EXPECT_DOUBLE_EQ(RecallAtK(ranked, truth, 1), 1.0 / 3);
  EXPECT_DOUBLE_EQ(RecallAtK(ranked, truth, 3), 2.0 / 3);

  const Ranked second = {{"x", "a"}};
  const std::vector<std::string> one = {"a"};
  EXPECT_NEAR(NdcgAtK(second, one, 2), 0.6309, 1e-4);
  EXPECT_DOUBLE_EQ(NdcgAtK(second, one, 1), 0.0);
  const Ranked first = {{"a"}};
  EXPECT_DOUBLE_EQ(NdcgAtK(first, one, 5), 1.0);
}

TEST(MetricsTest, InvalidEntriesNeverMatchTruth) {
  const Ranked ranked = {{std::nullopt, "a"}};
  const std::vector<std::string> truth = {"a"};
  EXPECT_DOUBLE_EQ(RecallAtK(ranked, truth, 1), 0.0);
  EXPECT_DOUBLE_EQ(RecallAtK(ranked, truth, 2), 1.0);
}

TEST(MetricsTest, InvalidRateOneOfFour) {
  const std::vector<std::optional<std::string>> mapped = {"a", std::nullopt, "b", "c"};
  EXPECT_DOUBLE_EQ(InvalidRate(mapped), 0.25);
  const std::vector<std::optional<std::string>> valid = {"a", "b"};
  EXPECT_DOUBLE_EQ(InvalidRate(valid), 0.0);
}

// On the equator haversine distance is linear in longitude.
TEST(MetricsTest, OutlierRateCountsResults) {
  QueryOutcome q;
  q.user = GeoPoint(0, 0);
  q.truth_location = GeoPoint(0, 0.001);
  for (int i = 0; i < 9; ++i) q.items.push_back({"t", "", 0, q.truth_location});
  q.items.push_back({"far", "", 0, GeoPoint(0, 0.001 * 10.01)});
  std::vector<QueryOutcome> qs = {q};
  EXPECT_DOUBLE_EQ(SpatialOutlierRate(qs), 0.1);

  qs[0].items.back().location = GeoPoint(0, 0.001 * 9.99);
  EXPECT_DOUBLE_EQ(SpatialOutlierRate(qs), 0.0);
}

TEST(MetricsTest, OutlierFloorAtUserLocation) {
  QueryOutcome q;
  q.user = GeoPoint(0, 0);
  q.truth_location = q.user;
  const double deg_per_m = 1.0 / HaversineDistance(GeoPoint(0, 0), GeoPoint(0, 1));
  q.items.push_back({"near", "", 0, GeoPoint(0, 9 * deg_per_m)});
  q.items.push_back({"far", "", 0, GeoPoint(0, 11 * deg_per_m)});
  q.items.push_back({std::nullopt, "bad", 0, std::nullopt});
  std::vector<QueryOutcome> qs = {q};
  // Invalid results have no location and are left out of the ratio.
  EXPECT_DOUBLE_EQ(SpatialOutlierRate(qs), 0.5);
}

// Random outcomes with 20 ranked results each.
std::vector<QueryOutcome> RandomOutcomes(int n, uint64_t seed) {
  Rng rng(seed);
  std::vector<QueryOutcome> out;
  for (int i = 0; i < n; ++i) {
    QueryOutcome q;
    q.query_id = i;
    q.k = 20;
    q.truth = "p" + std::to_string(rng.Below(30));
    q.user = GeoPoint(rng.Uniform(-1, 1), rng.Uniform(-1, 1));
    q.truth_location = GeoPoint(rng.Uniform(-1, 1), rng.Uniform(-1, 1));
    for (int r = 0; r < 20; ++r) {
      ResultItem it;
      if (rng.Uniform(0, 1) < 0.1) {
        it.pid = "bad";
      } else {
        it.poi_id = "p" + std::to_string(rng.Below(30));
        it.location = GeoPoint(rng.Uniform(-2, 2), rng.Uniform(-2, 2));
        it.pid = "g" + *it.poi_id;
      }
      it.log_prob = -rng.Uniform(0, 10);
      q.items.push_back(it);
    }
    q.diagnostics.steps = static_cast<int>(3 + rng.Below(6));
    q.diagnostics.wall_ms = rng.Uniform(0, 5);
    out.push_back(q);
  }
  return out;
}

TEST(MetricsTest, MonotoneInK) {
  const auto outcomes = RandomOutcomes(200, 3);
  Ranked ranked;
  std::vector<std::string> truth;
  for (const auto& q : outcomes) {
    ranked.emplace_back();
    for (const auto& it : q.items) ranked.back().push_back(it.poi_id);
    truth.push_back(q.truth);
  }
  double last_recall = 0, last_ndcg = 0;
  for (int k = 1; k <= 20; ++k) {
    const double r = RecallAtK(ranked, truth, k), n = NdcgAtK(ranked, truth, k);
    EXPECT_GE(r, last_recall);
    EXPECT_GE(n, last_ndcg);
    EXPECT_LE(n, r + 1e-12);
    last_recall = r;
    last_ndcg = n;
  }
  EXPECT_GT(last_recall, 0.0);
}

TEST(ResultsFileTest, ReportRecomputesBitIdentically) {
  const auto outcomes = RandomOutcomes(120, 9);
  EvalFlags flags;
  flags.ssp = false;
  const std::string path = TempPath("results.jsonl");
  WriteResults(path, outcomes, flags, R"({"stage":"test"})");
  EvalFlags read_flags;
  const auto back = ReadResults(path, &read_flags);
  EXPECT_FALSE(read_flags.ssp);
  ASSERT_EQ(back.size(), outcomes.size());
  const EvalReport a = Summarize(outcomes, flags), b = Summarize(back, read_flags);
  ASSERT_EQ(a.rows.size(), 1u);
  EXPECT_EQ(a.Row(20).recall, b.Row(20).recall);
  EXPECT_EQ(a.Row(20).ndcg, b.Row(20).ndcg);
  EXPECT_EQ(a.Row(20).invalid_rate, b.Row(20).invalid_rate);
  EXPECT_EQ(a.Row(20).outlier_rate, b.Row(20).outlier_rate);
  EXPECT_EQ(a.Row(20).median_ms, b.Row(20).median_ms);
  EXPECT_EQ(a.Row(20).mean_steps, b.Row(20).mean_steps);
  EXPECT_EQ(a.Table(), b.Table());
}

// Recount recall and IGR straight from the JSON lines, without the library
// reader.
TEST(ResultsFileTest, IndependentRecountMatches) {
  const auto outcomes = RandomOutcomes(150, 11);
  const std::string path = TempPath("recount.jsonl");
  WriteResults(path, outcomes, EvalFlags{});
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  size_t queries = 0, hits10 = 0, items = 0, invalid = 0;
  while (std::getline(in, line)) {
    const Json j = Json::parse(line);
    ++queries;
    const auto& list = j.at("items");
    bool hit = false;
    for (size_t r = 0; r < list.size(); ++r) {
      ++items;
      invalid += list[r].at("poi_id").is_null();
      hit = hit || (r < 10 && list[r].at("poi_id") == j.at("truth"));
    }
    hits10 += hit;
  }
  Ranked ranked;
  std::vector<std::string> truth;
  std::vector<std::optional<std::string>> mapped;
  for (const auto& q : outcomes) {
    ranked.emplace_back();
    for (const auto& it : q.items) {
      ranked.back().push_back(it.poi_id);
      mapped.push_back(it.poi_id);
    }
    truth.push_back(q.truth);
  }
  EXPECT_EQ(queries, outcomes.size());
  EXPECT_DOUBLE_EQ(RecallAtK(ranked, truth, 10), static_cast<double>(hits10) / queries);
  EXPECT_DOUBLE_EQ(InvalidRate(mapped), static_cast<double>(invalid) / items);
}

TEST(ResultsFileTest, MalformedLineIsFormatError) {
  const std::string path = TempPath("bad.jsonl");
  WriteResults(path, RandomOutcomes(2, 1), EvalFlags{});
  {
    std::ofstream out(path, std::ios::app);
    out << "{\"query_id\": 3}\n";
  }
  try {
    ReadResults(path);
    FAIL() << "expected a format error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFormat);
  }
}

TEST(SummarizeTest, RowsPerK) {
  auto outcomes = RandomOutcomes(10, 5);
  for (auto q : RandomOutcomes(10, 6)) {
    q.k = 5;
    q.items.resize(5);
    outcomes.push_back(q);
  }
  const EvalReport report = Summarize(outcomes, EvalFlags{});
  ASSERT_EQ(report.rows.size(), 2u);
  EXPECT_EQ(report.rows[0].k, 5);
  EXPECT_EQ(report.rows[1].k, 20);
  EXPECT_EQ(report.Row(5).queries, 10u);
  EXPECT_THROW(report.Row(7), Error);
}

}  // namespace
}  // namespace geopid
