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

#include <cstdio>
#include <filesystem>
#include <map>
#include <set>

#include "geopid/datagen.h"
#include "geopid/proximity.h"

namespace geopid {
namespace {

GenConfig SmallConfig(uint64_t seed) {
  GenConfig cfg;
  cfg.seed = seed;
  cfg.n_pois = 10000;
  cfg.n_cities = 5;
  cfg.n_sequences = 1500;
  return cfg;
}

bool SamePois(const std::vector<PoiRecord>& a, const std::vector<PoiRecord>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].poi_id != b[i].poi_id || !(a[i].location == b[i].location) ||
        a[i].name != b[i].name || a[i].category != b[i].category || a[i].extra != b[i].extra) {
      return false;
    }
  }
  return true;
}

TEST(GenPoisTest, DeterministicAllocatedAndBounded) {
  GenConfig cfg = SmallConfig(7);
  auto a = GenPois(cfg);
  auto b = GenPois(cfg);
  EXPECT_TRUE(SamePois(a, b));
  cfg.seed = 8;
  EXPECT_FALSE(SamePois(a, GenPois(cfg)));

  ASSERT_EQ(a.size(), 10000u);
  auto cities = GenCities(SmallConfig(7));
  std::map<std::string, int> per_city;
  std::set<std::string> names, ids;
  for (const auto& p : a) {
    const int c = std::stoi(p.extra.at("city"));
    ++per_city[p.extra.at("city")];
    EXPECT_TRUE(cities[c].Contains(p.location)) << p.poi_id;
    names.insert(p.name);
    ids.insert(p.poi_id);
  }
  for (const auto& [c, n] : per_city) EXPECT_EQ(n, 2000) << "city " << c;
  EXPECT_EQ(names.size(), a.size());
  EXPECT_EQ(ids.size(), a.size());
  EXPECT_NO_THROW(ValidatePois(a));
}

class GenLogsTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    cfg_ = new GenConfig(SmallConfig(11));
    pois_ = new std::vector<PoiRecord>(GenPois(*cfg_));
    logs_ = new std::vector<LogRecord>(GenLogs(*cfg_, *pois_, &stats_));
  }
  static void TearDownTestSuite() {
    delete cfg_;
    delete pois_;
    delete logs_;
  }

  // Every interaction, history and current alike.
  static std::vector<const Interaction*> All() {
    std::vector<const Interaction*> out;
    for (const auto& r : *logs_) {
      for (const auto& h : r.history) out.push_back(&h);
      out.push_back(&r.current);
    }
    return out;
  }

  static const PoiRecord& Poi(const std::string& id) {
    static std::map<std::string, const PoiRecord*> index = [] {
      std::map<std::string, const PoiRecord*> m;
      for (const auto& p : *pois_) m[p.poi_id] = &p;
      return m;
    }();
    return *index.at(id);
  }

  static GenConfig* cfg_;
  static std::vector<PoiRecord>* pois_;
  static std::vector<LogRecord>* logs_;
  static GenLogsStats stats_;
};

GenConfig* GenLogsTest::cfg_ = nullptr;
std::vector<PoiRecord>* GenLogsTest::pois_ = nullptr;
std::vector<LogRecord>* GenLogsTest::logs_ = nullptr;
GenLogsStats GenLogsTest::stats_;

TEST_F(GenLogsTest, NearbyTruthIsNearestOfCategory) {
  int total = 0, nearest = 0;
  for (const Interaction* it : All()) {
    if (it->kind != QueryTemplate::kCategoryNearby) continue;
    ++total;
    // Brute force over the whole database.
    double best = 1e300;
    std::string best_id;
    for (const auto& p : *pois_) {
      if (p.category != it->category) continue;
      const double d = HaversineDistance(it->location, p.location);
      if (d < best) {
        best = d;
        best_id = p.poi_id;
      }
    }
    nearest += (best_id == it->poi_id);
  }
  ASSERT_GT(total, 500);
  EXPECT_GE(static_cast<double>(nearest) / total, 0.99);
}

TEST_F(GenLogsTest, ExactNameQueriesMatchTheTruth) {
  int n = 0;
  for (const Interaction* it : All()) {
    if (it->kind != QueryTemplate::kExactName) continue;
    ++n;
    EXPECT_EQ(Poi(it->poi_id).name, it->query);
  }
  EXPECT_GT(n, 100);
}

TEST_F(GenLogsTest, PrefixHistogramPeaksAtFourOrMore) {
  std::vector<int> all(7, 0), nearby(7, 0);
  for (const Interaction* it : All()) {
    const int level = LabelProximity(it->location, Poi(it->poi_id).location, 6);
    ++all[level];
    if (it->kind == QueryTemplate::kCategoryNearby) ++nearby[level];
  }
  EXPECT_GE(std::max_element(all.begin(), all.end()) - all.begin(), 4);
  EXPECT_GE(std::max_element(nearby.begin(), nearby.end()) - nearby.begin(), 4);
}

TEST_F(GenLogsTest, HistoryLengthAndSplits) {
  double total = 0;
  std::map<int, Split> user_split;
  std::map<Split, int> counts;
  for (const auto& r : *logs_) {
    total += r.history.size();
    EXPECT_LE(static_cast<int>(r.history.size()), cfg_->max_history);
    auto [it, inserted] = user_split.emplace(r.user_id, r.split);
    EXPECT_TRUE(inserted || it->second == r.split);
    ++counts[r.split];
  }
  // Truncated geometric with mean 3.2 capped at 10 has mean ~3.0.
  EXPECT_NEAR(total / logs_->size(), 3.0, 0.3);
  EXPECT_NEAR(counts[Split::kTrain] / static_cast<double>(logs_->size()), 0.8, 0.01);
  EXPECT_GT(counts[Split::kTest], 0);
  EXPECT_EQ(stats_.skipped, 0);
}

TEST_F(GenLogsTest, DeterministicAndRoundTrips) {
  auto again = GenLogs(*cfg_, *pois_);
  ASSERT_EQ(again.size(), logs_->size());
  const auto path = std::filesystem::temp_directory_path() / "geopid_logs_test.jsonl";
  WriteLogFile(path.string(), *logs_);
  auto back = ReadLogFile(path.string());
  std::filesystem::remove(path);
  ASSERT_EQ(back.size(), logs_->size());
  for (size_t i = 0; i < logs_->size(); ++i) {
    for (const auto* v : {&again[i], &back[i]}) {
      EXPECT_EQ(v->user_id, (*logs_)[i].user_id);
      EXPECT_EQ(v->split, (*logs_)[i].split);
      EXPECT_EQ(v->current.query, (*logs_)[i].current.query);
      EXPECT_EQ(v->current.poi_id, (*logs_)[i].current.poi_id);
      EXPECT_TRUE(v->current.location == (*logs_)[i].current.location);
      EXPECT_EQ(v->history.size(), (*logs_)[i].history.size());
    }
  }
}

TEST_F(GenLogsTest, ProximityEstimatorSeparatesLocalAndRegionalIntent) {
  std::vector<ProximitySample> train, heldout;
  for (const auto& r : *logs_) {
    auto& dst = r.split == Split::kTrain ? train : heldout;
    for (const Interaction* it : [&] {
           std::vector<const Interaction*> v;
           for (const auto& h : r.history) v.push_back(&h);
           v.push_back(&r.current);
           return v;
         }()) {
      dst.push_back({it->query, LabelProximity(it->location, Poi(it->poi_id).location, 6)});
    }
  }
  ProximityConfig pc;
  pc.seed = 3;
  ProximityReport report;
  ProximityModel model = TrainProximity(train, pc, &report);
  EXPECT_GT(report.heldout_accuracy, report.majority_accuracy);

  double abs_err = 0;
  for (const auto& s : heldout) abs_err += std::abs(model.Predict(s.query) - s.level);
  EXPECT_LE(abs_err / heldout.size(), 1.0);

  // "toilet nearby" style queries versus "airport".
  std::vector<std::string> local = {"toilet nearby", "nearby toilet"};
  int higher = 0, pairs = 0;
  for (const auto& l : local) {
    for (const char* reg : {"airport", "train station"}) {
      ++pairs;
      higher += model.Predict(l) > model.Predict(reg);
    }
  }
  EXPECT_GE(static_cast<double>(higher) / pairs, 0.9);
}

}  // namespace
}  // namespace geopid
