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

#ifndef GEOPID_DATAGEN_H_
#define GEOPID_DATAGEN_H_

#include <cstdint>
#include <string>
#include <vector>

#include "geopid/geocode.h"
#include "geopid/poi.h"

namespace geopid {

enum class Scope { kLocal, kMid, kRegional };

struct CategorySpec {
  std::string name;
  std::string group;  // shared query word for ambiguous queries; may be empty
  Scope scope = Scope::kLocal;
  double weight = 1.0;  // share of a city's POIs
  std::vector<std::string> brands;
};

// Built-in taxonomy: food/health/shop/leisure groups, local categories such
// as "toilet" and regional ones such as "airport".
std::vector<CategorySpec> DefaultTaxonomy();

enum class QueryTemplate { kExactName, kCategoryNearby, kBrand, kRegional };
const char* QueryTemplateName(QueryTemplate t);
QueryTemplate ParseQueryTemplate(const std::string& name);

struct GenConfig {
  uint64_t seed = 0;
  int n_pois = 10000;
  int n_cities = 5;
  double city_sigma = 0.05;  // degrees of latitude; longitude is scaled
  int n_sequences = 4000;
  double avg_history_len = 3.2;
  int max_history = 10;
  // Mix over exact-name / category-nearby / brand / regional; sums to 1.
  double mix_exact = 0.2;
  double mix_nearby = 0.45;
  double mix_brand = 0.2;
  double mix_regional = 0.15;
  // Chance a category-nearby query uses the group word ("food nearby").
  double group_query_prob = 0.5;
  double train_fraction = 0.8;
  double valid_fraction = 0.1;
  std::vector<CategorySpec> taxonomy = DefaultTaxonomy();

  void Validate() const;
};

struct City {
  GeoPoint center;
  double sigma_lat = 0, sigma_lon = 0;
  // Every generated coordinate of the city lies inside center +- 5 sigma.
  bool Contains(const GeoPoint& p) const;
};

std::vector<City> GenCities(const GenConfig& cfg);

// POIs carry extra["city"] and, when branded, extra["brand"].
std::vector<PoiRecord> GenPois(const GenConfig& cfg);

struct Interaction {
  std::string query;
  GeoPoint location;
  std::string poi_id;
  QueryTemplate kind = QueryTemplate::kExactName;
  std::string category;  // category that decided the ground truth
};

enum class Split { kTrain, kValid, kTest };
const char* SplitName(Split s);

// One user sequence: chronological history plus the current request.
struct LogRecord {
  int user_id = 0;
  Split split = Split::kTrain;
  std::vector<Interaction> history;
  Interaction current;
};

struct GenLogsStats {
  int retries = 0;
  int skipped = 0;
};

std::vector<LogRecord> GenLogs(const GenConfig& cfg, const std::vector<PoiRecord>& pois,
                               GenLogsStats* stats = nullptr);

inline constexpr int kLogFileVersion = 1;

// Log file: JSON lines, header {"format":"geopid.logs","version":1,...}
// then one record per sequence.
void WriteLogFile(const std::string& path, const std::vector<LogRecord>& logs,
                  const std::string& header_config_json = "{}");
std::vector<LogRecord> ReadLogFile(const std::string& path);

}  // namespace geopid

#endif  // GEOPID_DATAGEN_H_
