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

#ifndef GEOPID_EVAL_H_
#define GEOPID_EVAL_H_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geopid/decode.h"
#include "geopid/geocode.h"
#include "geopid/pipeline.h"

namespace geopid {

// Distance floor for the outlier ratio when the truth sits at the user.
inline constexpr double kOutlierFloorMeters = 1.0;

// One retrieved entry as persisted in a result file.
struct ResultItem {
  std::optional<std::string> poi_id;  // nullopt: generated PID maps to nothing
  std::string pid;                    // token strings joined by spaces
  double log_prob = 0;
  std::optional<GeoPoint> location;   // set when poi_id is
};

struct QueryOutcome {
  int query_id = 0;
  int k = 0;
  std::string truth;
  GeoPoint user;
  GeoPoint truth_location;
  std::vector<ResultItem> items;  // ranked
  DecodeDiagnostics diagnostics;
};

// Rank-based metrics over ranked poi_id lists; an entry of nullopt never
// matches. Ranks are 1-based.
double RecallAtK(std::span<const std::vector<std::optional<std::string>>> ranked,
                 std::span<const std::string> truth, int k);
double NdcgAtK(std::span<const std::vector<std::optional<std::string>>> ranked,
               std::span<const std::string> truth, int k);
// Fraction of generated identifiers without a database entry.
double InvalidRate(std::span<const std::optional<std::string>> mapped);
// Per-result counting: retrieved POIs farther from the user than
// 10 * max(d(user, truth), 1 m), over all valid retrieved POIs.
double SpatialOutlierRate(std::span<const QueryOutcome> outcomes);

struct EvalFlags {
  bool egi = true;
  bool geope = true;
  bool tcg = true;
  bool ssp = true;
  bool history = true;
};

struct EvalRow {
  int k = 0;
  size_t queries = 0;
  double recall = 0;
  double ndcg = 0;
  double invalid_rate = 0;
  double outlier_rate = 0;
  double median_ms = 0;
  double mean_steps = 0;
};

struct EvalReport {
  EvalFlags flags;
  std::vector<EvalRow> rows;  // ascending k

  const EvalRow& Row(int k) const;
  std::string Table() const;
};

// Recomputes every metric from outcomes alone.
EvalReport Summarize(std::span<const QueryOutcome> outcomes, const EvalFlags& flags);

struct EvalQuery {
  SearchContext context;
  std::string truth;
};

std::vector<EvalQuery> QueriesFor(const std::vector<LogRecord>& records,
                                  const std::map<std::string, Pid>& pids, size_t limit = 0);

// Decodes every query once per k with beam width k.
std::vector<QueryOutcome> RunQueries(const Retriever& retriever,
                                     const std::map<std::string, PoiRecord>& pois,
                                     std::span<const EvalQuery> queries, std::span<const int> ks,
                                     const DecodeConfig& base);

inline constexpr int kResultFileVersion = 1;
void WriteResults(const std::string& path, std::span<const QueryOutcome> outcomes,
                  const EvalFlags& flags, const std::string& config_json = "{}");
std::vector<QueryOutcome> ReadResults(const std::string& path, EvalFlags* flags = nullptr);

// Machine-readable report record.
void WriteReport(const std::string& path, const EvalReport& report,
                 const std::string& config_json = "{}");

}  // namespace geopid

#endif  // GEOPID_EVAL_H_
