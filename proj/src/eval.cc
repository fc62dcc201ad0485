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

#include "geopid/eval.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "geopid/error.h"
#include "geopid/serialize.h"

namespace geopid {

namespace {

// 1-based rank of truth within the first k entries, 0 when absent.
int RankOf(const std::vector<std::optional<std::string>>& ranked, const std::string& truth,
           int k) {
  const int n = std::min<int>(k, static_cast<int>(ranked.size()));
  for (int i = 0; i < n; ++i) {
    if (ranked[i] && *ranked[i] == truth) return i + 1;
  }
  return 0;
}

}  // namespace

double RecallAtK(std::span<const std::vector<std::optional<std::string>>> ranked,
                 std::span<const std::string> truth, int k) {
  Require(ranked.size() == truth.size(), "ranked lists and truths differ in count");
  if (ranked.empty()) return 0;
  size_t hits = 0;
  for (size_t i = 0; i < ranked.size(); ++i) hits += RankOf(ranked[i], truth[i], k) > 0;
  return static_cast<double>(hits) / ranked.size();
}

double NdcgAtK(std::span<const std::vector<std::optional<std::string>>> ranked,
               std::span<const std::string> truth, int k) {
  Require(ranked.size() == truth.size(), "ranked lists and truths differ in count");
  if (ranked.empty()) return 0;
  double sum = 0;
  for (size_t i = 0; i < ranked.size(); ++i) {
    const int rank = RankOf(ranked[i], truth[i], k);
    if (rank > 0) sum += 1.0 / std::log2(rank + 1.0);
  }
  return sum / ranked.size();
}

double InvalidRate(std::span<const std::optional<std::string>> mapped) {
  if (mapped.empty()) return 0;
  size_t bad = 0;
  for (const auto& m : mapped) bad += !m.has_value();
  return static_cast<double>(bad) / mapped.size();
}

double SpatialOutlierRate(std::span<const QueryOutcome> outcomes) {
  size_t total = 0, outliers = 0;
  for (const auto& q : outcomes) {
    const double limit =
        10.0 * std::max(HaversineDistance(q.user, q.truth_location), kOutlierFloorMeters);
    for (const auto& item : q.items) {
      if (!item.location) continue;
      ++total;
      outliers += HaversineDistance(q.user, *item.location) > limit;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(outliers) / total;
}

const EvalRow& EvalReport::Row(int k) const {
  for (const auto& r : rows) {
    if (r.k == k) return r;
  }
  Throw(ErrorCode::kInvalidArgument, "report has no row for k=" + std::to_string(k));
}

std::string EvalReport::Table() const {
  std::ostringstream out;
  out << "flags: egi=" << flags.egi << " geope=" << flags.geope << " tcg=" << flags.tcg
      << " ssp=" << flags.ssp << " history=" << flags.history << "\n";
  char line[256];
  std::snprintf(line, sizeof(line), "%4s %8s %10s %10s %10s %10s %10s %8s\n", "K", "queries",
                "Recall@K", "NDCG@K", "IGR", "Outlier", "median_ms", "steps");
  out << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof(line), "%4d %8zu %10.4f %10.4f %9.2f%% %9.2f%% %10.3f %8.2f\n",
                  r.k, r.queries, r.recall, r.ndcg, 100 * r.invalid_rate, 100 * r.outlier_rate,
                  r.median_ms, r.mean_steps);
    out << line;
  }
  return out.str();
}

EvalReport Summarize(std::span<const QueryOutcome> outcomes, const EvalFlags& flags) {
  std::map<int, std::vector<const QueryOutcome*>> by_k;
  for (const auto& q : outcomes) by_k[q.k].push_back(&q);
  EvalReport report;
  report.flags = flags;
  for (const auto& [k, qs] : by_k) {
    std::vector<std::vector<std::optional<std::string>>> ranked;
    std::vector<std::string> truth;
    std::vector<std::optional<std::string>> mapped;
    std::vector<QueryOutcome> copies;
    std::vector<double> ms;
    double steps = 0;
    for (const QueryOutcome* q : qs) {
      std::vector<std::optional<std::string>> ids;
      for (const auto& item : q->items) {
        ids.push_back(item.poi_id);
        mapped.push_back(item.poi_id);
      }
      ranked.push_back(std::move(ids));
      truth.push_back(q->truth);
      copies.push_back(*q);
      ms.push_back(q->diagnostics.wall_ms);
      steps += q->diagnostics.steps;
    }
    EvalRow row;
    row.k = k;
    row.queries = qs.size();
    row.recall = RecallAtK(ranked, truth, k);
    row.ndcg = NdcgAtK(ranked, truth, k);
    row.invalid_rate = InvalidRate(mapped);
    row.outlier_rate = SpatialOutlierRate(copies);
    if (!ms.empty()) {
      std::sort(ms.begin(), ms.end());
      const size_t n = ms.size();
      row.median_ms = n % 2 ? ms[n / 2] : 0.5 * (ms[n / 2 - 1] + ms[n / 2]);
      row.mean_steps = steps / n;
    }
    report.rows.push_back(row);
  }
  return report;
}

std::vector<EvalQuery> QueriesFor(const std::vector<LogRecord>& records,
                                  const std::map<std::string, Pid>& pids, size_t limit) {
  std::vector<EvalQuery> out;
  for (const auto& r : records) {
    if (limit > 0 && out.size() >= limit) break;
    out.push_back({ContextFor(r.history, r.current, pids), r.current.poi_id});
  }
  return out;
}

std::vector<QueryOutcome> RunQueries(const Retriever& retriever,
                                     const std::map<std::string, PoiRecord>& pois,
                                     std::span<const EvalQuery> queries, std::span<const int> ks,
                                     const DecodeConfig& base) {
  std::vector<QueryOutcome> out;
  const Vocabulary& vocab = retriever.vocab();
  for (int k : ks) {
    DecodeConfig cfg = base;
    cfg.k = k;
    cfg.beam_width = k;
    for (size_t i = 0; i < queries.size(); ++i) {
      const EvalQuery& q = queries[i];
      auto truth = pois.find(q.truth);
      Require(truth != pois.end(), "query truth is not in the POI database: " + q.truth);
      const RetrievalResult r = retriever.Search(q.context, cfg);
      QueryOutcome o;
      o.query_id = static_cast<int>(i);
      o.k = k;
      o.truth = q.truth;
      o.user = q.context.location;
      o.truth_location = truth->second.location;
      o.diagnostics = r.diagnostics;
      for (const auto& item : r.items) {
        ResultItem ri;
        ri.poi_id = item.poi_id;
        for (size_t t = 0; t < item.pid_tokens.size(); ++t) {
          if (t) ri.pid += ' ';
          ri.pid += vocab.TokenString(item.pid_tokens[t]);
        }
        ri.log_prob = item.log_prob;
        if (item.poi_id) ri.location = pois.at(*item.poi_id).location;
        o.items.push_back(std::move(ri));
      }
      out.push_back(std::move(o));
    }
  }
  return out;
}

namespace {

Json FlagsJson(const EvalFlags& f) {
  return {{"egi", f.egi}, {"geope", f.geope}, {"tcg", f.tcg}, {"ssp", f.ssp}, {"history", f.history}};
}

EvalFlags FlagsFromJson(const Json& j) {
  EvalFlags f;
  f.egi = j.value("egi", true);
  f.geope = j.value("geope", true);
  f.tcg = j.value("tcg", true);
  f.ssp = j.value("ssp", true);
  f.history = j.value("history", true);
  return f;
}

}  // namespace

void WriteResults(const std::string& path, std::span<const QueryOutcome> outcomes,
                  const EvalFlags& flags, const std::string& config_json) {
  std::ofstream out(path);
  if (!out) Throw(ErrorCode::kIo, "cannot open " + path + " for writing");
  out << Json{{"format", "geopid.results"},
              {"version", kResultFileVersion},
              {"flags", FlagsJson(flags)},
              {"config", Json::parse(config_json)}}
             .dump()
      << "\n";
  for (const auto& q : outcomes) {
    Json items = Json::array();
    for (const auto& it : q.items) {
      Json j = {{"pid", it.pid}, {"log_prob", it.log_prob}};
      j["poi_id"] = it.poi_id ? Json(*it.poi_id) : Json(nullptr);
      if (it.location) {
        j["lat"] = it.location->lat();
        j["lon"] = it.location->lon();
      }
      items.push_back(std::move(j));
    }
    const auto& d = q.diagnostics;
    out << Json{{"query_id", q.query_id},
                {"k", q.k},
                {"truth", q.truth},
                {"user", {q.user.lat(), q.user.lon()}},
                {"truth_location", {q.truth_location.lat(), q.truth_location.lon()}},
                {"items", std::move(items)},
                {"lambda", d.lambda},
                {"requested_prefix", d.requested_prefix},
                {"prefix_length", d.prefix_length},
                {"steps", d.steps},
                {"dead_ends", d.dead_ends},
                {"wall_ms", d.wall_ms}}
               .dump()
        << "\n";
  }
  if (!out) Throw(ErrorCode::kIo, "write failed for " + path);
}

std::vector<QueryOutcome> ReadResults(const std::string& path, EvalFlags* flags) {
  std::ifstream in(path);
  if (!in) Throw(ErrorCode::kIo, "cannot open " + path);
  const Json header = ReadHeader(in, path, "geopid.results", kResultFileVersion);
  if (flags) *flags = FlagsFromJson(header.value("flags", Json::object()));
  std::vector<QueryOutcome> out;
  std::string line;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const Json j = Json::parse(line);
      QueryOutcome q;
      q.query_id = j.at("query_id").get<int>();
      q.k = j.at("k").get<int>();
      q.truth = j.at("truth").get<std::string>();
      q.user = GeoPoint(j.at("user").at(0).get<double>(), j.at("user").at(1).get<double>());
      q.truth_location = GeoPoint(j.at("truth_location").at(0).get<double>(),
                                  j.at("truth_location").at(1).get<double>());
      for (const auto& it : j.at("items")) {
        ResultItem ri;
        if (!it.at("poi_id").is_null()) ri.poi_id = it.at("poi_id").get<std::string>();
        ri.pid = it.at("pid").get<std::string>();
        ri.log_prob = it.at("log_prob").get<double>();
        if (it.contains("lat")) ri.location = GeoPoint(it.at("lat").get<double>(), it.at("lon").get<double>());
        q.items.push_back(std::move(ri));
      }
      q.diagnostics.lambda = j.at("lambda").get<int>();
      q.diagnostics.requested_prefix = j.at("requested_prefix").get<int>();
      q.diagnostics.prefix_length = j.at("prefix_length").get<int>();
      q.diagnostics.steps = j.at("steps").get<int>();
      q.diagnostics.dead_ends = j.at("dead_ends").get<int>();
      q.diagnostics.wall_ms = j.at("wall_ms").get<double>();
      out.push_back(std::move(q));
    } catch (const Json::exception& e) {
      Throw(ErrorCode::kFormat, path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void WriteReport(const std::string& path, const EvalReport& report,
                 const std::string& config_json) {
  std::ofstream out(path);
  if (!out) Throw(ErrorCode::kIo, "cannot open " + path + " for writing");
  Json rows = Json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"k", r.k},
                    {"queries", r.queries},
                    {"recall", r.recall},
                    {"ndcg", r.ndcg},
                    {"invalid_rate", r.invalid_rate},
                    {"outlier_rate", r.outlier_rate},
                    {"median_ms", r.median_ms},
                    {"mean_steps", r.mean_steps}});
  }
  out << Json{{"format", "geopid.report"},
              {"version", 1},
              {"flags", FlagsJson(report.flags)},
              {"config", Json::parse(config_json)},
              {"rows", std::move(rows)}}
             .dump(2)
      << "\n";
  if (!out) Throw(ErrorCode::kIo, "write failed for " + path);
}

}  // namespace geopid
