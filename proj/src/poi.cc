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

#include "geopid/poi.h"

#include <fstream>
#include <set>

#include <json.hpp>

#include "geopid/error.h"

namespace geopid {

using nlohmann::json;

void WritePoiFile(const std::string& path, const std::vector<PoiRecord>& pois,
                  const std::string& header_config_json) {
  std::ofstream out(path);
  if (!out) Throw(ErrorCode::kIo, "cannot write " + path);
  json header = {{"format", "geopid.pois"},
                 {"version", kPoiFileVersion},
                 {"count", pois.size()},
                 {"config", json::parse(header_config_json)}};
  out << header.dump() << '\n';
  for (const auto& p : pois) {
    json rec = {{"poi_id", p.poi_id},
                {"lat", p.location.lat()},
                {"lon", p.location.lon()},
                {"name", p.name},
                {"category", p.category}};
    if (!p.extra.empty()) rec["extra"] = p.extra;
    out << rec.dump() << '\n';
  }
  if (!out) Throw(ErrorCode::kIo, "write failed: " + path);
}

std::vector<PoiRecord> ReadPoiFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) Throw(ErrorCode::kIo, "cannot read " + path);
  std::string line;
  if (!std::getline(in, line)) Throw(ErrorCode::kFormat, "empty file: " + path);
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    Throw(ErrorCode::kFormat, path + ": bad header: " + e.what());
  }
  if (header.value("format", "") != "geopid.pois" ||
      header.value("version", 0) != kPoiFileVersion) {
    Throw(ErrorCode::kFormat, path + ": not a version-1 POI file");
  }
  std::vector<PoiRecord> pois;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      json rec = json::parse(line);
      PoiRecord p;
      p.poi_id = rec.at("poi_id").get<std::string>();
      p.location = GeoPoint(rec.at("lat").get<double>(),
                            rec.at("lon").get<double>());
      p.name = rec.at("name").get<std::string>();
      p.category = rec.at("category").get<std::string>();
      if (rec.contains("extra")) {
        p.extra = rec["extra"].get<std::map<std::string, std::string>>();
      }
      pois.push_back(std::move(p));
    } catch (const json::exception& e) {
      Throw(ErrorCode::kFormat,
            path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  ValidatePois(pois);
  return pois;
}

void ValidatePois(const std::vector<PoiRecord>& pois) {
  std::set<std::string_view> ids;
  for (const auto& p : pois) {
    Require(!p.name.empty(), "POI " + p.poi_id + " has an empty name");
    Require(ids.insert(p.poi_id).second, "duplicate poi_id " + p.poi_id);
  }
}

}  // namespace geopid
