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

#ifndef GEOPID_POI_H_
#define GEOPID_POI_H_

#include <map>
#include <string>
#include <vector>

#include "geopid/geocode.h"

namespace geopid {

struct PoiRecord {
  std::string poi_id;
  GeoPoint location;
  std::string name;
  std::string category;
  std::map<std::string, std::string> extra;
};

inline constexpr int kPoiFileVersion = 1;

// POI database file: JSON lines. The first line is a header object
// {"format":"geopid.pois","version":1,...}; each following line holds one
// record with the fields poi_id, lat, lon, name, category and optional extra.
void WritePoiFile(const std::string& path, const std::vector<PoiRecord>& pois,
                  const std::string& header_config_json = "{}");
std::vector<PoiRecord> ReadPoiFile(const std::string& path);

// Validates id uniqueness and non-empty names.
void ValidatePois(const std::vector<PoiRecord>& pois);

}  // namespace geopid

#endif  // GEOPID_POI_H_
