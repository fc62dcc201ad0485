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

#ifndef GEOPID_GEOCODE_H_
#define GEOPID_GEOCODE_H_

#include <string>
#include <string_view>

namespace geopid {

inline constexpr std::string_view kGeohashAlphabet =
    "0123456789bcdefghjkmnpqrstuvwxyz";
inline constexpr int kMaxGeohashLength = 12;
inline constexpr double kEarthRadiusMeters = 6371008.8;

// A validated WGS84-style coordinate in degrees.
class GeoPoint {
 public:
  GeoPoint() = default;
  // Throws Error(kInvalidArgument) for non-finite or out-of-range values.
  GeoPoint(double lat, double lon);

  double lat() const { return lat_; }
  double lon() const { return lon_; }

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;

 private:
  double lat_ = 0.0;
  double lon_ = 0.0;
};

// A geohash string. Every character is in kGeohashAlphabet and the length is
// in [1, kMaxGeohashLength].
class Gid {
 public:
  Gid() = default;
  // Validates the alphabet; throws Error(kDecode) on a bad character.
  explicit Gid(std::string chars);

  const std::string& str() const { return chars_; }
  int size() const { return static_cast<int>(chars_.size()); }
  char operator[](int i) const { return chars_[i]; }
  Gid prefix(int len) const;

  friend bool operator==(const Gid&, const Gid&) = default;
  friend auto operator<=>(const Gid&, const Gid&) = default;

 private:
  std::string chars_;
};

struct GeoCell {
  GeoPoint center;
  double half_extent_lat = 0.0;
  double half_extent_lon = 0.0;
};

// Alphabet position of a geohash character, or -1.
int GeohashCharIndex(char c);

// Standard geohash: longitude/latitude bisection starting with longitude,
// 5 bits per character, most significant bit first. lat=90 and lon=180 are
// clamped into the last cell.
Gid EncodeGeohash(const GeoPoint& p, int len);

GeoCell DecodeCell(const Gid& g);

int CommonPrefixLength(const Gid& a, const Gid& b);

// Azimuth of p seen from ref, atan2(dlat, dlon * cos(lat_ref)), in [0, 2pi).
// Coincident points give 0.
double BearingAngle(const GeoPoint& p, const GeoPoint& ref);

double HaversineDistance(const GeoPoint& a, const GeoPoint& b);

// Half extents in degrees of a level-len cell.
double CellHalfExtentLat(int len);
double CellHalfExtentLon(int len);

// Upper bound on the distance between any two points inside one level-len
// cell: the great-circle length of the cell diagonal at the worst latitude
// the cell may touch (the equator for the longitude span).
double CellDiagonalBoundMeters(int len);

}  // namespace geopid

#endif  // GEOPID_GEOCODE_H_
