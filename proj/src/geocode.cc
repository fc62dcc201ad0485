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

#include "geopid/geocode.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "geopid/error.h"

namespace geopid {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kDecode: return "decode";
    case ErrorCode::kCapacity: return "capacity";
    case ErrorCode::kConflict: return "conflict";
    case ErrorCode::kTrainingFailure: return "training-failure";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kFormat: return "format";
  }
  return "unknown";
}

GeoPoint::GeoPoint(double lat, double lon) : lat_(lat), lon_(lon) {
  if (!std::isfinite(lat) || !std::isfinite(lon) || lat < -90.0 ||
      lat > 90.0 || lon < -180.0 || lon > 180.0) {
    Throw(ErrorCode::kInvalidArgument,
          "coordinate out of range: (" + std::to_string(lat) + ", " +
              std::to_string(lon) + ")");
  }
}

int GeohashCharIndex(char c) {
  auto pos = kGeohashAlphabet.find(c);
  return pos == std::string_view::npos ? -1 : static_cast<int>(pos);
}

Gid::Gid(std::string chars) : chars_(std::move(chars)) {
  if (chars_.empty() || chars_.size() > kMaxGeohashLength) {
    Throw(ErrorCode::kDecode, "geohash length out of range: '" + chars_ + "'");
  }
  for (char c : chars_) {
    if (GeohashCharIndex(c) < 0) {
      Throw(ErrorCode::kDecode,
            std::string("invalid geohash character '") + c + "' in '" +
                chars_ + "'");
    }
  }
}

Gid Gid::prefix(int len) const {
  Require(len >= 1 && len <= size(), "prefix length out of range");
  return Gid(chars_.substr(0, len));
}

Gid EncodeGeohash(const GeoPoint& p, int len) {
  Require(len >= 1 && len <= kMaxGeohashLength,
          "geohash length must be in [1, 12], got " + std::to_string(len));
  double lat_lo = -90.0, lat_hi = 90.0;
  double lon_lo = -180.0, lon_hi = 180.0;
  // Clamp the closed upper boundary into the half-open last cell.
  const double lat = std::min(p.lat(), std::nextafter(90.0, 0.0));
  const double lon = std::min(p.lon(), std::nextafter(180.0, 0.0));

  std::string out;
  out.reserve(len);
  bool even = true;
  for (int c = 0; c < len; ++c) {
    int idx = 0;
    for (int bit = 0; bit < 5; ++bit) {
      idx <<= 1;
      if (even) {
        const double mid = (lon_lo + lon_hi) / 2;
        if (lon >= mid) {
          idx |= 1;
          lon_lo = mid;
        } else {
          lon_hi = mid;
        }
      } else {
        const double mid = (lat_lo + lat_hi) / 2;
        if (lat >= mid) {
          idx |= 1;
          lat_lo = mid;
        } else {
          lat_hi = mid;
        }
      }
      even = !even;
    }
    out.push_back(kGeohashAlphabet[idx]);
  }
  return Gid(std::move(out));
}

GeoCell DecodeCell(const Gid& g) {
  Require(g.size() >= 1, "empty geohash");
  double lat_lo = -90.0, lat_hi = 90.0;
  double lon_lo = -180.0, lon_hi = 180.0;
  bool even = true;
  for (int c = 0; c < g.size(); ++c) {
    const int idx = GeohashCharIndex(g[c]);
    if (idx < 0) Throw(ErrorCode::kDecode, "invalid geohash: " + g.str());
    for (int bit = 4; bit >= 0; --bit) {
      const bool set = (idx >> bit) & 1;
      if (even) {
        const double mid = (lon_lo + lon_hi) / 2;
        (set ? lon_lo : lon_hi) = mid;
      } else {
        const double mid = (lat_lo + lat_hi) / 2;
        (set ? lat_lo : lat_hi) = mid;
      }
      even = !even;
    }
  }
  return GeoCell{GeoPoint((lat_lo + lat_hi) / 2, (lon_lo + lon_hi) / 2),
                 (lat_hi - lat_lo) / 2, (lon_hi - lon_lo) / 2};
}

int CommonPrefixLength(const Gid& a, const Gid& b) {
  const auto& x = a.str();
  const auto& y = b.str();
  auto [ix, iy] = std::mismatch(x.begin(), x.end(), y.begin(), y.end());
  return static_cast<int>(ix - x.begin());
}

double BearingAngle(const GeoPoint& p, const GeoPoint& ref) {
  constexpr double kDeg = std::numbers::pi / 180.0;
  const double dlat = p.lat() - ref.lat();
  const double dlon = p.lon() - ref.lon();
  if (dlat == 0.0 && dlon == 0.0) return 0.0;
  double theta = std::atan2(dlat, dlon * std::cos(ref.lat() * kDeg));
  if (theta < 0) theta += 2 * std::numbers::pi;
  // -0.0 and rounding right below 2pi both land back in range.
  if (theta >= 2 * std::numbers::pi) theta = 0.0;
  return theta;
}

double HaversineDistance(const GeoPoint& a, const GeoPoint& b) {
  constexpr double kDeg = std::numbers::pi / 180.0;
  const double phi1 = a.lat() * kDeg, phi2 = b.lat() * kDeg;
  const double dphi = phi2 - phi1;
  const double dlambda = (b.lon() - a.lon()) * kDeg;
  const double s = std::sin(dphi / 2);
  const double t = std::sin(dlambda / 2);
  const double h = s * s + std::cos(phi1) * std::cos(phi2) * t * t;
  return 2 * kEarthRadiusMeters * std::asin(std::min(1.0, std::sqrt(h)));
}

double CellHalfExtentLat(int len) {
  const int lat_bits = (5 * len) / 2;
  return 90.0 / std::ldexp(1.0, lat_bits);
}

double CellHalfExtentLon(int len) {
  const int lon_bits = (5 * len + 1) / 2;
  return 180.0 / std::ldexp(1.0, lon_bits);
}

double CellDiagonalBoundMeters(int len) {
  constexpr double kDeg = std::numbers::pi / 180.0;
  const double dlat = 2 * CellHalfExtentLat(len) * kDeg * kEarthRadiusMeters;
  const double dlon = 2 * CellHalfExtentLon(len) * kDeg * kEarthRadiusMeters;
  // Flat diagonal over-estimates the spherical distance only for huge cells;
  // cap at half the circumference which bounds every great-circle distance.
  return std::min(std::hypot(dlat, dlon),
                  std::numbers::pi * kEarthRadiusMeters);
}

}  // namespace geopid
