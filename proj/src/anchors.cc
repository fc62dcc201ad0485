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

#include "geopid/anchors.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <utility>

#include "geopid/error.h"
#include "geopid/random.h"

namespace geopid {

namespace {

double SquaredDegreeDistance(const GeoPoint& a, double lat, double lon) {
  const double dlat = a.lat() - lat;
  const double dlon = a.lon() - lon;
  return dlat * dlat + dlon * dlon;
}

}  // namespace

AnchorSet FitAnchors(std::span<const GeoPoint> points, int omega,
                     uint64_t seed, int max_iters) {
  Require(!points.empty(), "cannot fit anchors on an empty POI set");
  Require(omega >= 1, "omega must be >= 1");
  std::set<std::pair<double, double>> distinct;
  for (const auto& p : points) distinct.emplace(p.lat(), p.lon());
  Require(static_cast<size_t>(omega) <= distinct.size(),
          "omega=" + std::to_string(omega) + " exceeds the " +
              std::to_string(distinct.size()) + " distinct coordinates");

  const size_t n = points.size();
  Rng rng(DeriveSeed(seed, "anchors"));
  std::vector<double> lat(omega), lon(omega);

  // k-means++: first center uniform, then proportional to squared distance.
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  size_t first = rng.Below(n);
  lat[0] = points[first].lat();
  lon[0] = points[first].lon();
  for (int k = 1; k < omega; ++k) {
    for (size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i],
                       SquaredDegreeDistance(points[i], lat[k - 1], lon[k - 1]));
    }
    size_t pick = rng.Weighted(d2);
    lat[k] = points[pick].lat();
    lon[k] = points[pick].lon();
  }

  std::vector<int> assign(n, -1);
  for (int iter = 0; iter < max_iters; ++iter) {
    bool changed = false;
    for (size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int k = 0; k < omega; ++k) {
        double d = SquaredDegreeDistance(points[i], lat[k], lon[k]);
        if (d < best_d) {
          best_d = d;
          best = k;
        }
      }
      if (assign[i] != best) {
        assign[i] = best;
        changed = true;
      }
    }
    if (!changed && iter > 0) break;

    std::vector<double> sum_lat(omega, 0), sum_lon(omega, 0);
    std::vector<size_t> count(omega, 0);
    for (size_t i = 0; i < n; ++i) {
      sum_lat[assign[i]] += points[i].lat();
      sum_lon[assign[i]] += points[i].lon();
      ++count[assign[i]];
    }
    for (int k = 0; k < omega; ++k) {
      if (count[k] > 0) {
        lat[k] = sum_lat[k] / count[k];
        lon[k] = sum_lon[k] / count[k];
        continue;
      }
      size_t far = 0;
      double far_d = -1;
      for (size_t i = 0; i < n; ++i) {
        const int a = assign[i];
        double d = SquaredDegreeDistance(points[i], lat[a], lon[a]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      lat[k] = points[far].lat();
      lon[k] = points[far].lon();
      assign[far] = k;
    }
  }

  AnchorSet anchors;
  anchors.points.reserve(omega);
  for (int k = 0; k < omega; ++k) anchors.points.emplace_back(lat[k], lon[k]);
  return anchors;
}

Embedding GeoPeRotate(const Embedding& x, const GeoPoint& p,
                      const AnchorSet& anchors) {
  const int omega = anchors.omega();
  Require(omega >= 1, "empty anchor set");
  Require(x.size() % (2 * omega) == 0,
          "embedding dimension " + std::to_string(x.size()) +
              " not divisible by 2*omega=" + std::to_string(2 * omega));
  const int segment = static_cast<int>(x.size()) / omega;
  Embedding out(x.size());
  for (int w = 0; w < omega; ++w) {
    const double theta = BearingAngle(p, anchors.points[w]);
    const double c = std::cos(theta), s = std::sin(theta);
    const int base = w * segment;
    for (int j = 0; j < segment; j += 2) {
      const double a = x[base + j], b = x[base + j + 1];
      out[base + j] = c * a - s * b;
      out[base + j + 1] = s * a + c * b;
    }
  }
  return out;
}

}  // namespace geopid
