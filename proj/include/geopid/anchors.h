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

#ifndef GEOPID_ANCHORS_H_
#define GEOPID_ANCHORS_H_

#include <cstdint>
#include <span>
#include <vector>

#include "geopid/embed.h"
#include "geopid/geocode.h"

namespace geopid {

// Reference points for the geographic position embedding.
struct AnchorSet {
  std::vector<GeoPoint> points;

  int omega() const { return static_cast<int>(points.size()); }
};

// Lloyd k-means over raw (lat, lon) degrees with k-means++ seeding. Stops at
// the assignment fixpoint or after max_iters. Empty clusters are reseeded to
// the point farthest from its current centroid.
AnchorSet FitAnchors(std::span<const GeoPoint> points, int omega,
                     uint64_t seed, int max_iters = 100);

// Splits x into omega contiguous segments and rotates every consecutive pair
// (2j, 2j+1) of segment w by the bearing angle of p seen from anchor w.
Embedding GeoPeRotate(const Embedding& x, const GeoPoint& p,
                      const AnchorSet& anchors);

}  // namespace geopid

#endif  // GEOPID_ANCHORS_H_
