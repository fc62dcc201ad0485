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

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include "geopid/error.h"
#include "geopid/random.h"

namespace geopid {
namespace {

TEST(FitAnchorsTest, TwoPointsExactCover) {
  std::vector<GeoPoint> pts = {GeoPoint(10, 20), GeoPoint(-5, 7)};
  AnchorSet a = FitAnchors(pts, 2, 1);
  ASSERT_EQ(a.omega(), 2);
  std::set<std::pair<double, double>> got;
  for (auto& p : a.points) got.emplace(p.lat(), p.lon());
  EXPECT_EQ(got, (std::set<std::pair<double, double>>{{10, 20}, {-5, 7}}));
}

TEST(FitAnchorsTest, SingleAnchorIsMean) {
  std::vector<GeoPoint> pts = {GeoPoint(1, 2), GeoPoint(3, 4), GeoPoint(5, 9)};
  AnchorSet a = FitAnchors(pts, 1, 7);
  EXPECT_NEAR(a.points[0].lat(), 3.0, 1e-12);
  EXPECT_NEAR(a.points[0].lon(), 5.0, 1e-12);
}

TEST(FitAnchorsTest, TooManyAnchors) {
  std::vector<GeoPoint> pts = {GeoPoint(1, 2), GeoPoint(1, 2), GeoPoint(3, 4)};
  EXPECT_THROW(FitAnchors(pts, 3, 0), Error);
  EXPECT_THROW(FitAnchors({}, 1, 0), Error);
}

TEST(FitAnchorsTest, SeparatedClustersOneAnchorEach) {
  const double centers[4][2] = {{30, 110}, {31, 121}, {23, 113}, {40, 116}};
  Rng rng(5);
  std::vector<GeoPoint> pts;
  std::vector<int> label;
  for (int c = 0; c < 4; ++c) {
    for (int i = 0; i < 250; ++i) {
      pts.emplace_back(rng.Normal(centers[c][0], 0.1),
                       rng.Normal(centers[c][1], 0.1));
      label.push_back(c);
    }
  }
  AnchorSet a = FitAnchors(pts, 4, 3);
  // Brute force: every anchor must sit inside the bounding box of exactly one
  // cluster (a superset check of the convex hull for Gaussian blobs is too
  // loose, so also require it to be nearer that cluster's mean than 0.05).
  std::set<int> hit;
  for (const auto& anchor : a.points) {
    int owner = -1;
    for (int c = 0; c < 4; ++c) {
      double lo_lat = 1e9, hi_lat = -1e9, lo_lon = 1e9, hi_lon = -1e9;
      double mlat = 0, mlon = 0;
      for (size_t i = 0; i < pts.size(); ++i) {
        if (label[i] != c) continue;
        lo_lat = std::min(lo_lat, pts[i].lat());
        hi_lat = std::max(hi_lat, pts[i].lat());
        lo_lon = std::min(lo_lon, pts[i].lon());
        hi_lon = std::max(hi_lon, pts[i].lon());
        mlat += pts[i].lat() / 250;
        mlon += pts[i].lon() / 250;
      }
      if (anchor.lat() >= lo_lat && anchor.lat() <= hi_lat &&
          anchor.lon() >= lo_lon && anchor.lon() <= hi_lon &&
          std::hypot(anchor.lat() - mlat, anchor.lon() - mlon) < 0.05) {
        owner = c;
      }
    }
    ASSERT_GE(owner, 0);
    hit.insert(owner);
  }
  EXPECT_EQ(hit.size(), 4u);
}

TEST(FitAnchorsTest, DeterministicUnderSeed) {
  Rng rng(1);
  std::vector<GeoPoint> pts;
  for (int i = 0; i < 500; ++i) {
    pts.emplace_back(rng.Uniform(20, 40), rng.Uniform(100, 120));
  }
  AnchorSet a = FitAnchors(pts, 8, 42);
  AnchorSet b = FitAnchors(pts, 8, 42);
  EXPECT_EQ(a.points, b.points);
}

TEST(GeoPeRotateTest, EastOfEveryAnchorIsIdentity) {
  AnchorSet anchors{{GeoPoint(30, 100), GeoPoint(30, 101)}};
  Rng rng(2);
  Embedding x(8);
  for (int i = 0; i < 8; ++i) x[i] = rng.Normal();
  Embedding y = GeoPeRotate(x, GeoPoint(30, 105), anchors);
  for (int i = 0; i < 8; ++i) EXPECT_DOUBLE_EQ(y[i], x[i]);
}

TEST(GeoPeRotateTest, QuarterTurn) {
  // Anchor 0 is due south of p (theta = pi/2), anchor 1 due east (theta = 0).
  AnchorSet anchors{{GeoPoint(29, 105), GeoPoint(30, 104)}};
  Embedding x(8);
  x << 1, 2, 3, 4, 5, 6, 7, 8;
  Embedding y = GeoPeRotate(x, GeoPoint(30, 105), anchors);
  EXPECT_NEAR(y[0], -2, 1e-12);
  EXPECT_NEAR(y[1], 1, 1e-12);
  EXPECT_NEAR(y[2], -4, 1e-12);
  EXPECT_NEAR(y[3], 3, 1e-12);
  for (int i = 4; i < 8; ++i) EXPECT_DOUBLE_EQ(y[i], x[i]);
}

TEST(GeoPeRotateTest, DimensionMismatch) {
  AnchorSet anchors{{GeoPoint(0, 0), GeoPoint(1, 1), GeoPoint(2, 2)}};
  EXPECT_THROW(GeoPeRotate(Embedding::Zero(8), GeoPoint(0, 0), anchors),
               Error);
}

TEST(GeoPeRotateTest, NormPreserved) {
  Rng rng(8);
  std::vector<GeoPoint> anchor_pts;
  for (int i = 0; i < 8; ++i) {
    anchor_pts.emplace_back(rng.Uniform(20, 40), rng.Uniform(100, 120));
  }
  AnchorSet anchors{anchor_pts};
  for (int trial = 0; trial < 10000; ++trial) {
    Embedding x(64);
    for (int i = 0; i < 64; ++i) x[i] = rng.Normal();
    GeoPoint p(rng.Uniform(20, 40), rng.Uniform(100, 120));
    ASSERT_NEAR(GeoPeRotate(x, p, anchors).norm(), x.norm(), 1e-9);
  }
}

TEST(GeoPeRotateTest, AngleTuplesSeparateDistinctLocations) {
  Rng rng(13);
  AnchorSet anchors{{GeoPoint(30, 110), GeoPoint(31, 112), GeoPoint(29, 113)}};
  std::map<std::vector<double>, std::pair<double, double>> seen;
  int collisions = 0;
  for (int i = 0; i < 20000; ++i) {
    GeoPoint p(rng.Uniform(28, 32), rng.Uniform(108, 115));
    std::vector<double> key;
    for (auto& a : anchors.points) key.push_back(BearingAngle(p, a));
    auto [it, fresh] = seen.emplace(key, std::make_pair(p.lat(), p.lon()));
    if (!fresh && it->second != std::make_pair(p.lat(), p.lon())) ++collisions;
  }
  EXPECT_EQ(collisions, 0);
}

}  // namespace
}  // namespace geopid
