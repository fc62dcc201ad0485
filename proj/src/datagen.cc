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

#include "geopid/datagen.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include <json.hpp>

#include "geopid/error.h"
#include "geopid/random.h"

namespace geopid {

std::vector<CategorySpec> DefaultTaxonomy() {
  using S = Scope;
  return {
      {"cafe", "food", S::kLocal, 3.0, {"bean street", "morning cup", "kaffa"}},
      {"bakery", "food", S::kLocal, 2.0, {"golden crust", "daily loaf"}},
      {"restaurant", "food", S::kLocal, 3.0, {"spice garden", "blue plate", "noodle house"}},
      {"pharmacy", "health", S::kLocal, 1.5, {"wellcare", "green cross"}},
      {"clinic", "health", S::kMid, 1.0, {"city clinic", "family care"}},
      {"supermarket", "shop", S::kLocal, 2.0, {"freshmart", "valueway"}},
      {"convenience store", "shop", S::kLocal, 2.0, {"quickstop", "dailymart"}},
      {"toilet", "", S::kLocal, 1.5, {}},
      {"gas station", "", S::kMid, 1.0, {"fuelco", "petroway"}},
      {"hotel", "", S::kMid, 1.5, {"grand stay", "sleepwell"}},
      {"park", "leisure", S::kMid, 1.0, {}},
      {"museum", "leisure", S::kRegional, 0.3, {}},
      {"train station", "", S::kRegional, 0.2, {}},
      {"airport", "", S::kRegional, 0.1, {}},
  };
}

const char* QueryTemplateName(QueryTemplate t) {
  switch (t) {
    case QueryTemplate::kExactName: return "exact-name";
    case QueryTemplate::kCategoryNearby: return "category-nearby";
    case QueryTemplate::kBrand: return "brand";
    case QueryTemplate::kRegional: return "regional";
  }
  return "?";
}

QueryTemplate ParseQueryTemplate(const std::string& name) {
  for (auto t : {QueryTemplate::kExactName, QueryTemplate::kCategoryNearby,
                 QueryTemplate::kBrand, QueryTemplate::kRegional}) {
    if (name == QueryTemplateName(t)) return t;
  }
  Throw(ErrorCode::kFormat, "unknown query template: " + name);
}

const char* SplitName(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kValid: return "valid";
    case Split::kTest: return "test";
  }
  return "?";
}

namespace {

Split ParseSplit(const std::string& s) {
  for (auto v : {Split::kTrain, Split::kValid, Split::kTest}) {
    if (s == SplitName(v)) return v;
  }
  Throw(ErrorCode::kFormat, "unknown split: " + s);
}

double ScopeSpread(Scope s) {
  switch (s) {
    case Scope::kLocal: return 1.0;
    case Scope::kMid: return 1.5;
    case Scope::kRegional: return 3.0;
  }
  return 1.0;
}

const std::vector<std::string>& Streets() {
  static const std::vector<std::string> kStreets = {
      "elm", "oak", "maple", "cedar", "pine", "birch", "willow", "harbor", "river",
      "hill", "lake", "park", "market", "station", "church", "mill", "bridge", "king",
      "queen", "garden", "north", "south", "east", "west", "sun", "moon", "forest",
      "meadow", "spring", "stone"};
  return kStreets;
}

// Normal draw around the city center, rejected until inside the box.
GeoPoint SampleInCity(const City& city, double spread, Rng& rng) {
  for (;;) {
    const double lat = city.center.lat() + rng.Normal(0, city.sigma_lat * spread);
    const double lon = city.center.lon() + rng.Normal(0, city.sigma_lon * spread);
    GeoPoint p(std::clamp(lat, -90.0, 90.0), std::clamp(lon, -180.0, 180.0));
    if (city.Contains(p)) return p;
  }
}

GeoPoint SampleNear(const City& city, const GeoPoint& at, double spread, Rng& rng) {
  for (;;) {
    const double lat = at.lat() + rng.Normal(0, city.sigma_lat * spread);
    const double lon = at.lon() + rng.Normal(0, city.sigma_lon * spread);
    GeoPoint p(std::clamp(lat, -90.0, 90.0), std::clamp(lon, -180.0, 180.0));
    if (city.Contains(p)) return p;
  }
}

}  // namespace

void GenConfig::Validate() const {
  Require(n_pois > 0 && n_cities > 0 && n_sequences > 0, "generator counts must be positive");
  Require(n_cities <= 40, "at most 40 cities fit the placement rule");
  Require(city_sigma > 0 && city_sigma < 1, "city_sigma must be in (0, 1) degrees");
  Require(avg_history_len >= 0 && max_history >= 0, "history settings must be >= 0");
  const double mix = mix_exact + mix_nearby + mix_brand + mix_regional;
  Require(mix_exact >= 0 && mix_nearby >= 0 && mix_brand >= 0 && mix_regional >= 0 &&
              std::abs(mix - 1.0) < 1e-9,
          "template mix must be non-negative and sum to 1");
  Require(group_query_prob >= 0 && group_query_prob <= 1, "group_query_prob must be in [0, 1]");
  Require(train_fraction > 0 && valid_fraction >= 0 && train_fraction + valid_fraction < 1,
          "split fractions must leave a non-empty test split");
  Require(!taxonomy.empty(), "taxonomy is empty");
  for (const auto& c : taxonomy) Require(c.weight > 0 && !c.name.empty(), "bad category spec");
}

bool City::Contains(const GeoPoint& p) const {
  return std::abs(p.lat() - center.lat()) <= 5 * sigma_lat &&
         std::abs(p.lon() - center.lon()) <= 5 * sigma_lon;
}

std::vector<City> GenCities(const GenConfig& cfg) {
  cfg.Validate();
  Rng rng(DeriveSeed(cfg.seed, "cities"));
  std::vector<City> cities;
  while (static_cast<int>(cities.size()) < cfg.n_cities) {
    GeoPoint c(rng.Uniform(-50, 55), rng.Uniform(-170, 170));
    bool clear = true;
    for (const auto& o : cities) {
      if (std::abs(o.center.lat() - c.lat()) < 5 && std::abs(o.center.lon() - c.lon()) < 5) {
        clear = false;
      }
    }
    if (!clear) continue;
    City city{c, cfg.city_sigma, cfg.city_sigma / std::cos(c.lat() * M_PI / 180.0)};
    cities.push_back(city);
  }
  return cities;
}

std::vector<PoiRecord> GenPois(const GenConfig& cfg) {
  const std::vector<City> cities = GenCities(cfg);
  Rng rng(DeriveSeed(cfg.seed, "pois"));
  std::vector<double> weights;
  for (const auto& c : cfg.taxonomy) weights.push_back(c.weight);
  const auto& streets = Streets();

  std::vector<PoiRecord> pois;
  pois.reserve(cfg.n_pois);
  std::map<std::string, int> name_count;
  const int width = static_cast<int>(std::to_string(cfg.n_pois).size());
  for (int ci = 0; ci < cfg.n_cities; ++ci) {
    const int count = cfg.n_pois / cfg.n_cities + (ci < cfg.n_pois % cfg.n_cities ? 1 : 0);
    for (int k = 0; k < count; ++k) {
      const CategorySpec& cat = cfg.taxonomy[rng.Weighted(weights)];
      PoiRecord p;
      std::string id = std::to_string(pois.size());
      p.poi_id = "p" + std::string(width - id.size(), '0') + id;
      p.location = SampleInCity(cities[ci], ScopeSpread(cat.scope), rng);
      p.category = cat.name;
      const std::string& street = streets[rng.Below(streets.size())];
      std::string name;
      if (!cat.brands.empty()) {
        const std::string& brand = cat.brands[rng.Below(cat.brands.size())];
        name = brand + " " + street;
        p.extra["brand"] = brand;
      } else {
        name = street + " " + cat.name;
      }
      const int seen = ++name_count[name];
      if (seen > 1) name += " " + std::to_string(seen);
      p.name = name;
      p.extra["city"] = std::to_string(ci);
      pois.push_back(std::move(p));
    }
  }
  return pois;
}

namespace {

struct UserProfile {
  int city = 0;
  GeoPoint home;
  std::vector<double> category_weight;   // per taxonomy entry
  std::map<std::string, int> preferred;  // group -> taxonomy index
  std::vector<int> preferred_brand;      // per taxonomy entry
};

class LogBuilder {
 public:
  LogBuilder(const GenConfig& cfg, const std::vector<PoiRecord>& pois)
      : cfg_(cfg), pois_(pois), cities_(GenCities(cfg)) {
    for (size_t i = 0; i < cfg.taxonomy.size(); ++i) category_index_[cfg.taxonomy[i].name] = i;
    by_city_category_.assign(cities_.size(),
                             std::vector<std::vector<int>>(cfg.taxonomy.size()));
    by_city_brand_.resize(cities_.size());
    for (size_t i = 0; i < pois.size(); ++i) {
      const auto& p = pois[i];
      auto city_it = p.extra.find("city");
      int city = -1;
      if (city_it != p.extra.end()) {
        city = std::stoi(city_it->second);
      } else {
        for (size_t c = 0; c < cities_.size(); ++c) {
          if (cities_[c].Contains(p.location)) city = static_cast<int>(c);
        }
      }
      auto cat_it = category_index_.find(p.category);
      if (city < 0 || city >= static_cast<int>(cities_.size()) ||
          cat_it == category_index_.end()) {
        continue;
      }
      by_city_category_[city][cat_it->second].push_back(static_cast<int>(i));
      auto brand_it = p.extra.find("brand");
      if (brand_it != p.extra.end()) by_city_brand_[city][brand_it->second].push_back(i);
    }
  }

  UserProfile MakeUser(Rng& rng) const {
    UserProfile u;
    u.city = static_cast<int>(rng.Below(cities_.size()));
    u.home = SampleInCity(cities_[u.city], 1.0, rng);
    std::map<std::string, std::vector<int>> groups;
    for (size_t i = 0; i < cfg_.taxonomy.size(); ++i) {
      if (!cfg_.taxonomy[i].group.empty()) groups[cfg_.taxonomy[i].group].push_back(i);
    }
    for (const auto& [g, members] : groups) u.preferred[g] = members[rng.Below(members.size())];
    u.category_weight.resize(cfg_.taxonomy.size());
    u.preferred_brand.resize(cfg_.taxonomy.size(), -1);
    for (size_t i = 0; i < cfg_.taxonomy.size(); ++i) {
      const auto& cat = cfg_.taxonomy[i];
      const bool pref = !cat.group.empty() && u.preferred.at(cat.group) == static_cast<int>(i);
      u.category_weight[i] = cat.weight * (pref ? 4.0 : 1.0);
      if (!cat.brands.empty()) u.preferred_brand[i] = rng.Below(cat.brands.size());
    }
    return u;
  }

  // Draws one interaction; false when the drawn template has no answer in
  // the user's city.
  bool Draw(const UserProfile& u, Rng& rng, Interaction* out) const {
    const City& city = cities_[u.city];
    out->location = SampleNear(city, u.home, 0.3, rng);
    const double mix[] = {cfg_.mix_exact, cfg_.mix_nearby, cfg_.mix_brand, cfg_.mix_regional};
    out->kind = static_cast<QueryTemplate>(rng.Weighted(mix));
    const auto& tax = cfg_.taxonomy;
    auto pick_category = [&](auto pred) -> int {
      std::vector<double> w(tax.size(), 0.0);
      for (size_t i = 0; i < tax.size(); ++i) {
        if (pred(tax[i])) w[i] = u.category_weight[i];
      }
      if (std::all_of(w.begin(), w.end(), [](double x) { return x == 0; })) return -1;
      return static_cast<int>(rng.Weighted(w));
    };
    const auto& by_cat = by_city_category_[u.city];

    switch (out->kind) {
      case QueryTemplate::kExactName: {
        const int c = pick_category([](const CategorySpec& s) { return s.scope != Scope::kRegional; });
        if (c < 0 || by_cat[c].empty()) return false;
        // A random POI among the 20 nearest of the category.
        std::vector<std::pair<double, int>> near;
        for (int i : by_cat[c]) near.emplace_back(HaversineDistance(out->location, pois_[i].location), i);
        const size_t n = std::min<size_t>(20, near.size());
        std::partial_sort(near.begin(), near.begin() + n, near.end());
        const PoiRecord& p = pois_[near[rng.Below(n)].second];
        out->query = p.name;
        out->poi_id = p.poi_id;
        out->category = tax[c].name;
        return true;
      }
      case QueryTemplate::kCategoryNearby: {
        int c = pick_category([](const CategorySpec& s) { return s.scope != Scope::kRegional; });
        if (c < 0) return false;
        std::string phrase = tax[c].name;
        if (!tax[c].group.empty() && rng.Uniform() < cfg_.group_query_prob) {
          phrase = tax[c].group;
          c = u.preferred.at(tax[c].group);
        }
        out->query = rng.Uniform() < 0.5 ? phrase + " nearby" : "nearby " + phrase;
        out->category = tax[c].name;
        return Nearest(by_cat[c], out);
      }
      case QueryTemplate::kBrand: {
        const int c = pick_category([](const CategorySpec& s) {
          return s.scope != Scope::kRegional && !s.brands.empty();
        });
        if (c < 0) return false;
        const size_t b = rng.Uniform() < 0.7 ? u.preferred_brand[c] : rng.Below(tax[c].brands.size());
        const std::string& brand = tax[c].brands[b];
        out->query = brand;
        out->category = tax[c].name;
        auto it = by_city_brand_[u.city].find(brand);
        if (it == by_city_brand_[u.city].end()) return false;
        return Nearest(it->second, out);
      }
      case QueryTemplate::kRegional: {
        std::vector<int> regional;
        for (size_t i = 0; i < tax.size(); ++i) {
          if (tax[i].scope == Scope::kRegional) regional.push_back(i);
        }
        if (regional.empty()) return false;
        const int c = regional[rng.Below(regional.size())];
        out->query = tax[c].name;
        out->category = tax[c].name;
        return Nearest(by_cat[c], out);
      }
    }
    return false;
  }

 private:
  bool Nearest(const std::vector<int>& candidates, Interaction* out) const {
    if (candidates.empty()) return false;
    int best = -1;
    double best_d = 0;
    for (int i : candidates) {
      const double d = HaversineDistance(out->location, pois_[i].location);
      if (best < 0 || d < best_d) {
        best = i;
        best_d = d;
      }
    }
    out->poi_id = pois_[best].poi_id;
    return true;
  }

  const GenConfig& cfg_;
  const std::vector<PoiRecord>& pois_;
  std::vector<City> cities_;
  std::map<std::string, size_t> category_index_;
  std::vector<std::vector<std::vector<int>>> by_city_category_;
  std::vector<std::map<std::string, std::vector<int>>> by_city_brand_;
};

constexpr int kMaxRetries = 10;

}  // namespace

std::vector<LogRecord> GenLogs(const GenConfig& cfg, const std::vector<PoiRecord>& pois,
                               GenLogsStats* stats) {
  cfg.Validate();
  Require(!pois.empty(), "cannot generate logs without POIs");
  LogBuilder builder(cfg, pois);
  Rng rng(DeriveSeed(cfg.seed, "logs"));
  GenLogsStats local;
  const double q = cfg.avg_history_len / (1.0 + cfg.avg_history_len);

  std::vector<LogRecord> logs;
  for (int s = 0; s < cfg.n_sequences; ++s) {
    const UserProfile user = builder.MakeUser(rng);
    int h = 0;
    while (h < cfg.max_history && rng.Uniform() < q) ++h;
    std::vector<Interaction> steps;
    for (int i = 0; i <= h; ++i) {
      Interaction it;
      bool ok = false;
      for (int attempt = 0; attempt <= kMaxRetries && !ok; ++attempt) {
        ok = builder.Draw(user, rng, &it);
        if (!ok) ++local.retries;
      }
      if (ok) {
        steps.push_back(std::move(it));
      } else {
        ++local.skipped;
      }
    }
    if (steps.empty()) continue;
    LogRecord rec;
    rec.user_id = s;
    rec.current = std::move(steps.back());
    steps.pop_back();
    rec.history = std::move(steps);
    logs.push_back(std::move(rec));
  }

  // Split by user so no user crosses splits.
  std::vector<size_t> order(logs.size());
  std::iota(order.begin(), order.end(), 0);
  rng.Shuffle(std::span<size_t>(order));
  const size_t n_train = static_cast<size_t>(std::round(cfg.train_fraction * logs.size()));
  const size_t n_valid = static_cast<size_t>(std::round(cfg.valid_fraction * logs.size()));
  for (size_t r = 0; r < order.size(); ++r) {
    logs[order[r]].split = r < n_train ? Split::kTrain
                           : r < n_train + n_valid ? Split::kValid
                                                   : Split::kTest;
  }
  if (stats) *stats = local;
  return logs;
}

namespace {

nlohmann::json InteractionJson(const Interaction& it) {
  return {{"query", it.query},
          {"lat", it.location.lat()},
          {"lon", it.location.lon()},
          {"poi_id", it.poi_id},
          {"template", QueryTemplateName(it.kind)},
          {"category", it.category}};
}

Interaction InteractionFromJson(const nlohmann::json& j) {
  Interaction it;
  it.query = j.at("query").get<std::string>();
  it.location = GeoPoint(j.at("lat").get<double>(), j.at("lon").get<double>());
  it.poi_id = j.at("poi_id").get<std::string>();
  it.kind = ParseQueryTemplate(j.at("template").get<std::string>());
  it.category = j.value("category", "");
  return it;
}

}  // namespace

void WriteLogFile(const std::string& path, const std::vector<LogRecord>& logs,
                  const std::string& header_config_json) {
  std::ofstream out(path);
  if (!out) Throw(ErrorCode::kIo, "cannot open " + path + " for writing");
  nlohmann::json header = {{"format", "geopid.logs"},
                           {"version", kLogFileVersion},
                           {"records", logs.size()},
                           {"config", nlohmann::json::parse(header_config_json)}};
  out << header.dump() << "\n";
  for (const auto& rec : logs) {
    nlohmann::json j = {{"user", rec.user_id}, {"split", SplitName(rec.split)}};
    j["history"] = nlohmann::json::array();
    for (const auto& h : rec.history) j["history"].push_back(InteractionJson(h));
    j["current"] = InteractionJson(rec.current);
    out << j.dump() << "\n";
  }
  if (!out) Throw(ErrorCode::kIo, "write failed for " + path);
}

std::vector<LogRecord> ReadLogFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) Throw(ErrorCode::kIo, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) Throw(ErrorCode::kFormat, path + ": missing header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    Throw(ErrorCode::kFormat, path + ": bad header: " + e.what());
  }
  if (header.value("format", "") != "geopid.logs") {
    Throw(ErrorCode::kFormat, path + ": not a geopid.logs file");
  }
  if (header.value("version", 0) != kLogFileVersion) {
    Throw(ErrorCode::kFormat, path + ": unsupported logs version");
  }
  std::vector<LogRecord> logs;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      LogRecord rec;
      rec.user_id = j.at("user").get<int>();
      rec.split = ParseSplit(j.at("split").get<std::string>());
      for (const auto& h : j.at("history")) rec.history.push_back(InteractionFromJson(h));
      rec.current = InteractionFromJson(j.at("current"));
      logs.push_back(std::move(rec));
    } catch (const nlohmann::json::exception& e) {
      Throw(ErrorCode::kFormat, path + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      Throw(ErrorCode::kFormat, path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return logs;
}

}  // namespace geopid
