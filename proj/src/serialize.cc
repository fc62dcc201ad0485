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

#include "geopid/serialize.h"

#include <istream>

#include "geopid/error.h"

namespace geopid {

Json MatrixToJson(const Eigen::MatrixXd& m) {
  Json data = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Eigen::MatrixXd MatrixFromJson(const Json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (rows < 0 || cols < 0 || data.size() != static_cast<size_t>(rows * cols)) {
    Throw(ErrorCode::kFormat, "matrix payload size mismatch");
  }
  Eigen::MatrixXd m(rows, cols);
  size_t i = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[i++].get<double>();
  }
  return m;
}

Json VectorToJson(const Eigen::VectorXd& v) {
  return Json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd VectorFromJson(const Json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), values.size());
}

Json AnchorsToJson(const AnchorSet& a) {
  Json out = Json::array();
  for (const auto& p : a.points) out.push_back({p.lat(), p.lon()});
  return out;
}

AnchorSet AnchorsFromJson(const Json& j) {
  AnchorSet a;
  for (const auto& p : j) a.points.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
  return a;
}

Json MlpToJson(const Mlp& m) {
  Json layers = Json::array();
  for (const auto& l : m.layers()) {
    layers.push_back({{"weight", MatrixToJson(l.weight)}, {"bias", VectorToJson(l.bias)}});
  }
  return layers;
}

Mlp MlpFromJson(const Json& j) {
  Mlp m;
  for (const auto& l : j) {
    Mlp::Layer layer{MatrixFromJson(l.at("weight")), VectorFromJson(l.at("bias"))};
    if (layer.weight.rows() != layer.bias.size()) {
      Throw(ErrorCode::kFormat, "MLP layer bias does not match its weight");
    }
    if (!m.layers().empty() && m.layers().back().weight.rows() != layer.weight.cols()) {
      Throw(ErrorCode::kFormat, "MLP layer shapes do not chain");
    }
    m.layers().push_back(std::move(layer));
  }
  return m;
}

Json RqModelToJson(const RqModel& m) {
  Json books = Json::array();
  for (int l = 0; l < m.codebooks.levels(); ++l) books.push_back(MatrixToJson(m.codebooks.level(l)));
  return {{"config", m.config},
          {"encoder", MlpToJson(m.encoder)},
          {"decoder", MlpToJson(m.decoder)},
          {"codebooks", std::move(books)}};
}

RqModel RqModelFromJson(const Json& j) {
  RqModel m;
  m.config = j.at("config").get<RqConfig>();
  m.config.Validate();
  m.encoder = MlpFromJson(j.at("encoder"));
  m.decoder = MlpFromJson(j.at("decoder"));
  std::vector<Eigen::MatrixXd> books;
  for (const auto& b : j.at("codebooks")) books.push_back(MatrixFromJson(b));
  m.codebooks = Codebooks(std::move(books));
  if (m.encoder.input_dim() != m.config.input_dim ||
      m.encoder.output_dim() != m.config.latent_dim ||
      m.codebooks.dim() != m.config.latent_dim ||
      m.codebooks.levels() != m.config.levels ||
      m.codebooks.size() != m.config.codebook_size) {
    Throw(ErrorCode::kFormat, "RQ model shapes disagree with its config");
  }
  return m;
}

Json ProximityToJson(const ProximityModel& m) {
  return {{"config", m.config()},
          {"weights", MatrixToJson(m.weights())},
          {"bias", VectorToJson(m.bias())}};
}

ProximityModel ProximityFromJson(const Json& j) {
  return ProximityModel(j.at("config").get<ProximityConfig>(), MatrixFromJson(j.at("weights")),
                        VectorFromJson(j.at("bias")));
}

Json ReadHeader(std::istream& in, const std::string& path, const std::string& format,
                int version) {
  std::string line;
  if (!std::getline(in, line)) Throw(ErrorCode::kFormat, path + ": missing header line");
  Json header;
  try {
    header = Json::parse(line);
  } catch (const Json::exception& e) {
    Throw(ErrorCode::kFormat, path + ": unreadable header: " + e.what());
  }
  if (!header.is_object() || header.value("format", "") != format) {
    Throw(ErrorCode::kFormat, path + ": expected a " + format + " file");
  }
  if (header.value("version", 0) != version) {
    Throw(ErrorCode::kFormat, path + ": unsupported " + format + " version " +
                                  header.value("version", Json(0)).dump());
  }
  return header;
}

}  // namespace geopid
