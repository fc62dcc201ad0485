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

#include "geopid/mlp.h"

#include <cmath>

#include "geopid/error.h"

namespace geopid {

Mlp::Mlp(const std::vector<int>& dims, Rng& rng) {
  Require(dims.size() >= 2, "an MLP needs at least an input and output size");
  for (size_t i = 0; i + 1 < dims.size(); ++i) {
    const int in = dims[i], out = dims[i + 1];
    Require(in > 0 && out > 0, "MLP layer sizes must be positive");
    const double limit = std::sqrt(6.0 / (in + out));
    Layer layer{Eigen::MatrixXd(out, in), Eigen::VectorXd::Zero(out)};
    for (int r = 0; r < out; ++r) {
      for (int c = 0; c < in; ++c) layer.weight(r, c) = rng.Uniform(-limit, limit);
    }
    layers_.push_back(std::move(layer));
  }
}

int Mlp::input_dim() const {
  return layers_.empty() ? 0 : static_cast<int>(layers_.front().weight.cols());
}

int Mlp::output_dim() const {
  return layers_.empty() ? 0 : static_cast<int>(layers_.back().weight.rows());
}

Eigen::MatrixXd Mlp::Forward(const Eigen::MatrixXd& x, Cache* cache) const {
  Eigen::MatrixXd h = x;
  if (cache) cache->inputs.clear();
  for (size_t i = 0; i < layers_.size(); ++i) {
    if (cache) cache->inputs.push_back(h);
    Eigen::MatrixXd z = h * layers_[i].weight.transpose();
    z.rowwise() += layers_[i].bias.transpose();
    h = (i + 1 < layers_.size()) ? Eigen::MatrixXd(z.array().tanh()) : z;
  }
  return h;
}

Eigen::VectorXd Mlp::Apply(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd row = x.transpose();
  return Forward(row, nullptr).row(0).transpose();
}

Eigen::MatrixXd Mlp::Backward(const Cache& cache,
                              const Eigen::MatrixXd& grad_out,
                              Gradients& grads) const {
  Eigen::MatrixXd g = grad_out;
  for (size_t k = layers_.size(); k-- > 0;) {
    const Eigen::MatrixXd& in = cache.inputs[k];
    grads.layers[k].weight.noalias() += g.transpose() * in;
    grads.layers[k].bias += g.colwise().sum().transpose();
    g = g * layers_[k].weight;
    if (k > 0) {
      // The input of layer k is tanh of the previous pre-activation.
      g.array() *= 1.0 - in.array().square();
    }
  }
  return g;
}

Mlp::Gradients Mlp::ZeroGradients() const {
  Gradients g;
  for (const auto& l : layers_) {
    g.layers.push_back({Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()),
                        Eigen::VectorXd::Zero(l.bias.size())});
  }
  return g;
}

void Mlp::Step(const Gradients& grads, double lr) {
  for (size_t i = 0; i < layers_.size(); ++i) {
    layers_[i].weight -= lr * grads.layers[i].weight;
    layers_[i].bias -= lr * grads.layers[i].bias;
  }
}

}  // namespace geopid
