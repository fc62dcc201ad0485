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

#ifndef GEOPID_MLP_H_
#define GEOPID_MLP_H_

#include <Eigen/Core>
#include <vector>

#include "geopid/random.h"

namespace geopid {

// Fully connected network with tanh between layers and a linear output.
// Rows of every batch matrix are samples.
class Mlp {
 public:
  struct Layer {
    Eigen::MatrixXd weight;  // out x in
    Eigen::VectorXd bias;    // out
  };

  // Activations kept from Forward for the matching Backward call.
  struct Cache {
    std::vector<Eigen::MatrixXd> inputs;  // input to each layer
  };

  struct Gradients {
    std::vector<Layer> layers;
  };

  Mlp() = default;
  // dims = {in, hidden..., out}; Glorot-uniform weights, zero biases.
  Mlp(const std::vector<int>& dims, Rng& rng);

  Eigen::MatrixXd Forward(const Eigen::MatrixXd& x, Cache* cache) const;
  Eigen::VectorXd Apply(const Eigen::VectorXd& x) const;

  // Accumulates parameter gradients into grads and returns dL/dx.
  Eigen::MatrixXd Backward(const Cache& cache, const Eigen::MatrixXd& grad_out,
                           Gradients& grads) const;

  Gradients ZeroGradients() const;
  void Step(const Gradients& grads, double lr);

  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }
  int input_dim() const;
  int output_dim() const;

 private:
  std::vector<Layer> layers_;
};

}  // namespace geopid

#endif  // GEOPID_MLP_H_
