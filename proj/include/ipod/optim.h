// Copyright 2026 The IPOD-NER Authors.
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

#ifndef IPOD_OPTIM_H_
#define IPOD_OPTIM_H_

#include <Eigen/Dense>

#include <span>
#include <vector>

#include "ipod/train_config.h"

namespace ipod {

// Applies SGD or Adam updates to a fixed sequence of parameter blocks.
// Callers visit blocks in the same order every step; `slot` identifies a
// block across steps. Blocks may grow between steps (new rows start with
// zero Adam moments).
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double learning_rate)
      : kind_(kind), lr_(learning_rate) {}

  // Call once per step before the Update calls.
  void BeginStep() { ++step_; }

  void Update(size_t slot, Eigen::Ref<Eigen::MatrixXd> param,
              const Eigen::Ref<const Eigen::MatrixXd> &grad);

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEpsilon = 1e-8;

  OptimizerKind kind_;
  double lr_;
  long step_ = 0;
  std::vector<Eigen::MatrixXd> m_;
  std::vector<Eigen::MatrixXd> v_;
};

// Rescales the gradient blocks in place so their joint L2 norm is at most
// `max_norm`; max_norm <= 0 disables clipping. Returns the norm before
// clipping.
double ClipGlobalNorm(std::span<Eigen::Map<Eigen::MatrixXd>> grads, double max_norm);

}  // namespace ipod

#endif  // IPOD_OPTIM_H_
