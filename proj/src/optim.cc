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

#include "ipod/optim.h"

#include <cmath>

namespace ipod {

namespace {

void GrowTo(Eigen::MatrixXd &state, Eigen::Index rows, Eigen::Index cols) {
  if (state.rows() == rows && state.cols() == cols) return;
  Eigen::MatrixXd grown = Eigen::MatrixXd::Zero(rows, cols);
  Eigen::Index r = std::min(rows, state.rows());
  Eigen::Index c = std::min(cols, state.cols());
  grown.topLeftCorner(r, c) = state.topLeftCorner(r, c);
  state = std::move(grown);
}

}  // namespace

void Optimizer::Update(size_t slot, Eigen::Ref<Eigen::MatrixXd> param,
                       const Eigen::Ref<const Eigen::MatrixXd> &grad) {
  if (kind_ == OptimizerKind::kSgd) {
    param.noalias() -= lr_ * grad;
    return;
  }
  if (slot >= m_.size()) {
    m_.resize(slot + 1);
    v_.resize(slot + 1);
  }
  GrowTo(m_[slot], param.rows(), param.cols());
  GrowTo(v_[slot], param.rows(), param.cols());
  m_[slot] = kBeta1 * m_[slot] + (1.0 - kBeta1) * grad;
  v_[slot] = kBeta2 * v_[slot] + (1.0 - kBeta2) * grad.cwiseProduct(grad);
  const double t = static_cast<double>(step_ < 1 ? 1 : step_);
  const double c1 = 1.0 - std::pow(kBeta1, t);
  const double c2 = 1.0 - std::pow(kBeta2, t);
  param.array() -=
      lr_ * (m_[slot].array() / c1) / ((v_[slot].array() / c2).sqrt() + kEpsilon);
}

double ClipGlobalNorm(std::span<Eigen::Map<Eigen::MatrixXd>> grads, double max_norm) {
  double sq = 0.0;
  for (const auto &g : grads) sq += g.squaredNorm();
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / norm;
    for (auto &g : grads) g *= scale;
  }
  return norm;
}

}  // namespace ipod
