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

// A standard LSTM cell (sigmoid input/forget/output gates, tanh candidate
// and output squashing) with batched forward and backward passes. A batch
// is a set of equal-length sequences laid out as columns.
//
//   z_t = W [x_t; m * h_{t-1}] + b,   z = [z_i; z_f; z_o; z_g]
//   c_t = sigmoid(z_f) * c_{t-1} + sigmoid(z_i) * tanh(z_g)
//   h_t = sigmoid(z_o) * tanh(c_t)
//
// m is an optional per-sequence recurrent dropout mask held fixed over
// time.

#ifndef IPOD_LSTM_H_
#define IPOD_LSTM_H_

#include <Eigen/Dense>

#include <algorithm>
#include <iterator>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "ipod/common.h"
#include "ipod/linear_chain.h"

namespace ipod {

template <typename Scalar>
struct LstmCell {
  // [4H x (input + H)], gate blocks in the order i, f, o, g.
  MatrixX<Scalar> w;
  VectorX<Scalar> b;

  int input_size() const { return static_cast<int>(w.cols() - w.rows() / 4); }
  int hidden_size() const { return static_cast<int>(w.rows() / 4); }

  static LstmCell Zero(int input, int hidden) {
    return {MatrixX<Scalar>::Zero(4 * hidden, input + hidden),
            VectorX<Scalar>::Zero(4 * hidden)};
  }

  static LstmCell Uniform(int input, int hidden, Scalar range, Rng &rng) {
    std::uniform_real_distribution<double> d(-range, range);
    LstmCell cell = Zero(input, hidden);
    for (Eigen::Index i = 0; i < cell.w.size(); ++i) {
      cell.w.data()[i] = static_cast<Scalar>(d(rng));
    }
    for (Eigen::Index i = 0; i < cell.b.size(); ++i) {
      cell.b.data()[i] = static_cast<Scalar>(d(rng));
    }
    return cell;
  }
};

template <typename Scalar>
struct LstmTrace {
  std::vector<MatrixX<Scalar>> inputs;       // x_t, [input x B]
  std::vector<MatrixX<Scalar>> recurrent;    // m * h_{t-1}, [H x B]
  std::vector<MatrixX<Scalar>> gates;        // activated i, f, o, g, [4H x B]
  std::vector<MatrixX<Scalar>> cells;        // c_t
  std::vector<MatrixX<Scalar>> hidden;       // h_t
  MatrixX<Scalar> mask;                      // empty when unused
};

namespace internal {

template <typename Derived>
auto Sigmoid(const Eigen::ArrayBase<Derived> &x) {
  using Scalar = typename Derived::Scalar;
  return Scalar(1) / (Scalar(1) + (-x).exp());
}

}  // namespace internal

template <typename Scalar>
LstmTrace<Scalar> LstmForward(const LstmCell<Scalar> &cell,
                              std::vector<MatrixX<Scalar>> inputs,
                              const MatrixX<Scalar> *mask = nullptr) {
  const int hs = cell.hidden_size();
  const int in = cell.input_size();
  const Eigen::Index batch = inputs.empty() ? 0 : inputs[0].cols();
  LstmTrace<Scalar> tr;
  tr.inputs = std::move(inputs);
  if (mask != nullptr) tr.mask = *mask;
  const size_t steps = tr.inputs.size();
  tr.recurrent.reserve(steps);
  tr.gates.reserve(steps);
  tr.cells.reserve(steps);
  tr.hidden.reserve(steps);
  MatrixX<Scalar> h = MatrixX<Scalar>::Zero(hs, batch);
  MatrixX<Scalar> c = MatrixX<Scalar>::Zero(hs, batch);
  for (size_t t = 0; t < steps; ++t) {
    MatrixX<Scalar> hp = mask != nullptr ? MatrixX<Scalar>(h.cwiseProduct(*mask)) : h;
    MatrixX<Scalar> z = cell.w.leftCols(in) * tr.inputs[t];
    z.noalias() += cell.w.rightCols(hs) * hp;
    z.colwise() += cell.b;
    MatrixX<Scalar> a(4 * hs, batch);
    a.topRows(3 * hs) = internal::Sigmoid(z.topRows(3 * hs).array()).matrix();
    a.bottomRows(hs) = z.bottomRows(hs).array().tanh().matrix();
    c = (a.middleRows(hs, hs).array() * c.array() +
         a.topRows(hs).array() * a.bottomRows(hs).array())
            .matrix();
    h = (a.middleRows(2 * hs, hs).array() * c.array().tanh()).matrix();
    tr.recurrent.push_back(std::move(hp));
    tr.gates.push_back(std::move(a));
    tr.cells.push_back(c);
    tr.hidden.push_back(h);
  }
  return tr;
}

template <typename Scalar>
struct LstmGrads {
  LstmCell<Scalar> cell;                    // dW, db
  std::vector<MatrixX<Scalar>> d_inputs;    // dL/dx_t
};

// Backpropagates dL/dh_t (one matrix per step) through the trace.
// Accumulates into grads.cell, which must already be shaped like `cell`.
template <typename Scalar>
void LstmBackward(const LstmCell<Scalar> &cell, const LstmTrace<Scalar> &tr,
                  const std::vector<MatrixX<Scalar>> &d_hidden,
                  LstmGrads<Scalar> &grads) {
  const int hs = cell.hidden_size();
  const int in = cell.input_size();
  const size_t steps = tr.inputs.size();
  grads.d_inputs.assign(steps, MatrixX<Scalar>());
  if (steps == 0) return;
  const Eigen::Index batch = tr.inputs[0].cols();
  MatrixX<Scalar> dh_next = MatrixX<Scalar>::Zero(hs, batch);
  MatrixX<Scalar> dc_next = MatrixX<Scalar>::Zero(hs, batch);
  MatrixX<Scalar> dz(4 * hs, batch);
  for (size_t s = steps; s-- > 0;) {
    const MatrixX<Scalar> &a = tr.gates[s];
    auto gi = a.topRows(hs).array();
    auto gf = a.middleRows(hs, hs).array();
    auto go = a.middleRows(2 * hs, hs).array();
    auto gg = a.bottomRows(hs).array();
    MatrixX<Scalar> dh = d_hidden[s] + dh_next;
    auto tc = tr.cells[s].array().tanh();
    MatrixX<Scalar> dc =
        (dh.array() * go * (Scalar(1) - tc * tc) + dc_next.array()).matrix();
    MatrixX<Scalar> c_prev =
        s > 0 ? tr.cells[s - 1] : MatrixX<Scalar>::Zero(hs, batch);
    dz.topRows(hs) = (dc.array() * gg * gi * (Scalar(1) - gi)).matrix();
    dz.middleRows(hs, hs) =
        (dc.array() * c_prev.array() * gf * (Scalar(1) - gf)).matrix();
    dz.middleRows(2 * hs, hs) = (dh.array() * tc * go * (Scalar(1) - go)).matrix();
    dz.bottomRows(hs) = (dc.array() * gi * (Scalar(1) - gg * gg)).matrix();
    dc_next = (dc.array() * gf).matrix();

    grads.cell.w.leftCols(in).noalias() += dz * tr.inputs[s].transpose();
    grads.cell.w.rightCols(hs).noalias() += dz * tr.recurrent[s].transpose();
    grads.cell.b += dz.rowwise().sum();
    grads.d_inputs[s].noalias() = cell.w.leftCols(in).transpose() * dz;
    dh_next.noalias() = cell.w.rightCols(hs).transpose() * dz;
    if (tr.mask.size() > 0) dh_next = dh_next.cwiseProduct(tr.mask);
  }
}

// Stacked cells, layer l reading layer l-1's hidden states. `masks`, when
// given, holds one recurrent mask per layer.
template <typename Scalar>
std::vector<LstmTrace<Scalar>> StackForward(
    const std::vector<LstmCell<Scalar>> &cells, std::vector<MatrixX<Scalar>> inputs,
    const std::vector<MatrixX<Scalar>> *masks = nullptr) {
  std::vector<LstmTrace<Scalar>> traces;
  traces.reserve(cells.size());
  for (size_t l = 0; l < cells.size(); ++l) {
    std::vector<MatrixX<Scalar>> in =
        l == 0 ? std::move(inputs) : traces.back().hidden;
    traces.push_back(LstmForward(cells[l], std::move(in),
                                 masks != nullptr ? &(*masks)[l] : nullptr));
  }
  return traces;
}

// Backpropagates dL/dh of the top layer. Returns dL/dx of the bottom
// layer's inputs.
template <typename Scalar>
std::vector<MatrixX<Scalar>> StackBackward(
    const std::vector<LstmCell<Scalar>> &cells,
    const std::vector<LstmTrace<Scalar>> &traces,
    std::vector<MatrixX<Scalar>> d_top, std::vector<LstmCell<Scalar>> &grad_cells) {
  for (size_t l = cells.size(); l-- > 0;) {
    LstmGrads<Scalar> g{std::move(grad_cells[l]), {}};
    LstmBackward(cells[l], traces[l], d_top, g);
    grad_cells[l] = std::move(g.cell);
    d_top = std::move(g.d_inputs);
  }
  return d_top;
}

// Indices of `order` bucketed by sequence length, buckets in order of first
// appearance and members in their original order.
template <typename LengthFn>
std::vector<std::vector<size_t>> GroupByLength(std::span<const size_t> order,
                                               LengthFn length) {
  std::vector<std::vector<size_t>> groups;
  std::vector<std::pair<size_t, size_t>> slot;  // (length, group)
  for (size_t idx : order) {
    const size_t n = length(idx);
    auto it = std::find_if(slot.begin(), slot.end(),
                           [n](const auto &p) { return p.first == n; });
    if (it == slot.end()) {
      slot.emplace_back(n, groups.size());
      groups.emplace_back();
      it = std::prev(slot.end());
    }
    groups[it->second].push_back(idx);
  }
  return groups;
}

// Inverted-dropout mask: each unit kept with probability 1 - p and scaled
// by 1 / (1 - p). One column per sequence.
inline Eigen::MatrixXd DropoutMask(Eigen::Index rows, Eigen::Index cols, double p,
                                   Rng &rng) {
  std::bernoulli_distribution keep(1.0 - p);
  Eigen::MatrixXd m(rows, cols);
  const double scale = 1.0 / (1.0 - p);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = keep(rng) ? scale : 0.0;
  }
  return m;
}

}  // namespace ipod

#endif  // IPOD_LSTM_H_
