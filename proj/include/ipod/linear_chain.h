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

// First-order linear-chain inference over a dense emission matrix:
// path scoring, the log partition function (forward recursion in log
// space), forward-backward marginals, the negative log-likelihood gradient,
// and Viterbi decoding. Shared by the feature CRF and the LSTM-CRF.
//
// Emissions are laid out [sequence length x labels]. Transition weight
// trans(a, b) scores label a followed by label b.

#ifndef IPOD_LINEAR_CHAIN_H_
#define IPOD_LINEAR_CHAIN_H_

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace ipod {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct Transitions {
  MatrixX<Scalar> trans;
  VectorX<Scalar> start;
  VectorX<Scalar> stop;

  static Transitions Zero(int num_labels) {
    return {MatrixX<Scalar>::Zero(num_labels, num_labels),
            VectorX<Scalar>::Zero(num_labels), VectorX<Scalar>::Zero(num_labels)};
  }

  int num_labels() const { return static_cast<int>(start.size()); }

  void SetZero() {
    trans.setZero();
    start.setZero();
    stop.setZero();
  }
};

template <typename Derived>
typename Derived::Scalar LogSumExp(const Eigen::DenseBase<Derived> &x) {
  using Scalar = typename Derived::Scalar;
  Scalar m = x.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((x.derived().array() - m).exp().sum());
}

template <typename Derived, typename Scalar>
Scalar PathScore(const Eigen::MatrixBase<Derived> &emissions,
                 const Transitions<Scalar> &t, std::span<const int> path) {
  const Eigen::Index n = emissions.rows();
  Scalar s = t.start(path[0]) + t.stop(path[n - 1]);
  for (Eigen::Index i = 0; i < n; ++i) {
    s += emissions(i, path[i]);
    if (i > 0) s += t.trans(path[i - 1], path[i]);
  }
  return s;
}

namespace internal {

// alpha(i, y): log-sum of scores of all prefixes ending at i with label y.
template <typename Derived, typename Scalar>
MatrixX<Scalar> ForwardTable(const Eigen::MatrixBase<Derived> &emissions,
                             const Transitions<Scalar> &t) {
  const Eigen::Index n = emissions.rows();
  const Eigen::Index num_labels = emissions.cols();
  MatrixX<Scalar> alpha(n, num_labels);
  alpha.row(0) = emissions.row(0) + t.start.transpose();
  for (Eigen::Index i = 1; i < n; ++i) {
    for (Eigen::Index y = 0; y < num_labels; ++y) {
      alpha(i, y) = emissions(i, y) +
                    LogSumExp(alpha.row(i - 1).transpose() + t.trans.col(y));
    }
  }
  return alpha;
}

// beta(i, y): log-sum of scores of all suffixes after i given label y at i,
// including the stop weight.
template <typename Derived, typename Scalar>
MatrixX<Scalar> BackwardTable(const Eigen::MatrixBase<Derived> &emissions,
                              const Transitions<Scalar> &t) {
  const Eigen::Index n = emissions.rows();
  const Eigen::Index num_labels = emissions.cols();
  MatrixX<Scalar> beta(n, num_labels);
  beta.row(n - 1) = t.stop.transpose();
  for (Eigen::Index i = n - 2; i >= 0; --i) {
    VectorX<Scalar> next =
        emissions.row(i + 1).transpose() + beta.row(i + 1).transpose();
    for (Eigen::Index y = 0; y < num_labels; ++y) {
      beta(i, y) = LogSumExp(t.trans.row(y).transpose() + next);
    }
  }
  return beta;
}

}  // namespace internal

template <typename Derived, typename Scalar>
Scalar LogPartition(const Eigen::MatrixBase<Derived> &emissions,
                    const Transitions<Scalar> &t) {
  MatrixX<Scalar> alpha = internal::ForwardTable(emissions, t);
  return LogSumExp(alpha.row(emissions.rows() - 1).transpose() + t.stop);
}

template <typename Scalar>
struct ChainMarginals {
  Scalar log_partition = 0;
  // P(y_i = y), [length x labels].
  MatrixX<Scalar> node;
  // Sum over positions of P(y_{i-1} = a, y_i = b).
  MatrixX<Scalar> edge;
};

template <typename Derived, typename Scalar>
ChainMarginals<Scalar> ForwardBackward(const Eigen::MatrixBase<Derived> &emissions,
                                       const Transitions<Scalar> &t) {
  const Eigen::Index n = emissions.rows();
  const Eigen::Index num_labels = emissions.cols();
  MatrixX<Scalar> alpha = internal::ForwardTable(emissions, t);
  MatrixX<Scalar> beta = internal::BackwardTable(emissions, t);
  ChainMarginals<Scalar> m;
  m.log_partition = LogSumExp(alpha.row(n - 1).transpose() + t.stop);
  m.node = ((alpha + beta).array() - m.log_partition).exp().matrix();
  m.edge = MatrixX<Scalar>::Zero(num_labels, num_labels);
  for (Eigen::Index i = 1; i < n; ++i) {
    for (Eigen::Index a = 0; a < num_labels; ++a) {
      for (Eigen::Index b = 0; b < num_labels; ++b) {
        m.edge(a, b) += std::exp(alpha(i - 1, a) + t.trans(a, b) +
                                 emissions(i, b) + beta(i, b) - m.log_partition);
      }
    }
  }
  return m;
}

template <typename Scalar>
struct ChainNll {
  Scalar loss = 0;
  MatrixX<Scalar> d_emissions;
  Transitions<Scalar> d_transitions;
};

// Negative log-likelihood of `gold` and its gradient: model expectations
// minus gold indicator counts.
template <typename Derived, typename Scalar>
ChainNll<Scalar> ChainNllAndGradient(const Eigen::MatrixBase<Derived> &emissions,
                                     const Transitions<Scalar> &t,
                                     std::span<const int> gold) {
  const Eigen::Index n = emissions.rows();
  ChainMarginals<Scalar> m = ForwardBackward(emissions, t);
  ChainNll<Scalar> out;
  out.loss = m.log_partition - PathScore(emissions, t, gold);
  out.d_emissions = m.node;
  out.d_transitions.trans = m.edge;
  out.d_transitions.start = m.node.row(0).transpose();
  out.d_transitions.stop = m.node.row(n - 1).transpose();
  for (Eigen::Index i = 0; i < n; ++i) {
    out.d_emissions(i, gold[i]) -= 1;
    if (i > 0) out.d_transitions.trans(gold[i - 1], gold[i]) -= 1;
  }
  out.d_transitions.start(gold[0]) -= 1;
  out.d_transitions.stop(gold[n - 1]) -= 1;
  return out;
}

// Highest-scoring label path. Ties go to the lowest label index.
template <typename Derived, typename Scalar>
std::vector<int> Viterbi(const Eigen::MatrixBase<Derived> &emissions,
                         const Transitions<Scalar> &t) {
  const Eigen::Index n = emissions.rows();
  const Eigen::Index num_labels = emissions.cols();
  MatrixX<Scalar> delta(n, num_labels);
  Eigen::MatrixXi back(n, num_labels);
  delta.row(0) = emissions.row(0) + t.start.transpose();
  for (Eigen::Index i = 1; i < n; ++i) {
    for (Eigen::Index y = 0; y < num_labels; ++y) {
      Eigen::Index best = 0;
      Scalar best_score = delta(i - 1, 0) + t.trans(0, y);
      for (Eigen::Index k = 1; k < num_labels; ++k) {
        Scalar s = delta(i - 1, k) + t.trans(k, y);
        if (s > best_score) {
          best_score = s;
          best = k;
        }
      }
      delta(i, y) = best_score + emissions(i, y);
      back(i, y) = static_cast<int>(best);
    }
  }
  std::vector<int> path(n);
  Eigen::Index last = 0;
  Scalar last_score = delta(n - 1, 0) + t.stop(0);
  for (Eigen::Index y = 1; y < num_labels; ++y) {
    Scalar s = delta(n - 1, y) + t.stop(y);
    if (s > last_score) {
      last_score = s;
      last = y;
    }
  }
  path[n - 1] = static_cast<int>(last);
  for (Eigen::Index i = n - 1; i > 0; --i) path[i - 1] = back(i, path[i]);
  return path;
}

// Per-row argmax, lowest index on ties.
template <typename Derived>
std::vector<int> RowArgmax(const Eigen::MatrixBase<Derived> &scores) {
  std::vector<int> out(scores.rows());
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index y = 1; y < scores.cols(); ++y) {
      if (scores(i, y) > scores(i, best)) best = y;
    }
    out[i] = static_cast<int>(best);
  }
  return out;
}

}  // namespace ipod

#endif  // IPOD_LINEAR_CHAIN_H_
