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

// Bidirectional LSTM taggers: a BiLSTM with a linear-chain CRF output layer,
// and the same network decoded token by token through a softmax.
//
// Each layer runs a forward and a backward cell over the layer input and
// concatenates their states, [h_fwd(t); h_bwd(t)]; layer l > 1 reads the
// previous layer's concatenation. Emission row t is
// projection^T [h_fwd(t); h_bwd(t)] + projection_bias of the top layer.

#ifndef IPOD_NEURAL_H_
#define IPOD_NEURAL_H_

#include <Eigen/Dense>

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ipod/labeling.h"
#include "ipod/linear_chain.h"
#include "ipod/lstm.h"
#include "ipod/title2vec.h"
#include "ipod/train_config.h"
#include "ipod/vocab.h"

namespace ipod {

enum class NeuralKind { kLstmCrf, kLstm };

struct BiLstmLayer {
  LstmCell<double> forward;
  LstmCell<double> backward;
};

struct LstmCrfModel {
  NeuralKind kind = NeuralKind::kLstmCrf;

  // Input vectors come from a trainable table over `vocab`, or, when `bilm`
  // is set, from that model's frozen contextual vectors (the table is then
  // empty).
  Vocab vocab;
  Eigen::MatrixXd embedding;  // [D x V]
  std::shared_ptr<const BiLmModel> bilm;
  std::string bilm_hash;

  std::vector<BiLstmLayer> layers;
  Eigen::MatrixXd projection;       // [2H x labels]
  Eigen::VectorXd projection_bias;  // [labels]
  // Unused (kept at zero) by kLstm.
  Transitions<double> transitions = Transitions<double>::Zero(kNumLabels);

  int input_dim() const;
  int hidden_size() const { return layers.empty() ? 0 : layers[0].forward.hidden_size(); }
  int num_layers() const { return static_cast<int>(layers.size()); }

  // Trainable weight blocks in a fixed order: the embedding table (when
  // trainable), each layer's forward then backward cell, projection, its
  // bias, and the transition block.
  std::vector<Eigen::Map<Eigen::MatrixXd>> Blocks();
  LstmCrfModel ZerosLike() const;
};

// Embedding uniform(-0.1, 0.1), LSTM weights uniform(-1/sqrt(H), 1/sqrt(H))
// with forget-gate bias 1, projection Glorot-uniform, everything else zero.
// Uses cfg's layers, hidden_size and embedding_dim.
LstmCrfModel InitLstmCrf(NeuralKind kind, Vocab vocab, const TrainConfig &cfg, Rng &rng,
                         std::shared_ptr<const BiLmModel> bilm = nullptr);

// [n x labels] emission scores, eval mode (no dropout).
Eigen::MatrixXd BiLstmEmissions(const LstmCrfModel &model,
                                std::span<const std::string> tokens);

// Loss of one labeled title in eval mode: the CRF negative log-likelihood
// for kLstmCrf, summed per-token softmax cross-entropy for kLstm. Adds the
// gradient into `grad` (shaped like the model) when given. CRF gold labels
// must be STRICT-legal.
double NeuralNll(const LstmCrfModel &model, const LabeledSequence &example,
                 LstmCrfModel *grad = nullptr);

// Viterbi for kLstmCrf, per-token argmax for kLstm. The latter may return
// BIOES-illegal sequences; decode those with DecodePolicy::kRepair.
std::vector<BioesLabel> Predict(const LstmCrfModel &model, std::span<const std::string> tokens);

// Mini-batch training with word dropout (tokens replaced by "<unk>") and
// per-sequence recurrent dropout masks that stay fixed over time, one per
// layer and direction. Mini-batches are split into equal-length groups. The step uses the gradient summed over the batch,
// clipped to cfg.clip_norm. Throws kDivergence on a non-finite loss.
LstmCrfModel TrainLstmCrf(std::span<const LabeledSequence> data, const TrainConfig &cfg,
                          std::shared_ptr<const BiLmModel> bilm = nullptr,
                          TrainLog *log = nullptr);
LstmCrfModel TrainLstmSoftmax(std::span<const LabeledSequence> data, const TrainConfig &cfg,
                              std::shared_ptr<const BiLmModel> bilm = nullptr,
                              TrainLog *log = nullptr);

// Kinds "lstm-crf" and "lstm". A model trained on biLM vectors stores only
// the biLM's content hash; loading it needs the same biLM.
std::string SerializeLstmCrf(const LstmCrfModel &model);
LstmCrfModel DeserializeLstmCrf(std::string bytes,
                                std::shared_ptr<const BiLmModel> bilm = nullptr);
void SaveLstmCrf(const std::string &path, const LstmCrfModel &model);
LstmCrfModel LoadLstmCrf(const std::string &path,
                         std::shared_ptr<const BiLmModel> bilm = nullptr);

}  // namespace ipod

#endif  // IPOD_NEURAL_H_
