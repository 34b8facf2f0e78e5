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

#ifndef IPOD_TRAIN_CONFIG_H_
#define IPOD_TRAIN_CONFIG_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ipod {

enum class OptimizerKind { kSgd, kAdam };

std::string_view OptimizerName(OptimizerKind k);
std::optional<OptimizerKind> ParseOptimizer(std::string_view s);

// Hyperparameters shared by every trainer. Fields a trainer has no use for
// are ignored (the CRF ignores the LSTM shape and variational dropout).
struct TrainConfig {
  double learning_rate = 0.1;
  int batch_size = 32;
  int epochs = 10;
  OptimizerKind optimizer = OptimizerKind::kSgd;
  uint64_t seed = 0;
  double word_dropout = 0.05;
  double variational_dropout = 0.5;

  int layers = 1;
  int hidden_size = 256;
  int embedding_dim = 64;
  // Global gradient-norm clipping threshold; <= 0 disables clipping.
  double clip_norm = 5.0;

  // Throws kInvalidArgument when a field is out of range.
  void Validate() const;

  // Final CRF values: lr 0.1, batch 32, SGD, word dropout 0.05.
  static TrainConfig CrfDefaults();
  // Final LSTM-CRF values: lr 0.1, batch 128, SGD, one layer of 256 units,
  // dropouts 0.05 / 0.5.
  static TrainConfig LstmCrfDefaults();
};

// Per-epoch mean loss (per sequence), filled in by trainers when given.
struct TrainLog {
  std::vector<double> epoch_loss;
};

}  // namespace ipod

#endif  // IPOD_TRAIN_CONFIG_H_
