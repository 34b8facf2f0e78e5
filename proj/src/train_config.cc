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

#include "ipod/train_config.h"

#include "ipod/common.h"

namespace ipod {

std::string_view OptimizerName(OptimizerKind k) {
  return k == OptimizerKind::kAdam ? "adam" : "sgd";
}

std::optional<OptimizerKind> ParseOptimizer(std::string_view s) {
  if (s == "sgd" || s == "SGD") return OptimizerKind::kSgd;
  if (s == "adam" || s == "Adam" || s == "ADAM") return OptimizerKind::kAdam;
  return std::nullopt;
}

void TrainConfig::Validate() const {
  auto fail = [](const std::string &what) {
    throw Error(ErrorKind::kInvalidArgument, "bad training config: " + what);
  };
  if (!(learning_rate > 0.0)) fail("learning_rate must be > 0");
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (epochs < 0) fail("epochs must be >= 0");
  if (!(word_dropout >= 0.0 && word_dropout < 1.0)) {
    fail("word_dropout must be in [0, 1)");
  }
  if (!(variational_dropout >= 0.0 && variational_dropout < 1.0)) {
    fail("variational_dropout must be in [0, 1)");
  }
  if (layers < 1) fail("layers must be >= 1");
  if (hidden_size < 1) fail("hidden_size must be >= 1");
  if (embedding_dim < 1) fail("embedding_dim must be >= 1");
}

TrainConfig TrainConfig::CrfDefaults() {
  TrainConfig c;
  c.learning_rate = 0.1;
  c.batch_size = 32;
  c.optimizer = OptimizerKind::kSgd;
  c.word_dropout = 0.05;
  c.variational_dropout = 0.5;
  return c;
}

TrainConfig TrainConfig::LstmCrfDefaults() {
  TrainConfig c;
  c.learning_rate = 0.1;
  c.batch_size = 128;
  c.optimizer = OptimizerKind::kSgd;
  c.word_dropout = 0.05;
  c.variational_dropout = 0.5;
  c.layers = 1;
  c.hidden_size = 256;
  return c;
}

}  // namespace ipod
