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

// Title2vec: contextual token vectors from a bidirectional LSTM language
// model trained on job titles, plus a plain-text store of per-title token
// vectors with cosine nearest-neighbour lookup.
//
// The forward LM reads "<s> w1 .. wn" and predicts "w1 .. wn </s>"; the
// backward LM does the same right to left. Layers of one direction are
// stacked, and the two directions share the input embedding. The
// contextual vector of w_t is [emb(w_t); forward states at w_t, layer 1
// first; backward states at w_t], of dimension D + 2 * H * L.

#ifndef IPOD_TITLE2VEC_H_
#define IPOD_TITLE2VEC_H_

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

#include "ipod/lstm.h"
#include "ipod/train_config.h"
#include "ipod/vocab.h"

namespace ipod {

struct BiLmDims {
  int embedding_dim = 64;
  int hidden_size = 128;
  int layers = 1;
};

struct BiLmModel {
  Vocab vocab;
  Eigen::MatrixXd embedding;  // [D x V]
  std::vector<LstmCell<double>> forward;   // per layer
  std::vector<LstmCell<double>> backward;
  Eigen::MatrixXd forward_out;   // [V x H]
  Eigen::VectorXd forward_bias;  // [V]
  Eigen::MatrixXd backward_out;
  Eigen::VectorXd backward_bias;

  int embedding_dim() const { return static_cast<int>(embedding.rows()); }
  int hidden_size() const { return forward.empty() ? 0 : forward[0].hidden_size(); }
  int layers() const { return static_cast<int>(forward.size()); }
  int context_dim() const { return embedding_dim() + 2 * hidden_size() * layers(); }

  // Every weight block in a fixed order, as column-major views.
  std::vector<Eigen::Map<Eigen::MatrixXd>> Blocks();

  // Same shapes, all zero.
  BiLmModel ZerosLike() const;

  // FNV-1a of the serialized model. Models and embedding stores carry it
  // so they can be paired.
  std::string ContentHash() const;
};

// Embedding uniform(-0.1, 0.1), LSTM weights uniform(-1/sqrt(H), 1/sqrt(H)),
// forget-gate bias 1, output layers zero.
BiLmModel InitBiLm(Vocab vocab, const BiLmDims &dims, Rng &rng);

// Log-probabilities [V x (n+1)] of every next token under the forward LM
// (column t conditions on <s> w1 .. wt) or the backward LM (column t
// conditions on </s> wn .. w(n-t+1)).
Eigen::MatrixXd ForwardLogProbs(const BiLmModel &model, std::span<const std::string> tokens);
Eigen::MatrixXd BackwardLogProbs(const BiLmModel &model, std::span<const std::string> tokens);

// Summed forward and backward cross-entropy of one title. Adds the gradient
// into `grad` (shaped like the model) when given.
double BiLmNll(const BiLmModel &model, std::span<const std::string> tokens,
               BiLmModel *grad = nullptr);

struct BiLmLog {
  std::vector<double> epoch_loss;  // mean per title
  std::vector<double> perplexity;  // exp(mean per-prediction CE), both directions
};

// Uses cfg's learning rate, batch size, epochs, optimizer, seed and clip
// norm; gradients are summed over a batch before clipping. Dropout
// settings are ignored. Throws kDivergence on a non-finite loss.
BiLmModel TrainBiLm(std::span<const std::vector<std::string>> titles,
                    const BiLmDims &dims, const TrainConfig &cfg, int min_count = 1,
                    BiLmLog *log = nullptr);

// Perplexity of the model on `titles`.
double BiLmPerplexity(const BiLmModel &model,
                      std::span<const std::vector<std::string>> titles);

// [n x context_dim] contextual vectors.
Eigen::MatrixXd EmbedTitle(const BiLmModel &model, std::span<const std::string> tokens);

std::string SerializeBiLm(const BiLmModel &model);
BiLmModel DeserializeBiLm(std::string bytes);
void SaveBiLm(const std::string &path, const BiLmModel &model);
BiLmModel LoadBiLm(const std::string &path);

struct EmbeddingRecord {
  std::string title_id;
  Eigen::MatrixXd vectors;  // [tokens x dim]
};

// Text format:
//
//   ipod-emb v1 <dim> <hash>
//   <title_id>\t<token count>
//   <dim reals>            one line per token
//   ...
//
// Reals use the shortest representation that reads back to the same
// double, so a store round-trips bit-exactly. Title ids must not contain
// tabs or newlines.
struct EmbeddingFile {
  int dim = 0;
  std::string hash = "-";
  std::vector<EmbeddingRecord> records;

  // Throws kInvalidArgument on a dimension mismatch or an empty record.
  void Add(std::string title_id, Eigen::MatrixXd vectors);
};

std::string SerializeEmbeddingFile(const EmbeddingFile &file);
EmbeddingFile ParseEmbeddingFile(std::string_view contents);
void SaveEmbeddingFile(const std::string &path, const EmbeddingFile &file);
EmbeddingFile LoadEmbeddingFile(const std::string &path);

Eigen::VectorXd MeanPool(const Eigen::MatrixXd &vectors);

struct Neighbor {
  size_t index = 0;
  std::string title_id;
  double similarity = 0.0;
};

// Top k records by cosine similarity of mean-pooled vectors, descending,
// ties by insertion order. A zero vector has similarity 0 to everything.
std::vector<Neighbor> NearestTitles(const EmbeddingFile &store,
                                    const Eigen::VectorXd &query, size_t k);

}  // namespace ipod

#endif  // IPOD_TITLE2VEC_H_
