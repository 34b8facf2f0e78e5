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

#include "ipod/neural.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "ipod/common.h"
#include "ipod/crf.h"
#include "ipod/model_io.h"
#include "ipod/optim.h"

namespace ipod {

namespace {

Eigen::Map<Eigen::MatrixXd> View(Eigen::MatrixXd &m) {
  return Eigen::Map<Eigen::MatrixXd>(m.data(), m.rows(), m.cols());
}
Eigen::Map<Eigen::MatrixXd> View(Eigen::VectorXd &v) {
  return Eigen::Map<Eigen::MatrixXd>(v.data(), v.size(), 1);
}

// Per-step inputs for a group of equal-length titles. `ids` is filled only
// for the trainable table.
struct GroupInput {
  std::vector<Eigen::MatrixXd> x;      // [input_dim x B] per step
  std::vector<std::vector<int>> ids;   // [step][column]
};

GroupInput TableInput(const LstmCrfModel &m, const std::vector<std::vector<int>> &seqs) {
  const size_t n = seqs[0].size();
  const Eigen::Index batch = static_cast<Eigen::Index>(seqs.size());
  GroupInput in;
  in.x.assign(n, Eigen::MatrixXd(m.embedding.rows(), batch));
  in.ids.assign(n, std::vector<int>(seqs.size()));
  for (size_t t = 0; t < n; ++t) {
    for (size_t b = 0; b < seqs.size(); ++b) {
      in.ids[t][b] = seqs[b][t];
      in.x[t].col(b) = m.embedding.col(seqs[b][t]);
    }
  }
  return in;
}

// rows [n x dim] per title, transposed into per-step columns.
GroupInput VectorInput(const std::vector<const Eigen::MatrixXd *> &rows) {
  const Eigen::Index n = rows[0]->rows();
  GroupInput in;
  in.x.assign(n, Eigen::MatrixXd(rows[0]->cols(), static_cast<Eigen::Index>(rows.size())));
  for (Eigen::Index t = 0; t < n; ++t) {
    for (size_t b = 0; b < rows.size(); ++b) in.x[t].col(b) = rows[b]->row(t).transpose();
  }
  return in;
}

struct GroupTrace {
  std::vector<LstmTrace<double>> fwd;  // per layer
  std::vector<LstmTrace<double>> bwd;
  std::vector<Eigen::MatrixXd> top;    // [2H x B] per step
};

// masks, when given, holds 2 * layers recurrent masks: forward then
// backward for each layer.
GroupTrace RunGroup(const LstmCrfModel &m, std::vector<Eigen::MatrixXd> x,
                    const std::vector<Eigen::MatrixXd> *masks) {
  const size_t n = x.size();
  const int hs = m.hidden_size();
  GroupTrace g;
  for (size_t l = 0; l < m.layers.size(); ++l) {
    std::vector<Eigen::MatrixXd> rev(x.rbegin(), x.rend());
    g.fwd.push_back(LstmForward(m.layers[l].forward, std::move(x),
                                masks != nullptr ? &(*masks)[2 * l] : nullptr));
    g.bwd.push_back(LstmForward(m.layers[l].backward, std::move(rev),
                                masks != nullptr ? &(*masks)[2 * l + 1] : nullptr));
    x.assign(n, Eigen::MatrixXd());
    for (size_t t = 0; t < n; ++t) {
      x[t].resize(2 * hs, g.fwd.back().hidden[t].cols());
      x[t] << g.fwd.back().hidden[t], g.bwd.back().hidden[n - 1 - t];
    }
  }
  g.top = std::move(x);
  return g;
}

// Emissions of column b as an [n x labels] matrix.
Eigen::MatrixXd ColumnEmissions(const std::vector<Eigen::MatrixXd> &scores, Eigen::Index b) {
  Eigen::MatrixXd e(static_cast<Eigen::Index>(scores.size()), kNumLabels);
  for (size_t t = 0; t < scores.size(); ++t) e.row(t) = scores[t].col(b).transpose();
  return e;
}

std::vector<Eigen::MatrixXd> Project(const LstmCrfModel &m, const GroupTrace &g) {
  std::vector<Eigen::MatrixXd> scores;
  scores.reserve(g.top.size());
  for (const Eigen::MatrixXd &h : g.top) {
    Eigen::MatrixXd s = m.projection.transpose() * h;
    s.colwise() += m.projection_bias;
    scores.push_back(std::move(s));
  }
  return scores;
}

// Loss of one title given its emissions; writes dL/d(emissions).
double TitleLoss(const LstmCrfModel &m, const Eigen::MatrixXd &e, std::span<const int> gold,
                 Eigen::MatrixXd *d_e, Transitions<double> *d_t) {
  if (m.kind == NeuralKind::kLstmCrf) {
    ChainNll<double> nll = ChainNllAndGradient(e, m.transitions, gold);
    if (d_e != nullptr) {
      *d_e = std::move(nll.d_emissions);
      d_t->trans += nll.d_transitions.trans;
      d_t->start += nll.d_transitions.start;
      d_t->stop += nll.d_transitions.stop;
    }
    return nll.loss;
  }
  double loss = 0.0;
  if (d_e != nullptr) d_e->resize(e.rows(), e.cols());
  for (Eigen::Index i = 0; i < e.rows(); ++i) {
    const double lse = LogSumExp(e.row(i));
    loss += lse - e(i, gold[i]);
    if (d_e != nullptr) {
      d_e->row(i) = (e.row(i).array() - lse).exp().matrix();
      (*d_e)(i, gold[i]) -= 1.0;
    }
  }
  return loss;
}

// Loss of a group and, when grad is given, its gradient.
double GroupLoss(const LstmCrfModel &m, const GroupInput &in,
                 const std::vector<std::vector<int>> &gold,
                 const std::vector<Eigen::MatrixXd> *masks, LstmCrfModel *grad) {
  const size_t n = in.x.size();
  const Eigen::Index batch = static_cast<Eigen::Index>(gold.size());
  const int hs = m.hidden_size();
  GroupTrace g = RunGroup(m, in.x, masks);
  std::vector<Eigen::MatrixXd> scores = Project(m, g);
  std::vector<Eigen::MatrixXd> d_scores;
  if (grad != nullptr) d_scores.assign(n, Eigen::MatrixXd(kNumLabels, batch));
  double loss = 0.0;
  for (Eigen::Index b = 0; b < batch; ++b) {
    Eigen::MatrixXd d_e;
    loss += TitleLoss(m, ColumnEmissions(scores, b), gold[b],
                      grad != nullptr ? &d_e : nullptr,
                      grad != nullptr ? &grad->transitions : nullptr);
    if (grad == nullptr) continue;
    for (size_t t = 0; t < n; ++t) d_scores[t].col(b) = d_e.row(t).transpose();
  }
  if (grad == nullptr) return loss;

  std::vector<Eigen::MatrixXd> d_h(n);
  for (size_t t = 0; t < n; ++t) {
    grad->projection.noalias() += g.top[t] * d_scores[t].transpose();
    grad->projection_bias += d_scores[t].rowwise().sum();
    d_h[t].noalias() = m.projection * d_scores[t];
  }
  for (size_t l = m.layers.size(); l-- > 0;) {
    std::vector<Eigen::MatrixXd> d_f(n), d_b(n);
    for (size_t t = 0; t < n; ++t) {
      d_f[t] = d_h[t].topRows(hs);
      d_b[n - 1 - t] = d_h[t].bottomRows(hs);
    }
    LstmGrads<double> gf{std::move(grad->layers[l].forward), {}};
    LstmGrads<double> gb{std::move(grad->layers[l].backward), {}};
    LstmBackward(m.layers[l].forward, g.fwd[l], d_f, gf);
    LstmBackward(m.layers[l].backward, g.bwd[l], d_b, gb);
    grad->layers[l].forward = std::move(gf.cell);
    grad->layers[l].backward = std::move(gb.cell);
    for (size_t t = 0; t < n; ++t) d_h[t] = gf.d_inputs[t] + gb.d_inputs[n - 1 - t];
  }
  if (!in.ids.empty()) {
    for (size_t t = 0; t < n; ++t) {
      for (Eigen::Index b = 0; b < batch; ++b) {
        grad->embedding.col(in.ids[t][b]) += d_h[t].col(b);
      }
    }
  }
  return loss;
}

void RequireExample(const LstmCrfModel &m, const LabeledSequence &ex) {
  if (ex.tokens.empty() || ex.tokens.size() != ex.labels.size()) {
    throw Error(ErrorKind::kInvalidArgument,
                "training example is empty or has mismatched labels");
  }
  if (m.kind != NeuralKind::kLstmCrf) return;
  if (std::optional<size_t> bad = FirstIllegalPosition(ex.labels)) {
    throw Error(ErrorKind::kFormat, "training example '" + Join(ex.tokens, " ") +
                                        "' has an illegal BIOES label at position " +
                                        std::to_string(*bad));
  }
}

GroupInput SingleInput(const LstmCrfModel &m, std::span<const std::string> tokens,
                       Eigen::MatrixXd *storage) {
  if (m.bilm) {
    *storage = EmbedTitle(*m.bilm, tokens);
    return VectorInput({storage});
  }
  return TableInput(m, {m.vocab.Ids(tokens)});
}

std::string_view KindName(NeuralKind kind) {
  return kind == NeuralKind::kLstm ? "lstm" : "lstm-crf";
}

}  // namespace

int LstmCrfModel::input_dim() const {
  return bilm ? bilm->context_dim() : static_cast<int>(embedding.rows());
}

std::vector<Eigen::Map<Eigen::MatrixXd>> LstmCrfModel::Blocks() {
  std::vector<Eigen::Map<Eigen::MatrixXd>> blocks;
  if (!bilm) blocks.push_back(View(embedding));
  for (BiLstmLayer &layer : layers) {
    for (LstmCell<double> *c : {&layer.forward, &layer.backward}) {
      blocks.push_back(View(c->w));
      blocks.push_back(View(c->b));
    }
  }
  blocks.push_back(View(projection));
  blocks.push_back(View(projection_bias));
  blocks.push_back(View(transitions.trans));
  blocks.push_back(View(transitions.start));
  blocks.push_back(View(transitions.stop));
  return blocks;
}

LstmCrfModel LstmCrfModel::ZerosLike() const {
  LstmCrfModel z = *this;
  for (auto &block : z.Blocks()) block.setZero();
  return z;
}

LstmCrfModel InitLstmCrf(NeuralKind kind, Vocab vocab, const TrainConfig &cfg, Rng &rng,
                         std::shared_ptr<const BiLmModel> bilm) {
  cfg.Validate();
  LstmCrfModel m;
  m.kind = kind;
  m.vocab = std::move(vocab);
  std::uniform_real_distribution<double> emb(-0.1, 0.1);
  if (bilm) {
    m.bilm_hash = bilm->ContentHash();
    m.bilm = std::move(bilm);
    m.vocab = Vocab();
  } else {
    m.embedding.resize(cfg.embedding_dim, m.vocab.size());
    for (Eigen::Index i = 0; i < m.embedding.size(); ++i) m.embedding.data()[i] = emb(rng);
  }
  const int hs = cfg.hidden_size;
  const double r = 1.0 / std::sqrt(static_cast<double>(hs));
  for (int l = 0; l < cfg.layers; ++l) {
    const int in = l == 0 ? m.input_dim() : 2 * hs;
    BiLstmLayer layer{LstmCell<double>::Uniform(in, hs, r, rng),
                      LstmCell<double>::Uniform(in, hs, r, rng)};
    layer.forward.b.segment(hs, hs).setOnes();
    layer.backward.b.segment(hs, hs).setOnes();
    m.layers.push_back(std::move(layer));
  }
  const double g = std::sqrt(6.0 / (2.0 * hs + kNumLabels));
  std::uniform_real_distribution<double> glorot(-g, g);
  m.projection.resize(2 * hs, kNumLabels);
  for (Eigen::Index i = 0; i < m.projection.size(); ++i) m.projection.data()[i] = glorot(rng);
  m.projection_bias = Eigen::VectorXd::Zero(kNumLabels);
  return m;
}

Eigen::MatrixXd BiLstmEmissions(const LstmCrfModel &model,
                                std::span<const std::string> tokens) {
  if (tokens.empty()) throw Error(ErrorKind::kInvalidArgument, "empty token sequence");
  Eigen::MatrixXd storage;
  GroupInput in = SingleInput(model, tokens, &storage);
  return ColumnEmissions(Project(model, RunGroup(model, std::move(in.x), nullptr)), 0);
}

double NeuralNll(const LstmCrfModel &model, const LabeledSequence &example,
                 LstmCrfModel *grad) {
  RequireExample(model, example);
  Eigen::MatrixXd storage;
  GroupInput in = SingleInput(model, example.tokens, &storage);
  return GroupLoss(model, in, {LabelIds(example.labels)}, nullptr, grad);
}

std::vector<BioesLabel> Predict(const LstmCrfModel &model, std::span<const std::string> tokens) {
  if (tokens.empty()) return {};
  Eigen::MatrixXd e = BiLstmEmissions(model, tokens);
  if (model.kind == NeuralKind::kLstm) return LabelsFromIds(RowArgmax(e));
  return LabelsFromIds(Viterbi(e, model.transitions));
}

namespace {

LstmCrfModel TrainImpl(NeuralKind kind, std::span<const LabeledSequence> data,
                       const TrainConfig &cfg, std::shared_ptr<const BiLmModel> bilm,
                       TrainLog *log) {
  cfg.Validate();
  if (data.empty()) throw Error(ErrorKind::kInvalidArgument, "empty training set");
  Rng rng(cfg.seed);
  std::vector<std::vector<std::string>> token_lists;
  token_lists.reserve(data.size());
  for (const LabeledSequence &ex : data) token_lists.push_back(ex.tokens);
  LstmCrfModel model =
      InitLstmCrf(kind, bilm ? Vocab() : Vocab::Build(token_lists, 1), cfg, rng, bilm);
  for (const LabeledSequence &ex : data) RequireExample(model, ex);

  std::vector<std::vector<int>> gold(data.size());
  std::vector<std::vector<int>> ids(data.size());
  // Frozen biLM vectors of the undropped titles, computed once.
  std::vector<Eigen::MatrixXd> cached(model.bilm ? data.size() : 0);
  for (size_t k = 0; k < data.size(); ++k) {
    gold[k] = LabelIds(data[k].labels);
    ids[k] = model.vocab.Ids(data[k].tokens);
    if (model.bilm) cached[k] = EmbedTitle(*model.bilm, data[k].tokens);
  }

  const int hs = model.hidden_size();
  std::bernoulli_distribution drop(cfg.word_dropout);
  Optimizer opt(cfg.optimizer, cfg.learning_rate);
  std::vector<size_t> order(data.size());
  std::iota(order.begin(), order.end(), size_t{0});
  const size_t batch = static_cast<size_t>(cfg.batch_size);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (size_t begin = 0; begin < order.size(); begin += batch) {
      const size_t end = std::min(order.size(), begin + batch);
      std::span<const size_t> members(order.data() + begin, end - begin);
      LstmCrfModel grad = model.ZerosLike();
      double batch_loss = 0.0;
      for (const auto &group :
           GroupByLength(members, [&](size_t i) { return ids[i].size(); })) {
        std::vector<std::vector<int>> seqs, golds;
        std::vector<Eigen::MatrixXd> dropped;
        dropped.reserve(group.size());
        std::vector<const Eigen::MatrixXd *> rows;
        for (size_t i : group) {
          std::vector<int> seq = ids[i];
          bool any = false;
          if (cfg.word_dropout > 0.0) {
            for (int &id : seq) {
              if (drop(rng)) {
                id = Vocab::kUnk;
                any = true;
              }
            }
          }
          if (model.bilm) {
            if (any) {
              std::vector<std::string> toks = data[i].tokens;
              for (size_t t = 0; t < seq.size(); ++t) {
                if (seq[t] == Vocab::kUnk) toks[t] = kUnkToken;
              }
              dropped.push_back(EmbedTitle(*model.bilm, toks));
              rows.push_back(&dropped.back());
            } else {
              rows.push_back(&cached[i]);
            }
          }
          seqs.push_back(std::move(seq));
          golds.push_back(gold[i]);
        }
        std::vector<Eigen::MatrixXd> masks;
        if (cfg.variational_dropout > 0.0) {
          for (size_t l = 0; l < 2 * model.layers.size(); ++l) {
            masks.push_back(DropoutMask(hs, static_cast<Eigen::Index>(group.size()),
                                        cfg.variational_dropout, rng));
          }
        }
        GroupInput in = model.bilm ? VectorInput(rows) : TableInput(model, seqs);
        batch_loss += GroupLoss(model, in, golds, masks.empty() ? nullptr : &masks, &grad);
      }
      if (!std::isfinite(batch_loss)) {
        throw Error(ErrorKind::kDivergence,
                    std::string(KindName(kind)) + " loss diverged at epoch " +
                        std::to_string(epoch + 1) + ", batch starting at example " +
                        std::to_string(begin) + " (lr " +
                        std::to_string(cfg.learning_rate) + ")");
      }
      epoch_loss += batch_loss;
      if (kind == NeuralKind::kLstm) grad.transitions.SetZero();
      auto grads = grad.Blocks();
      ClipGlobalNorm(grads, cfg.clip_norm);
      auto params = model.Blocks();
      opt.BeginStep();
      for (size_t s = 0; s < params.size(); ++s) opt.Update(s, params[s], grads[s]);
    }
    if (log != nullptr) {
      log->epoch_loss.push_back(epoch_loss / static_cast<double>(data.size()));
    }
  }
  return model;
}

}  // namespace

LstmCrfModel TrainLstmCrf(std::span<const LabeledSequence> data, const TrainConfig &cfg,
                          std::shared_ptr<const BiLmModel> bilm, TrainLog *log) {
  return TrainImpl(NeuralKind::kLstmCrf, data, cfg, std::move(bilm), log);
}

LstmCrfModel TrainLstmSoftmax(std::span<const LabeledSequence> data, const TrainConfig &cfg,
                              std::shared_ptr<const BiLmModel> bilm, TrainLog *log) {
  return TrainImpl(NeuralKind::kLstm, data, cfg, std::move(bilm), log);
}

std::string SerializeLstmCrf(const LstmCrfModel &model) {
  ModelWriter w(KindName(model.kind));
  std::vector<std::string> labels;
  for (int i = 0; i < kNumLabels; ++i) labels.push_back(LabelName(LabelFromIndex(i)));
  w.Strings(labels);
  w.U32(model.bilm ? 1 : 0);
  if (model.bilm) {
    w.String(model.bilm_hash);
    w.U32(static_cast<uint32_t>(model.input_dim()));
  } else {
    w.Strings(model.vocab.tokens());
  }
  w.U32(static_cast<uint32_t>(model.num_layers()));
  w.U32(static_cast<uint32_t>(model.hidden_size()));
  LstmCrfModel &m = const_cast<LstmCrfModel &>(model);
  for (const auto &block : m.Blocks()) w.Matrix(block);
  return w.bytes();
}

LstmCrfModel DeserializeLstmCrf(std::string bytes, std::shared_ptr<const BiLmModel> bilm) {
  ModelReader r(std::move(bytes));
  NeuralKind kind;
  if (r.kind() == "lstm-crf") {
    kind = NeuralKind::kLstmCrf;
  } else if (r.kind() == "lstm") {
    kind = NeuralKind::kLstm;
  } else {
    throw Error(ErrorKind::kFormat, "not an LSTM model (kind '" + r.kind() + "')");
  }
  std::vector<std::string> labels = r.Strings();
  for (int i = 0; i < kNumLabels; ++i) {
    if (static_cast<int>(labels.size()) != kNumLabels ||
        labels[i] != LabelName(LabelFromIndex(i))) {
      throw Error(ErrorKind::kFormat, "model label set does not match BIOES labels");
    }
  }
  Vocab vocab;
  const bool uses_bilm = r.U32() != 0;
  if (uses_bilm) {
    std::string hash = r.String();
    const uint32_t dim = r.U32();
    if (!bilm) {
      throw Error(ErrorKind::kInvalidArgument,
                  "model reads biLM vectors (hash " + hash + "); supply that biLM");
    }
    if (bilm->ContentHash() != hash || static_cast<uint32_t>(bilm->context_dim()) != dim) {
      throw Error(ErrorKind::kInvalidArgument,
                  "biLM hash " + bilm->ContentHash() + " does not match the model's " + hash);
    }
  } else {
    vocab = Vocab::FromTokens(r.Strings());
    bilm = nullptr;
  }
  const uint32_t layers = r.U32();
  const uint32_t hidden = r.U32();
  if (layers < 1 || layers > 16 || hidden < 1) {
    throw Error(ErrorKind::kFormat, "LSTM dimensions out of range");
  }
  // Shapes come from a zero-initialized model of the stored dimensions.
  TrainConfig cfg;
  cfg.layers = static_cast<int>(layers);
  cfg.hidden_size = static_cast<int>(hidden);
  Eigen::MatrixXd table;
  if (!uses_bilm) {
    table = r.Matrix();
    if (table.cols() != vocab.size() || table.rows() < 1) {
      throw Error(ErrorKind::kFormat, "embedding table shape is inconsistent");
    }
    cfg.embedding_dim = static_cast<int>(table.rows());
  }
  Rng unused(0);
  LstmCrfModel m = InitLstmCrf(kind, std::move(vocab), cfg, unused, bilm);
  auto blocks = m.Blocks();
  for (size_t s = 0; s < blocks.size(); ++s) {
    Eigen::MatrixXd stored = s == 0 && !uses_bilm ? table : r.Matrix();
    if (stored.rows() != blocks[s].rows() || stored.cols() != blocks[s].cols()) {
      throw Error(ErrorKind::kFormat, "LSTM weight shapes are inconsistent");
    }
    if (!stored.allFinite()) throw Error(ErrorKind::kFormat, "LSTM model has non-finite weights");
    blocks[s] = stored;
  }
  r.ExpectEnd();
  return m;
}

void SaveLstmCrf(const std::string &path, const LstmCrfModel &model) {
  WriteFile(path, SerializeLstmCrf(model));
}

LstmCrfModel LoadLstmCrf(const std::string &path, std::shared_ptr<const BiLmModel> bilm) {
  return DeserializeLstmCrf(ReadFile(path), std::move(bilm));
}

}  // namespace ipod
