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

#include "ipod/title2vec.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "ipod/common.h"
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

// Column-wise log-softmax.
Eigen::MatrixXd LogSoftmax(const Eigen::MatrixXd &z) {
  Eigen::MatrixXd out = z;
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    const double m = z.col(j).maxCoeff();
    const double lse = m + std::log((z.col(j).array() - m).exp().sum());
    out.col(j).array() -= lse;
  }
  return out;
}

struct Direction {
  const std::vector<LstmCell<double>> *cells;
  const Eigen::MatrixXd *out;
  const Eigen::VectorXd *bias;
};

struct DirectionGrad {
  std::vector<LstmCell<double>> *cells;
  Eigen::MatrixXd *out;
  Eigen::VectorXd *bias;
  Eigen::MatrixXd *embedding;
};

// inputs[t][b] and targets[t][b] are token ids.
std::vector<MatrixX<double>> Embed(const Eigen::MatrixXd &embedding,
                                   const std::vector<std::vector<int>> &ids) {
  std::vector<MatrixX<double>> x;
  x.reserve(ids.size());
  for (const auto &step : ids) {
    Eigen::MatrixXd m(embedding.rows(), static_cast<Eigen::Index>(step.size()));
    for (size_t b = 0; b < step.size(); ++b) m.col(b) = embedding.col(step[b]);
    x.push_back(std::move(m));
  }
  return x;
}

double DirectionNll(const BiLmModel &model, const Direction &dir,
                    const std::vector<std::vector<int>> &inputs,
                    const std::vector<std::vector<int>> &targets,
                    const DirectionGrad *grad) {
  std::vector<LstmTrace<double>> traces =
      StackForward(*dir.cells, Embed(model.embedding, inputs));
  const auto &top = traces.back().hidden;
  double loss = 0.0;
  std::vector<MatrixX<double>> d_top;
  if (grad != nullptr) d_top.reserve(top.size());
  for (size_t t = 0; t < top.size(); ++t) {
    Eigen::MatrixXd z = (*dir.out) * top[t];
    z.colwise() += *dir.bias;
    Eigen::MatrixXd logp = LogSoftmax(z);
    for (size_t b = 0; b < targets[t].size(); ++b) loss -= logp(targets[t][b], b);
    if (grad == nullptr) continue;
    Eigen::MatrixXd dz = logp.array().exp().matrix();
    for (size_t b = 0; b < targets[t].size(); ++b) dz(targets[t][b], b) -= 1.0;
    grad->out->noalias() += dz * top[t].transpose();
    *grad->bias += dz.rowwise().sum();
    d_top.push_back(dir.out->transpose() * dz);
  }
  if (grad == nullptr) return loss;
  std::vector<MatrixX<double>> dx =
      StackBackward(*dir.cells, traces, std::move(d_top), *grad->cells);
  for (size_t t = 0; t < dx.size(); ++t) {
    for (size_t b = 0; b < inputs[t].size(); ++b) {
      grad->embedding->col(inputs[t][b]) += dx[t].col(b);
    }
  }
  return loss;
}

// Input/target id grids for a group of equal-length titles.
struct Grids {
  std::vector<std::vector<int>> f_in, f_out, b_in, b_out;
};

Grids MakeGrids(const std::vector<std::vector<int>> &titles) {
  const size_t n = titles[0].size();
  Grids g;
  for (auto *grid : {&g.f_in, &g.f_out, &g.b_in, &g.b_out}) {
    grid->assign(n + 1, std::vector<int>(titles.size()));
  }
  for (size_t b = 0; b < titles.size(); ++b) {
    const auto &w = titles[b];
    for (size_t t = 0; t <= n; ++t) {
      g.f_in[t][b] = t == 0 ? Vocab::kBos : w[t - 1];
      g.f_out[t][b] = t == n ? Vocab::kEos : w[t];
      g.b_in[t][b] = t == 0 ? Vocab::kEos : w[n - t];
      g.b_out[t][b] = t == n ? Vocab::kBos : w[n - 1 - t];
    }
  }
  return g;
}

double GroupNll(const BiLmModel &model, const std::vector<std::vector<int>> &titles,
                BiLmModel *grad) {
  Grids g = MakeGrids(titles);
  Direction fwd{&model.forward, &model.forward_out, &model.forward_bias};
  Direction bwd{&model.backward, &model.backward_out, &model.backward_bias};
  if (grad == nullptr) {
    return DirectionNll(model, fwd, g.f_in, g.f_out, nullptr) +
           DirectionNll(model, bwd, g.b_in, g.b_out, nullptr);
  }
  DirectionGrad gf{&grad->forward, &grad->forward_out, &grad->forward_bias,
                   &grad->embedding};
  DirectionGrad gb{&grad->backward, &grad->backward_out, &grad->backward_bias,
                   &grad->embedding};
  return DirectionNll(model, fwd, g.f_in, g.f_out, &gf) +
         DirectionNll(model, bwd, g.b_in, g.b_out, &gb);
}

Eigen::MatrixXd DirectionLogProbs(const BiLmModel &model, const Direction &dir,
                                  const std::vector<std::vector<int>> &inputs) {
  std::vector<LstmTrace<double>> traces =
      StackForward(*dir.cells, Embed(model.embedding, inputs));
  const auto &top = traces.back().hidden;
  Eigen::MatrixXd z(model.vocab.size(), static_cast<Eigen::Index>(top.size()));
  for (size_t t = 0; t < top.size(); ++t) z.col(t) = (*dir.out) * top[t].col(0) + *dir.bias;
  return LogSoftmax(z);
}

void RequireTokens(std::span<const std::string> tokens) {
  if (tokens.empty()) throw Error(ErrorKind::kInvalidArgument, "empty token sequence");
}

}  // namespace

std::vector<Eigen::Map<Eigen::MatrixXd>> BiLmModel::Blocks() {
  std::vector<Eigen::Map<Eigen::MatrixXd>> blocks;
  blocks.push_back(View(embedding));
  for (auto *cells : {&forward, &backward}) {
    for (LstmCell<double> &c : *cells) {
      blocks.push_back(View(c.w));
      blocks.push_back(View(c.b));
    }
  }
  blocks.push_back(View(forward_out));
  blocks.push_back(View(forward_bias));
  blocks.push_back(View(backward_out));
  blocks.push_back(View(backward_bias));
  return blocks;
}

BiLmModel BiLmModel::ZerosLike() const {
  BiLmModel z = *this;
  for (auto &block : z.Blocks()) block.setZero();
  return z;
}

std::string BiLmModel::ContentHash() const {
  return HexDigest(Fnv1a64(SerializeBiLm(*this)));
}

BiLmModel InitBiLm(Vocab vocab, const BiLmDims &dims, Rng &rng) {
  if (dims.embedding_dim < 1 || dims.hidden_size < 1 || dims.layers < 1) {
    throw Error(ErrorKind::kInvalidArgument, "biLM dimensions must be positive");
  }
  BiLmModel m;
  m.vocab = std::move(vocab);
  const int v = m.vocab.size();
  const int hs = dims.hidden_size;
  std::uniform_real_distribution<double> emb(-0.1, 0.1);
  m.embedding.resize(dims.embedding_dim, v);
  for (Eigen::Index i = 0; i < m.embedding.size(); ++i) m.embedding.data()[i] = emb(rng);
  const double r = 1.0 / std::sqrt(static_cast<double>(hs));
  for (auto *cells : {&m.forward, &m.backward}) {
    for (int l = 0; l < dims.layers; ++l) {
      LstmCell<double> c =
          LstmCell<double>::Uniform(l == 0 ? dims.embedding_dim : hs, hs, r, rng);
      c.b.segment(hs, hs).setOnes();
      cells->push_back(std::move(c));
    }
  }
  m.forward_out = Eigen::MatrixXd::Zero(v, hs);
  m.forward_bias = Eigen::VectorXd::Zero(v);
  m.backward_out = Eigen::MatrixXd::Zero(v, hs);
  m.backward_bias = Eigen::VectorXd::Zero(v);
  return m;
}

Eigen::MatrixXd ForwardLogProbs(const BiLmModel &model,
                                std::span<const std::string> tokens) {
  RequireTokens(tokens);
  Grids g = MakeGrids({model.vocab.Ids(tokens)});
  return DirectionLogProbs(model, {&model.forward, &model.forward_out, &model.forward_bias},
                           g.f_in);
}

Eigen::MatrixXd BackwardLogProbs(const BiLmModel &model,
                                 std::span<const std::string> tokens) {
  RequireTokens(tokens);
  Grids g = MakeGrids({model.vocab.Ids(tokens)});
  return DirectionLogProbs(
      model, {&model.backward, &model.backward_out, &model.backward_bias}, g.b_in);
}

double BiLmNll(const BiLmModel &model, std::span<const std::string> tokens,
               BiLmModel *grad) {
  RequireTokens(tokens);
  return GroupNll(model, {model.vocab.Ids(tokens)}, grad);
}

double BiLmPerplexity(const BiLmModel &model,
                      std::span<const std::vector<std::string>> titles) {
  double loss = 0.0;
  double count = 0.0;
  for (const auto &t : titles) {
    loss += BiLmNll(model, t);
    count += 2.0 * static_cast<double>(t.size() + 1);
  }
  return std::exp(loss / count);
}

BiLmModel TrainBiLm(std::span<const std::vector<std::string>> titles,
                    const BiLmDims &dims, const TrainConfig &cfg, int min_count,
                    BiLmLog *log) {
  cfg.Validate();
  std::vector<std::vector<std::string>> kept;
  for (const auto &t : titles) {
    if (!t.empty()) kept.push_back(t);
  }
  if (kept.empty()) throw Error(ErrorKind::kInvalidArgument, "empty training corpus");
  Rng rng(cfg.seed);
  BiLmModel model = InitBiLm(Vocab::Build(kept, min_count), dims, rng);
  std::vector<std::vector<int>> ids;
  ids.reserve(kept.size());
  for (const auto &t : kept) ids.push_back(model.vocab.Ids(t));

  Optimizer opt(cfg.optimizer, cfg.learning_rate);
  std::vector<size_t> order(ids.size());
  std::iota(order.begin(), order.end(), size_t{0});
  const size_t batch = static_cast<size_t>(cfg.batch_size);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    double predictions = 0.0;
    for (size_t begin = 0; begin < order.size(); begin += batch) {
      const size_t end = std::min(order.size(), begin + batch);
      std::span<const size_t> members(order.data() + begin, end - begin);
      BiLmModel grad = model.ZerosLike();
      double batch_loss = 0.0;
      for (const auto &group :
           GroupByLength(members, [&](size_t i) { return ids[i].size(); })) {
        std::vector<std::vector<int>> seqs;
        for (size_t i : group) {
          seqs.push_back(ids[i]);
          predictions += 2.0 * static_cast<double>(ids[i].size() + 1);
        }
        batch_loss += GroupNll(model, seqs, &grad);
      }
      if (!std::isfinite(batch_loss)) {
        throw Error(ErrorKind::kDivergence,
                    "biLM loss diverged at epoch " + std::to_string(epoch + 1) +
                        ", batch starting at title " + std::to_string(begin) +
                        " (lr " + std::to_string(cfg.learning_rate) + ")");
      }
      epoch_loss += batch_loss;
      auto grads = grad.Blocks();
      ClipGlobalNorm(grads, cfg.clip_norm);
      auto params = model.Blocks();
      opt.BeginStep();
      for (size_t s = 0; s < params.size(); ++s) opt.Update(s, params[s], grads[s]);
    }
    if (log != nullptr) {
      log->epoch_loss.push_back(epoch_loss / static_cast<double>(ids.size()));
      log->perplexity.push_back(std::exp(epoch_loss / predictions));
    }
  }
  return model;
}

Eigen::MatrixXd EmbedTitle(const BiLmModel &model, std::span<const std::string> tokens) {
  RequireTokens(tokens);
  const size_t n = tokens.size();
  Grids g = MakeGrids({model.vocab.Ids(tokens)});
  auto fwd = StackForward(model.forward, Embed(model.embedding, g.f_in));
  auto bwd = StackForward(model.backward, Embed(model.embedding, g.b_in));
  const int d = model.embedding_dim();
  const int hs = model.hidden_size();
  const int layers = model.layers();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(n), model.context_dim());
  for (size_t t = 1; t <= n; ++t) {
    const Eigen::Index row = static_cast<Eigen::Index>(t - 1);
    out.row(row).head(d) = model.embedding.col(g.f_in[t][0]).transpose();
    for (int l = 0; l < layers; ++l) {
      out.row(row).segment(d + l * hs, hs) = fwd[l].hidden[t].col(0).transpose();
      out.row(row).segment(d + (layers + l) * hs, hs) =
          bwd[l].hidden[n + 1 - t].col(0).transpose();
    }
  }
  return out;
}

std::string SerializeBiLm(const BiLmModel &model) {
  ModelWriter w("bilm");
  w.Strings(model.vocab.tokens());
  w.U32(static_cast<uint32_t>(model.embedding_dim()));
  w.U32(static_cast<uint32_t>(model.hidden_size()));
  w.U32(static_cast<uint32_t>(model.layers()));
  BiLmModel &m = const_cast<BiLmModel &>(model);
  for (const auto &block : m.Blocks()) w.Matrix(block);
  return w.bytes();
}

BiLmModel DeserializeBiLm(std::string bytes) {
  ModelReader r(std::move(bytes));
  if (r.kind() != "bilm") {
    throw Error(ErrorKind::kFormat, "not a biLM model (kind '" + r.kind() + "')");
  }
  BiLmModel m;
  m.vocab = Vocab::FromTokens(r.Strings());
  BiLmDims dims;
  dims.embedding_dim = static_cast<int>(r.U32());
  dims.hidden_size = static_cast<int>(r.U32());
  dims.layers = static_cast<int>(r.U32());
  if (dims.embedding_dim < 1 || dims.hidden_size < 1 || dims.layers < 1 ||
      dims.layers > 16) {
    throw Error(ErrorKind::kFormat, "biLM dimensions out of range");
  }
  Rng unused(0);
  m = InitBiLm(std::move(m.vocab), dims, unused);
  for (auto &block : m.Blocks()) {
    Eigen::MatrixXd stored = r.Matrix();
    if (stored.rows() != block.rows() || stored.cols() != block.cols()) {
      throw Error(ErrorKind::kFormat, "biLM weight shapes are inconsistent");
    }
    if (!stored.allFinite()) throw Error(ErrorKind::kFormat, "biLM contains non-finite weights");
    block = stored;
  }
  r.ExpectEnd();
  return m;
}

void SaveBiLm(const std::string &path, const BiLmModel &model) {
  WriteFile(path, SerializeBiLm(model));
}

BiLmModel LoadBiLm(const std::string &path) { return DeserializeBiLm(ReadFile(path)); }

void EmbeddingFile::Add(std::string title_id, Eigen::MatrixXd vectors) {
  if (vectors.rows() == 0) {
    throw Error(ErrorKind::kInvalidArgument, "embedding record '" + title_id + "' is empty");
  }
  if (vectors.cols() != dim) {
    throw Error(ErrorKind::kInvalidArgument,
                "embedding record '" + title_id + "' has dimension " +
                    std::to_string(vectors.cols()) + ", store has " + std::to_string(dim));
  }
  if (title_id.find_first_of("\t\n") != std::string::npos) {
    throw Error(ErrorKind::kInvalidArgument, "title id contains a tab or newline");
  }
  records.push_back({std::move(title_id), std::move(vectors)});
}

std::string SerializeEmbeddingFile(const EmbeddingFile &file) {
  std::string out = "ipod-emb v1 " + std::to_string(file.dim) + " " + file.hash + "\n";
  char buf[32];
  for (const EmbeddingRecord &rec : file.records) {
    out += rec.title_id;
    out += '\t';
    out += std::to_string(rec.vectors.rows());
    out += '\n';
    for (Eigen::Index i = 0; i < rec.vectors.rows(); ++i) {
      for (Eigen::Index j = 0; j < rec.vectors.cols(); ++j) {
        if (j > 0) out += ' ';
        auto res = std::to_chars(buf, buf + sizeof(buf), rec.vectors(i, j));
        out.append(buf, res.ptr);
      }
      out += '\n';
    }
  }
  return out;
}

namespace {

[[noreturn]] void BadEmbedding(size_t line_no, const std::string &what) {
  throw Error(ErrorKind::kFormat,
              "embedding file line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

EmbeddingFile ParseEmbeddingFile(std::string_view contents) {
  std::vector<std::string> lines = SplitFields(contents, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  for (std::string &l : lines) {
    if (!l.empty() && l.back() == '\r') l.pop_back();
  }
  if (lines.empty()) BadEmbedding(1, "missing header");
  std::vector<std::string> head = SplitWhitespace(lines[0]);
  if (head.size() != 4 || head[0] != "ipod-emb" || head[1] != "v1") {
    BadEmbedding(1, "expected 'ipod-emb v1 <dim> <hash>'");
  }
  EmbeddingFile file;
  auto [p, ec] = std::from_chars(head[2].data(), head[2].data() + head[2].size(), file.dim);
  if (ec != std::errc() || p != head[2].data() + head[2].size() || file.dim < 1) {
    BadEmbedding(1, "bad dimension '" + head[2] + "'");
  }
  file.hash = head[3];
  size_t i = 1;
  while (i < lines.size()) {
    std::vector<std::string> rec = SplitFields(lines[i], '\t');
    long n = 0;
    if (rec.size() != 2) BadEmbedding(i + 1, "expected '<title_id>\\t<count>'");
    auto [q, ec2] = std::from_chars(rec[1].data(), rec[1].data() + rec[1].size(), n);
    if (ec2 != std::errc() || q != rec[1].data() + rec[1].size() || n < 1) {
      BadEmbedding(i + 1, "bad token count '" + rec[1] + "'");
    }
    Eigen::MatrixXd vecs(n, file.dim);
    for (long r = 0; r < n; ++r) {
      const size_t li = i + 1 + static_cast<size_t>(r);
      if (li >= lines.size()) BadEmbedding(li + 1, "record truncated");
      std::vector<std::string> vals = SplitWhitespace(lines[li]);
      if (static_cast<int>(vals.size()) != file.dim) {
        BadEmbedding(li + 1, "expected " + std::to_string(file.dim) + " values, got " +
                                 std::to_string(vals.size()));
      }
      for (int c = 0; c < file.dim; ++c) {
        const std::string &v = vals[c];
        auto [e, ec3] = std::from_chars(v.data(), v.data() + v.size(), vecs(r, c));
        if (ec3 != std::errc() || e != v.data() + v.size()) {
          BadEmbedding(li + 1, "bad real '" + v + "'");
        }
      }
    }
    file.Add(rec[0], std::move(vecs));
    i += 1 + static_cast<size_t>(n);
  }
  return file;
}

void SaveEmbeddingFile(const std::string &path, const EmbeddingFile &file) {
  WriteFile(path, SerializeEmbeddingFile(file));
}

EmbeddingFile LoadEmbeddingFile(const std::string &path) {
  return ParseEmbeddingFile(ReadFile(path));
}

Eigen::VectorXd MeanPool(const Eigen::MatrixXd &vectors) {
  return vectors.colwise().mean().transpose();
}

std::vector<Neighbor> NearestTitles(const EmbeddingFile &store,
                                    const Eigen::VectorXd &query, size_t k) {
  if (store.records.empty()) throw Error(ErrorKind::kInvalidArgument, "embedding store is empty");
  if (query.size() != store.dim) {
    throw Error(ErrorKind::kInvalidArgument,
                "query dimension " + std::to_string(query.size()) +
                    " does not match store dimension " + std::to_string(store.dim));
  }
  const double qn = query.norm();
  std::vector<Neighbor> all;
  all.reserve(store.records.size());
  for (size_t i = 0; i < store.records.size(); ++i) {
    Eigen::VectorXd v = MeanPool(store.records[i].vectors);
    const double denom = qn * v.norm();
    all.push_back({i, store.records[i].title_id, denom > 0.0 ? query.dot(v) / denom : 0.0});
  }
  std::stable_sort(all.begin(), all.end(), [](const Neighbor &a, const Neighbor &b) {
    return a.similarity > b.similarity;
  });
  if (all.size() > k) all.resize(k);
  return all;
}

}  // namespace ipod
