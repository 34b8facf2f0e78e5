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

#include "ipod/crf.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "ipod/common.h"
#include "ipod/model_io.h"
#include "ipod/optim.h"

namespace ipod {

std::optional<int> FeatureVocab::Intern(const std::string &feature) {
  auto it = ids_.find(feature);
  if (it != ids_.end()) return it->second;
  if (frozen_) return std::nullopt;
  int id = static_cast<int>(names_.size());
  ids_.emplace(feature, id);
  names_.push_back(feature);
  return id;
}

std::optional<int> FeatureVocab::Find(const std::string &feature) const {
  auto it = ids_.find(feature);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

namespace {

constexpr std::string_view kBos = "<s>";
constexpr std::string_view kEos = "</s>";

std::string_view TokenAt(std::span<const std::string> tokens, long j) {
  if (j < 0) return kBos;
  if (j >= static_cast<long>(tokens.size())) return kEos;
  return tokens[j];
}

}  // namespace

std::vector<std::string> ExtractFeatures(std::span<const std::string> tokens,
                                         size_t i, const Gazetteer *gazetteer) {
  const long p = static_cast<long>(i);
  const std::string &w = tokens[i];
  std::vector<std::string> f;
  f.reserve(16);
  f.emplace_back("bias");
  f.push_back("w0=" + w);
  f.push_back("w-1=" + std::string(TokenAt(tokens, p - 1)));
  f.push_back("w+1=" + std::string(TokenAt(tokens, p + 1)));
  f.push_back("w-2=" + std::string(TokenAt(tokens, p - 2)));
  f.push_back("w+2=" + std::string(TokenAt(tokens, p + 2)));
  if (w != kUnkToken) {
    for (size_t k = 1; k <= std::min<size_t>(3, w.size()); ++k) {
      f.push_back("pre" + std::to_string(k) + "=" + w.substr(0, k));
      f.push_back("suf" + std::to_string(k) + "=" + w.substr(w.size() - k));
    }
  }
  f.push_back("w-1|w0=" + std::string(TokenAt(tokens, p - 1)) + "|" + w);
  if (i == 0) f.emplace_back("first");
  if (i + 1 == tokens.size()) f.emplace_back("last");
  if (gazetteer != nullptr) {
    auto gaz = [&](long j) -> std::string {
      if (j < 0) return std::string(kBos);
      if (j >= static_cast<long>(tokens.size())) return std::string(kEos);
      return std::string(CoarseTagName(gazetteer->Lookup(tokens[j])));
    };
    const std::string here = gaz(p);
    f.push_back("gaz=" + here);
    f.push_back("gaz-1=" + gaz(p - 1));
    f.push_back("gaz+1=" + gaz(p + 1));
    f.push_back("gaz-1|gaz|gaz+1=" + gaz(p - 1) + "|" + here + "|" + gaz(p + 1));
  }
  return f;
}

std::vector<std::vector<int>> CrfModel::FeatureIds(
    std::span<const std::string> tokens) const {
  std::vector<std::vector<int>> ids(tokens.size());
  for (size_t i = 0; i < tokens.size(); ++i) {
    for (const std::string &name : ExtractFeatures(tokens, i, gazetteer.get())) {
      if (std::optional<int> id = vocab.Find(name);
          id && *id < emission.rows()) {
        ids[i].push_back(*id);
      }
    }
  }
  return ids;
}

Eigen::MatrixXd CrfModel::Emissions(const std::vector<std::vector<int>> &ids) const {
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ids.size()),
                                            kNumLabels);
  for (size_t i = 0; i < ids.size(); ++i) {
    for (int f : ids[i]) e.row(static_cast<Eigen::Index>(i)) += emission.row(f);
  }
  return e;
}

Eigen::MatrixXd CrfModel::Emissions(std::span<const std::string> tokens) const {
  return Emissions(FeatureIds(tokens));
}

std::vector<int> LabelIds(std::span<const BioesLabel> labels) {
  std::vector<int> ids;
  ids.reserve(labels.size());
  for (const BioesLabel &l : labels) ids.push_back(LabelIndex(l));
  return ids;
}

std::vector<BioesLabel> LabelsFromIds(std::span<const int> ids) {
  std::vector<BioesLabel> labels;
  labels.reserve(ids.size());
  for (int id : ids) labels.push_back(LabelFromIndex(id));
  return labels;
}

double LogPartition(const CrfModel &model, std::span<const std::string> tokens) {
  if (tokens.empty()) throw Error(ErrorKind::kInvalidArgument, "empty sequence");
  return LogPartition(model.Emissions(tokens), model.transitions);
}

namespace {

// Adds the gradient of one example into `grad` and returns its loss.
double AccumulateNll(const CrfModel &model,
                     const std::vector<std::vector<int>> &ids,
                     std::span<const int> gold, CrfGradient &grad) {
  Eigen::MatrixXd e = model.Emissions(ids);
  ChainNll<double> nll = ChainNllAndGradient(e, model.transitions, gold);
  for (size_t i = 0; i < ids.size(); ++i) {
    for (int f : ids[i]) {
      grad.emission.row(f) += nll.d_emissions.row(static_cast<Eigen::Index>(i));
    }
  }
  grad.transitions.trans += nll.d_transitions.trans;
  grad.transitions.start += nll.d_transitions.start;
  grad.transitions.stop += nll.d_transitions.stop;
  return nll.loss;
}

void RequireTrainable(const LabeledSequence &ex) {
  if (ex.tokens.empty() || ex.tokens.size() != ex.labels.size()) {
    throw Error(ErrorKind::kInvalidArgument,
                "training example is empty or has mismatched labels");
  }
  if (std::optional<size_t> bad = FirstIllegalPosition(ex.labels)) {
    throw Error(ErrorKind::kFormat, "training example '" + Join(ex.tokens, " ") +
                                        "' has an illegal BIOES label at position " +
                                        std::to_string(*bad));
  }
}

}  // namespace

double NllAndGradient(const CrfModel &model, const LabeledSequence &example,
                      CrfGradient *gradient) {
  RequireTrainable(example);
  CrfGradient local;
  CrfGradient &g = gradient != nullptr ? *gradient : local;
  g.emission = Eigen::MatrixXd::Zero(model.emission.rows(), kNumLabels);
  g.transitions = Transitions<double>::Zero(kNumLabels);
  std::vector<int> gold = LabelIds(example.labels);
  double loss = AccumulateNll(model, model.FeatureIds(example.tokens), gold, g);
  if (model.kind == CrfKind::kLogReg) g.transitions.SetZero();
  return loss;
}

std::vector<BioesLabel> ViterbiDecode(const CrfModel &model,
                                      std::span<const std::string> tokens) {
  if (tokens.empty()) return {};
  return LabelsFromIds(Viterbi(model.Emissions(tokens), model.transitions));
}

namespace {

CrfModel TrainImpl(std::span<const LabeledSequence> data, const TrainConfig &cfg,
                   std::shared_ptr<const Gazetteer> gazetteer, TrainLog *log,
                   CrfKind kind) {
  cfg.Validate();
  if (data.empty()) throw Error(ErrorKind::kInvalidArgument, "empty training set");
  for (const LabeledSequence &ex : data) RequireTrainable(ex);

  CrfModel model;
  model.kind = kind;
  model.gazetteer = std::move(gazetteer);
  for (const LabeledSequence &ex : data) {
    for (size_t i = 0; i < ex.size(); ++i) {
      for (const std::string &name :
           ExtractFeatures(ex.tokens, i, model.gazetteer.get())) {
        model.vocab.Intern(name);
      }
    }
  }
  model.emission = Eigen::MatrixXd::Zero(model.vocab.size(), kNumLabels);

  std::vector<std::vector<int>> gold(data.size());
  for (size_t k = 0; k < data.size(); ++k) gold[k] = LabelIds(data[k].labels);

  Rng rng(cfg.seed);
  std::bernoulli_distribution drop(cfg.word_dropout);
  Optimizer opt(cfg.optimizer, cfg.learning_rate);
  std::vector<size_t> order(data.size());
  std::iota(order.begin(), order.end(), size_t{0});
  const size_t batch = static_cast<size_t>(cfg.batch_size);

  CrfGradient grad;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (size_t begin = 0; begin < order.size(); begin += batch) {
      const size_t end = std::min(order.size(), begin + batch);
      std::vector<std::vector<std::vector<int>>> batch_ids;
      batch_ids.reserve(end - begin);
      for (size_t b = begin; b < end; ++b) {
        const LabeledSequence &ex = data[order[b]];
        std::vector<std::string> tokens = ex.tokens;
        if (cfg.word_dropout > 0.0) {
          for (std::string &tok : tokens) {
            if (drop(rng)) tok = kUnkToken;
          }
        }
        std::vector<std::vector<int>> ids(tokens.size());
        for (size_t i = 0; i < tokens.size(); ++i) {
          for (const std::string &name :
               ExtractFeatures(tokens, i, model.gazetteer.get())) {
            ids[i].push_back(*model.vocab.Intern(name));
          }
        }
        batch_ids.push_back(std::move(ids));
      }
      if (model.emission.rows() < model.vocab.size()) {
        Eigen::Index old_rows = model.emission.rows();
        model.emission.conservativeResize(model.vocab.size(), kNumLabels);
        model.emission.bottomRows(model.vocab.size() - old_rows).setZero();
      }
      grad.emission = Eigen::MatrixXd::Zero(model.emission.rows(), kNumLabels);
      grad.transitions = Transitions<double>::Zero(kNumLabels);
      double batch_loss = 0.0;
      for (size_t b = begin; b < end; ++b) {
        batch_loss += AccumulateNll(model, batch_ids[b - begin], gold[order[b]], grad);
      }
      if (!std::isfinite(batch_loss)) {
        throw Error(ErrorKind::kDivergence,
                    "CRF loss diverged at epoch " + std::to_string(epoch + 1) +
                        ", batch starting at example " + std::to_string(begin) +
                        " (lr " + std::to_string(cfg.learning_rate) + ")");
      }
      epoch_loss += batch_loss;
      const double scale = 1.0 / static_cast<double>(end - begin);
      opt.BeginStep();
      opt.Update(0, model.emission, grad.emission * scale);
      if (kind == CrfKind::kCrf) {
        opt.Update(1, model.transitions.trans, grad.transitions.trans * scale);
        opt.Update(2, model.transitions.start, grad.transitions.start * scale);
        opt.Update(3, model.transitions.stop, grad.transitions.stop * scale);
      }
    }
    if (log != nullptr) {
      log->epoch_loss.push_back(epoch_loss / static_cast<double>(data.size()));
    }
  }
  model.vocab.Freeze();
  return model;
}

std::string_view KindName(CrfKind kind) {
  return kind == CrfKind::kLogReg ? "logreg" : "crf";
}

std::vector<std::string> LabelNames() {
  std::vector<std::string> names;
  for (int i = 0; i < kNumLabels; ++i) names.push_back(LabelName(LabelFromIndex(i)));
  return names;
}

}  // namespace

CrfModel TrainCrf(std::span<const LabeledSequence> data, const TrainConfig &cfg,
                  std::shared_ptr<const Gazetteer> gazetteer, TrainLog *log) {
  return TrainImpl(data, cfg, std::move(gazetteer), log, CrfKind::kCrf);
}

CrfModel TrainLogReg(std::span<const LabeledSequence> data,
                     const TrainConfig &cfg,
                     std::shared_ptr<const Gazetteer> gazetteer, TrainLog *log) {
  return TrainImpl(data, cfg, std::move(gazetteer), log, CrfKind::kLogReg);
}

std::string SerializeCrfModel(const CrfModel &model) {
  ModelWriter w(KindName(model.kind));
  w.Strings(LabelNames());
  std::vector<std::string> features(model.vocab.names().begin(),
                                    model.vocab.names().begin() + model.emission.rows());
  w.Strings(features);
  w.U32(model.gazetteer ? 1 : 0);
  if (model.gazetteer) w.String(SerializeGazetteer(*model.gazetteer));
  w.Matrix(model.emission);
  w.Matrix(model.transitions.trans);
  w.Vector(model.transitions.start);
  w.Vector(model.transitions.stop);
  return w.bytes();
}

CrfModel DeserializeCrfModel(std::string bytes) {
  ModelReader r(std::move(bytes));
  CrfModel model;
  if (r.kind() == "crf") {
    model.kind = CrfKind::kCrf;
  } else if (r.kind() == "logreg") {
    model.kind = CrfKind::kLogReg;
  } else {
    throw Error(ErrorKind::kFormat, "not a CRF model (kind '" + r.kind() + "')");
  }
  if (r.Strings() != LabelNames()) {
    throw Error(ErrorKind::kFormat, "model label set does not match BIOES labels");
  }
  for (const std::string &f : r.Strings()) model.vocab.Intern(f);
  model.vocab.Freeze();
  if (r.U32() != 0) {
    model.gazetteer = std::make_shared<const Gazetteer>(ParseGazetteer(r.String()));
  }
  model.emission = r.Matrix();
  model.transitions.trans = r.Matrix();
  model.transitions.start = r.Vector();
  model.transitions.stop = r.Vector();
  r.ExpectEnd();
  if (model.emission.rows() != model.vocab.size() ||
      model.emission.cols() != kNumLabels ||
      model.transitions.trans.rows() != kNumLabels ||
      model.transitions.trans.cols() != kNumLabels ||
      model.transitions.start.size() != kNumLabels ||
      model.transitions.stop.size() != kNumLabels) {
    throw Error(ErrorKind::kFormat, "CRF model weight shapes are inconsistent");
  }
  if (!model.emission.allFinite() || !model.transitions.trans.allFinite() ||
      !model.transitions.start.allFinite() || !model.transitions.stop.allFinite()) {
    throw Error(ErrorKind::kFormat, "CRF model contains non-finite weights");
  }
  return model;
}

void SaveCrfModel(const std::string &path, const CrfModel &model) {
  WriteFile(path, SerializeCrfModel(model));
}

CrfModel LoadCrfModel(const std::string &path) {
  return DeserializeCrfModel(ReadFile(path));
}

}  // namespace ipod
