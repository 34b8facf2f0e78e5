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

// Feature-based linear-chain CRF tagger over the 13 BIOES labels, and the
// logistic-regression baseline (the same model with transition, start and
// stop weights pinned at zero).

#ifndef IPOD_CRF_H_
#define IPOD_CRF_H_

#include <Eigen/Dense>

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "ipod/gazetteer.h"
#include "ipod/labeling.h"
#include "ipod/linear_chain.h"
#include "ipod/train_config.h"

namespace ipod {

// Replaces a token under word dropout.
inline constexpr std::string_view kUnkToken = "<unk>";

class FeatureVocab {
 public:
  // The id of `feature`, adding it when the vocab is not frozen. Returns
  // nullopt for an unseen feature of a frozen vocab.
  std::optional<int> Intern(const std::string &feature);
  std::optional<int> Find(const std::string &feature) const;

  void Freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }
  int size() const { return static_cast<int>(names_.size()); }
  const std::vector<std::string> &names() const { return names_; }

 private:
  std::unordered_map<std::string, int> ids_;
  std::vector<std::string> names_;
  bool frozen_ = false;
};

// Feature templates for position i: current word, words at distance 1 and
// 2 (sentinels past either end), prefixes and suffixes of up to three
// characters, the previous/current bigram, first/last flags, a bias, and
// gazetteer tags of the current and adjacent tokens (singly and as one
// conjunction) when a gazetteer is given.
std::vector<std::string> ExtractFeatures(std::span<const std::string> tokens,
                                         size_t i,
                                         const Gazetteer *gazetteer = nullptr);

enum class CrfKind { kCrf, kLogReg };

struct CrfModel {
  CrfKind kind = CrfKind::kCrf;
  FeatureVocab vocab;
  // [features x labels]
  Eigen::MatrixXd emission;
  Transitions<double> transitions = Transitions<double>::Zero(kNumLabels);
  std::shared_ptr<const Gazetteer> gazetteer;

  // Feature ids per position; unseen features are dropped.
  std::vector<std::vector<int>> FeatureIds(std::span<const std::string> tokens) const;

  // [length x labels] emission scores.
  Eigen::MatrixXd Emissions(std::span<const std::string> tokens) const;
  Eigen::MatrixXd Emissions(const std::vector<std::vector<int>> &ids) const;
};

struct CrfGradient {
  Eigen::MatrixXd emission;
  Transitions<double> transitions = Transitions<double>::Zero(kNumLabels);
};

double LogPartition(const CrfModel &model, std::span<const std::string> tokens);

// Negative log-likelihood of the gold labels and its gradient. The gold
// labels must be STRICT-legal.
double NllAndGradient(const CrfModel &model, const LabeledSequence &example,
                      CrfGradient *gradient);

std::vector<BioesLabel> ViterbiDecode(const CrfModel &model,
                                      std::span<const std::string> tokens);

// Mini-batch training on the mean per-sequence NLL. Throws kDivergence when
// the loss stops being finite.
CrfModel TrainCrf(std::span<const LabeledSequence> data, const TrainConfig &cfg,
                  std::shared_ptr<const Gazetteer> gazetteer = nullptr,
                  TrainLog *log = nullptr);

CrfModel TrainLogReg(std::span<const LabeledSequence> data,
                     const TrainConfig &cfg,
                     std::shared_ptr<const Gazetteer> gazetteer = nullptr,
                     TrainLog *log = nullptr);

std::string SerializeCrfModel(const CrfModel &model);
CrfModel DeserializeCrfModel(std::string bytes);
void SaveCrfModel(const std::string &path, const CrfModel &model);
CrfModel LoadCrfModel(const std::string &path);

// Label ids for a sequence of BIOES labels.
std::vector<int> LabelIds(std::span<const BioesLabel> labels);
std::vector<BioesLabel> LabelsFromIds(std::span<const int> ids);

}  // namespace ipod

#endif  // IPOD_CRF_H_
