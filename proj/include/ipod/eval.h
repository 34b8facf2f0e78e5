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

// Tagging metrics, the human-agreement protocol, comparison tables and a
// generic hyperparameter grid search.
//
// Metrics count labels, not chunks. A predicted non-O label is a positive:
// a true positive when it equals the gold label (prefix included), a false
// positive otherwise. A gold non-O label that is not predicted exactly is a
// false negative. Per-tag counts restrict positives to one coarse tag.

#ifndef IPOD_EVAL_H_
#define IPOD_EVAL_H_

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ipod/labeling.h"
#include "ipod/train_config.h"

namespace ipod {

struct Counts {
  uint64_t tp = 0;
  uint64_t fp = 0;
  uint64_t fn = 0;
};

// Percentages. em is tp / (tp + fp + fn), the share of labels involved in
// a positive that match exactly. Every value is 100 when there are no
// positives at all.
struct TagMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double em = 0.0;
  double f1 = 0.0;
  Counts counts;
};

struct MetricsReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // Share of all tokens whose label matches gold.
  double em_token = 0.0;
  // Share of titles whose whole label sequence matches gold.
  double em_title = 0.0;
  // tp / (tp + fp + fn) over all entity tags.
  double em_positive = 0.0;
  Counts counts;
  uint64_t tokens = 0;
  uint64_t titles = 0;
  // FUN, LOC, RES (kEntityTagsReportOrder).
  std::array<TagMetrics, 3> per_tag{};

  const TagMetrics &tag(CoarseTag t) const;
};

// Harmonic mean of two percentages; 0 when both are 0.
double F1Score(double precision, double recall);

// Throws kInvalidArgument unless gold and pred hold the same titles with
// the same token counts.
MetricsReport Score(std::span<const LabeledSequence> gold,
                    std::span<const LabeledSequence> pred);

// Arithmetic mean of every metric; counts are summed.
MetricsReport MeanReport(std::span<const MetricsReport> reports);

// Annotator 1 is the reference: mean of Score(a1, a2) and Score(a1, a3).
MetricsReport HumanBaseline(std::span<const LabeledSequence> a1,
                            std::span<const LabeledSequence> a2,
                            std::span<const LabeledSequence> a3);

// Flat "key=value" lines: precision, recall, em_token, em_title,
// em_positive, f1, tp, fp, fn, tokens, titles, then per_tag.<TAG>.{precision,
// recall, em, f1, tp, fp, fn}.
std::string MetricsToKv(const MetricsReport &r);
MetricsReport ParseMetricsKv(std::string_view text);

struct NamedReport {
  std::string name;
  MetricsReport report;
};

// Overall (P, R, EM, F1) and per-tag (EM, F1 for FUN, LOC, RES) tables,
// one row per report. Throws on an empty list.
std::string CompareText(std::span<const NamedReport> reports);
std::string CompareTsv(std::span<const NamedReport> reports);

// Per-hyperparameter value lists. An empty axis is not searched and keeps
// the base configuration's value.
struct SearchSpace {
  std::vector<double> learning_rates;
  std::vector<int> layers;
  std::vector<int> hidden_sizes;
  std::vector<int> batch_sizes;
  std::vector<OptimizerKind> optimizers;

  // lr {0.1, 0.01} x layers {1, 2} x hidden {128, 256} x batch {32, 128}
  // x {Adam, SGD}.
  static SearchSpace LstmCrfSpace();

  // Every combination in lexicographic order: learning rate outermost,
  // then layers, hidden size, batch size, optimizer.
  std::vector<TrainConfig> Enumerate(const TrainConfig &base) const;
};

using Tagger = std::function<std::vector<BioesLabel>(std::span<const std::string>)>;
using Trainer =
    std::function<Tagger(std::span<const LabeledSequence>, const TrainConfig &)>;

struct GridRow {
  TrainConfig config;
  bool failed = false;
  std::string error;
  MetricsReport metrics;
  double seconds = 0.0;
};

struct GridSearchResult {
  std::vector<GridRow> rows;
  // Highest validation F1, the earliest row on ties; unset if all failed.
  std::optional<size_t> best;
};

// Trains every configuration for `epochs` epochs and scores it on the
// validation split. A trainer that throws kDivergence marks its row as
// failed. The two splits must not share storage.
GridSearchResult GridSearch(const Trainer &trainer, const SearchSpace &space,
                            const TrainConfig &base, std::span<const LabeledSequence> train,
                            std::span<const LabeledSequence> validation, int epochs);

// One row per configuration: lr layers hidden batch optimizer status P R EM F1.
std::string GridSearchTsv(const GridSearchResult &result, bool with_seconds = false);

}  // namespace ipod

#endif  // IPOD_EVAL_H_
