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

// Knowledge-based gazetteer built from three annotators' votes over the
// most frequent unigrams, plus inter-rater reliability statistics.

#ifndef IPOD_GAZETTEER_H_
#define IPOD_GAZETTEER_H_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ipod/corpus.h"
#include "ipod/tags.h"

namespace ipod {

// One annotator's votes, in the order tokens were presented.
class AnnotationSet {
 public:
  AnnotationSet() = default;
  explicit AnnotationSet(std::string annotator_id)
      : annotator_id_(std::move(annotator_id)) {}

  // Throws kInvalidArgument on a second vote for the same token.
  void Add(const std::string &token, CoarseTag tag);

  const std::string &annotator_id() const { return annotator_id_; }
  const std::vector<std::string> &tokens() const { return tokens_; }
  std::optional<CoarseTag> Vote(const std::string &token) const;
  size_t size() const { return tokens_.size(); }

 private:
  std::string annotator_id_;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, CoarseTag> votes_;
};

// Annotation TSV: "token<TAB>tag" per line.
AnnotationSet LoadAnnotationSet(const std::string &path);
std::string SerializeAnnotationSet(const AnnotationSet &set);

enum class Agreement { kUnanimous, kMajority };

struct GazetteerEntry {
  std::string token;
  CoarseTag tag = CoarseTag::kO;
  std::array<CoarseTag, 3> votes{};
  Agreement agreement = Agreement::kUnanimous;
};

class Gazetteer {
 public:
  // Throws on duplicate tokens or an entry whose tag lacks two votes.
  void Add(GazetteerEntry entry);

  // O for tokens the gazetteer does not cover.
  CoarseTag Lookup(std::string_view token) const;
  bool Contains(std::string_view token) const;

  const std::vector<GazetteerEntry> &entries() const { return entries_; }
  size_t size() const { return entries_.size(); }

  // Tokens carrying `tag`, in entry order.
  std::vector<std::string> TokensWithTag(CoarseTag tag) const;

  // Copy reordered by descending corpus frequency (ties lexicographic,
  // unseen tokens last in their current order).
  Gazetteer SortedByFrequency(const Corpus &corpus) const;

 private:
  std::vector<GazetteerEntry> entries_;
  std::unordered_map<std::string, size_t> index_;
};

// Gazetteer TSV: token, tag, vote_a, vote_b, vote_c, agreement.
Gazetteer LoadGazetteer(const std::string &path);
Gazetteer ParseGazetteer(std::string_view contents);
std::string SerializeGazetteer(const Gazetteer &g);

// A built-in unanimous gazetteer of common job-title vocabulary. Used for
// synthetic corpora and as the default tagger dictionary.
const Gazetteer &DefaultGazetteer();

struct TopUnigrams {
  std::vector<std::string> tokens;
  // Set when k exceeded the vocabulary size.
  std::optional<std::string> warning;
};

TopUnigrams ComputeTopUnigrams(const Corpus &corpus, size_t k);

struct MergeResult {
  Gazetteer gazetteer;
  // Tokens on which all three annotators disagreed.
  std::vector<std::string> rejected;
};

// Majority vote per token, in the first set's token order. All three sets
// must cover the same tokens.
MergeResult MergeAnnotations(const std::array<AnnotationSet, 3> &sets);

// Mean over the three annotator pairs of the fraction of agreeing tokens.
double PercentageAgreement(const std::array<AnnotationSet, 3> &sets);

// (p_o - p_e) / (1 - p_e) with p_e from the two marginal tag distributions.
double CohensKappa(const AnnotationSet &a, const AnnotationSet &b);

struct IrrReport {
  double percentage_agreement = 0.0;
  // Mean of the three pairwise kappas.
  double cohens_kappa = 0.0;
  std::array<double, 3> pairwise_kappa{};  // (a,b), (a,c), (b,c)
  uint64_t unanimous_count = 0;
  uint64_t majority_count = 0;
  uint64_t disagreement_count = 0;
  uint64_t total() const {
    return unanimous_count + majority_count + disagreement_count;
  }
};

IrrReport ComputeIrr(const std::array<AnnotationSet, 3> &sets);

// Flat key=value lines.
std::string IrrReportToKv(const IrrReport &report);

}  // namespace ipod

#endif  // IPOD_GAZETTEER_H_
