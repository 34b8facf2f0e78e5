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

// BIOES chunk encoding, decoding, gazetteer auto-tagging, and the CoNLL
// interchange format shared by every tagger.

#ifndef IPOD_LABELING_H_
#define IPOD_LABELING_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ipod/corpus.h"
#include "ipod/gazetteer.h"
#include "ipod/tags.h"

namespace ipod {

struct LabeledSequence {
  std::vector<std::string> tokens;
  std::vector<BioesLabel> labels;

  size_t size() const { return tokens.size(); }
  friend bool operator==(const LabeledSequence &,
                         const LabeledSequence &) = default;
};

// An entity chunk covering tokens [start, end], both inclusive.
struct Chunk {
  CoarseTag tag = CoarseTag::kO;
  size_t start = 0;
  size_t end = 0;
  friend bool operator==(const Chunk &, const Chunk &) = default;
};

enum class DecodePolicy { kStrict, kRepair };

// Maximal runs of one non-O tag become chunks: a run of one is S-X, longer
// runs are B-X I-X* E-X.
std::vector<BioesLabel> EncodeBioes(std::span<const CoarseTag> coarse);

// Position of the first illegal label (or labels.size() for an unclosed
// trailing chunk); nullopt when the sequence is legal.
std::optional<size_t> FirstIllegalPosition(std::span<const BioesLabel> labels);

// STRICT throws kFormat naming the first offending position. REPAIR never
// fails: an orphan I-X or E-X opens a new X chunk, and any open chunk is
// closed before O, B, S, or a tag change.
std::vector<Chunk> DecodeBioes(std::span<const BioesLabel> labels,
                               DecodePolicy policy);

// Per-token gazetteer lookup followed by EncodeBioes.
LabeledSequence AutoTag(const Title &title, const Gazetteer &g);

// "token<TAB>label" lines, one blank line after each sequence.
std::string SerializeConll(std::span<const LabeledSequence> data);
std::vector<LabeledSequence> ParseConll(std::string_view contents);
std::vector<LabeledSequence> LoadConll(const std::string &path);
void SaveConll(const std::string &path, std::span<const LabeledSequence> data);

struct DataSplit {
  std::vector<LabeledSequence> train;
  std::vector<LabeledSequence> dev;
  std::vector<LabeledSequence> test;
};

// Seeded shuffle by title, then the first floor(n * train_frac) titles for
// training, the next floor(n * dev_frac) for dev, the rest for test.
DataSplit SplitData(std::span<const LabeledSequence> data, uint64_t seed,
                    double train_frac = 0.8, double dev_frac = 0.1);

}  // namespace ipod

#endif  // IPOD_LABELING_H_
