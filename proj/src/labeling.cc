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

#include "ipod/labeling.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ipod/common.h"

namespace ipod {

std::vector<BioesLabel> EncodeBioes(std::span<const CoarseTag> coarse) {
  std::vector<BioesLabel> out;
  out.reserve(coarse.size());
  size_t i = 0;
  while (i < coarse.size()) {
    CoarseTag tag = coarse[i];
    size_t j = i + 1;
    while (j < coarse.size() && coarse[j] == tag) ++j;
    if (tag == CoarseTag::kO) {
      out.insert(out.end(), j - i, BioesLabel::O());
    } else if (j - i == 1) {
      out.push_back({Prefix::kS, tag});
    } else {
      out.push_back({Prefix::kB, tag});
      out.insert(out.end(), j - i - 2, BioesLabel{Prefix::kI, tag});
      out.push_back({Prefix::kE, tag});
    }
    i = j;
  }
  return out;
}

std::optional<size_t> FirstIllegalPosition(std::span<const BioesLabel> labels) {
  std::optional<CoarseTag> open;
  for (size_t i = 0; i < labels.size(); ++i) {
    const BioesLabel &l = labels[i];
    switch (l.prefix) {
      case Prefix::kNone:
      case Prefix::kS:
        if (open) return i;
        break;
      case Prefix::kB:
        if (open) return i;
        open = l.tag;
        break;
      case Prefix::kI:
        if (open != l.tag) return i;
        break;
      case Prefix::kE:
        if (open != l.tag) return i;
        open.reset();
        break;
    }
  }
  if (open) return labels.size();
  return std::nullopt;
}

std::vector<Chunk> DecodeBioes(std::span<const BioesLabel> labels,
                               DecodePolicy policy) {
  if (policy == DecodePolicy::kStrict) {
    if (std::optional<size_t> bad = FirstIllegalPosition(labels)) {
      std::string what =
          *bad == labels.size()
              ? "unclosed chunk at end of sequence (position " +
                    std::to_string(*bad) + ")"
              : "illegal label " + LabelName(labels[*bad]) + " at position " +
                    std::to_string(*bad);
      throw Error(ErrorKind::kFormat, what);
    }
  }
  std::vector<Chunk> chunks;
  std::optional<Chunk> open;
  auto close_before = [&](size_t i) {
    if (open) {
      open->end = i - 1;
      chunks.push_back(*open);
      open.reset();
    }
  };
  for (size_t i = 0; i < labels.size(); ++i) {
    const BioesLabel &l = labels[i];
    switch (l.prefix) {
      case Prefix::kNone:
        close_before(i);
        break;
      case Prefix::kS:
        close_before(i);
        chunks.push_back({l.tag, i, i});
        break;
      case Prefix::kB:
        close_before(i);
        open = Chunk{l.tag, i, i};
        break;
      case Prefix::kI:
        if (!open || open->tag != l.tag) {
          close_before(i);
          open = Chunk{l.tag, i, i};
        }
        break;
      case Prefix::kE:
        if (!open || open->tag != l.tag) {
          close_before(i);
          open = Chunk{l.tag, i, i};
        }
        close_before(i + 1);
        break;
    }
  }
  close_before(labels.size());
  return chunks;
}

LabeledSequence AutoTag(const Title &title, const Gazetteer &g) {
  if (title.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "cannot tag an empty title");
  }
  std::vector<CoarseTag> coarse;
  coarse.reserve(title.length());
  for (const std::string &tok : title.tokens) coarse.push_back(g.Lookup(tok));
  return LabeledSequence{title.tokens, EncodeBioes(coarse)};
}

std::string SerializeConll(std::span<const LabeledSequence> data) {
  std::string out;
  for (const LabeledSequence &seq : data) {
    for (size_t i = 0; i < seq.size(); ++i) {
      out += seq.tokens[i];
      out += '\t';
      out += LabelName(seq.labels[i]);
      out += '\n';
    }
    out += '\n';
  }
  return out;
}

std::vector<LabeledSequence> ParseConll(std::string_view contents) {
  std::vector<LabeledSequence> out;
  LabeledSequence current;
  size_t line_no = 0;
  size_t start = 0;
  auto flush = [&] {
    if (!current.tokens.empty()) out.push_back(std::move(current));
    current = {};
  };
  while (start < contents.size()) {
    size_t pos = contents.find('\n', start);
    if (pos == std::string_view::npos) pos = contents.size();
    std::string_view line = contents.substr(start, pos - start);
    start = pos + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) {
      flush();
      continue;
    }
    size_t tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0 ||
        line.find('\t', tab + 1) != std::string_view::npos) {
      throw Error(ErrorKind::kFormat, "conll line " + std::to_string(line_no) +
                                          ": expected token<TAB>label");
    }
    std::optional<BioesLabel> label = ParseLabel(line.substr(tab + 1));
    if (!label) {
      throw Error(ErrorKind::kFormat, "conll line " + std::to_string(line_no) +
                                          ": unknown label '" +
                                          std::string(line.substr(tab + 1)) + "'");
    }
    current.tokens.emplace_back(line.substr(0, tab));
    current.labels.push_back(*label);
  }
  flush();
  return out;
}

std::vector<LabeledSequence> LoadConll(const std::string &path) {
  return ParseConll(ReadFile(path));
}

void SaveConll(const std::string &path, std::span<const LabeledSequence> data) {
  WriteFile(path, SerializeConll(data));
}

DataSplit SplitData(std::span<const LabeledSequence> data, uint64_t seed,
                    double train_frac, double dev_frac) {
  if (!(train_frac >= 0.0 && dev_frac >= 0.0 && train_frac + dev_frac <= 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "split fractions must be >= 0 and sum to <= 1");
  }
  std::vector<size_t> order(data.size());
  std::iota(order.begin(), order.end(), size_t{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const size_t n = data.size();
  const size_t n_train = static_cast<size_t>(std::floor(static_cast<double>(n) * train_frac));
  const size_t n_dev = std::min(
      n - n_train, static_cast<size_t>(std::floor(static_cast<double>(n) * dev_frac)));
  DataSplit split;
  for (size_t k = 0; k < n; ++k) {
    auto &dst = k < n_train ? split.train : k < n_train + n_dev ? split.dev : split.test;
    dst.push_back(data[order[k]]);
  }
  return split;
}

}  // namespace ipod
