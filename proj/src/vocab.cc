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

#include "ipod/vocab.h"

#include <algorithm>
#include <map>

#include "ipod/common.h"

namespace ipod {

Vocab::Vocab() {
  Append("<unk>");
  Append("<s>");
  Append("</s>");
}

void Vocab::Append(std::string token) {
  ids_.emplace(token, static_cast<int>(tokens_.size()));
  tokens_.push_back(std::move(token));
}

Vocab Vocab::Build(std::span<const std::vector<std::string>> sequences,
                   int min_count) {
  if (min_count < 1) {
    throw Error(ErrorKind::kInvalidArgument, "min_count must be >= 1");
  }
  if (sequences.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "cannot build a vocabulary from an empty corpus");
  }
  std::map<std::string, long> counts;
  for (const auto &seq : sequences) {
    for (const std::string &tok : seq) ++counts[tok];
  }
  std::vector<std::pair<std::string, long>> sorted(counts.begin(), counts.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto &a, const auto &b) { return a.second > b.second; });
  Vocab v;
  for (auto &[tok, n] : sorted) {
    if (n >= min_count && !v.Contains(tok)) v.Append(tok);
  }
  return v;
}

Vocab Vocab::FromTokens(std::vector<std::string> tokens) {
  Vocab v;
  if (tokens.size() < 3 || !std::equal(v.tokens_.begin(), v.tokens_.end(), tokens.begin())) {
    throw Error(ErrorKind::kFormat, "vocabulary does not start with the sentinels");
  }
  for (size_t i = 3; i < tokens.size(); ++i) {
    if (v.Contains(tokens[i])) {
      throw Error(ErrorKind::kFormat, "duplicate vocabulary token '" + tokens[i] + "'");
    }
    v.Append(std::move(tokens[i]));
  }
  return v;
}

int Vocab::Id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnk : it->second;
}

bool Vocab::Contains(std::string_view token) const {
  return ids_.count(std::string(token)) > 0;
}

std::vector<int> Vocab::Ids(std::span<const std::string> tokens) const {
  std::vector<int> out;
  out.reserve(tokens.size());
  for (const std::string &t : tokens) out.push_back(Id(t));
  return out;
}

}  // namespace ipod
