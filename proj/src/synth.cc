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

#include "ipod/synth.h"

#include <random>
#include <string>
#include <vector>

#include "ipod/common.h"

namespace ipod {

namespace {

constexpr size_t kMaxLength = 6;

}  // namespace

Corpus SynthCorpus(const Gazetteer &g, uint64_t seed, size_t count) {
  const std::vector<std::string> res = g.TokensWithTag(CoarseTag::kRes);
  const std::vector<std::string> fun = g.TokensWithTag(CoarseTag::kFun);
  const std::vector<std::string> loc = g.TokensWithTag(CoarseTag::kLoc);
  const std::vector<std::string> other = g.TokensWithTag(CoarseTag::kO);
  for (CoarseTag tag : kAllCoarseTags) {
    if (g.TokensWithTag(tag).empty()) {
      throw Error(ErrorKind::kInvalidArgument,
                  "gazetteer has no " + std::string(CoarseTagName(tag)) +
                      " tokens");
    }
  }

  Rng rng(seed);
  auto pick = [&rng](const std::vector<std::string> &pool) -> const std::string & {
    std::uniform_int_distribution<size_t> d(0, pool.size() - 1);
    return pool[d(rng)];
  };
  auto coin = [&rng](double p) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
  };
  auto one_or_two = [&rng]() {
    return std::uniform_int_distribution<int>(1, 2)(rng);
  };

  Corpus corpus;
  corpus.source_label = "synth:" + std::to_string(seed);
  corpus.titles.reserve(count);
  for (size_t i = 0; i < count; ++i) {
    std::vector<std::string> tokens;
    if (coin(0.35)) tokens.push_back(pick(res));
    switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
      case 0:
        tokens.push_back(pick(res));
        break;
      case 1:
        for (int k = one_or_two(); k > 0; --k) tokens.push_back(pick(fun));
        tokens.push_back(pick(res));
        break;
      default:
        tokens.push_back(pick(res));
        tokens.push_back(pick(other));
        for (int k = one_or_two(); k > 0; --k) tokens.push_back(pick(fun));
        break;
    }
    if (coin(0.25)) {
      for (int k = one_or_two(); k > 0; --k) tokens.push_back(pick(loc));
    }
    if (tokens.size() > kMaxLength) tokens.resize(kMaxLength);

    Title t;
    t.raw = Join(tokens, " ");
    t.tokens = std::move(tokens);
    t.region = coin(0.567) ? Region::kUS : Region::kAsia;
    t.profile_id = "synth-" + std::to_string(i / 3);
    corpus.titles.push_back(std::move(t));
  }
  return corpus;
}

}  // namespace ipod
