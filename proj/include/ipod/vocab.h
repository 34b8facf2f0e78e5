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

// Dense token ids with three reserved sentinels.

#ifndef IPOD_VOCAB_H_
#define IPOD_VOCAB_H_

#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ipod {

class Vocab {
 public:
  static constexpr int kUnk = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;

  // Only the sentinels "<unk>", "<s>", "</s>".
  Vocab();

  // Tokens seen at least `min_count` times, by count descending then
  // lexicographically. Throws on min_count < 1 or an empty input.
  static Vocab Build(std::span<const std::vector<std::string>> sequences,
                     int min_count);

  // Rebuilds from a stored token list, which must start with the sentinels.
  static Vocab FromTokens(std::vector<std::string> tokens);

  int Id(std::string_view token) const;
  bool Contains(std::string_view token) const;
  std::vector<int> Ids(std::span<const std::string> tokens) const;
  const std::string &Token(int id) const { return tokens_[id]; }
  const std::vector<std::string> &tokens() const { return tokens_; }
  int size() const { return static_cast<int>(tokens_.size()); }

 private:
  void Append(std::string token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

}  // namespace ipod

#endif  // IPOD_VOCAB_H_
