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

#ifndef IPOD_TAGS_H_
#define IPOD_TAGS_H_

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace ipod {

// Occupational entity classes: responsibility, function, location, other.
enum class CoarseTag { kRes = 0, kFun = 1, kLoc = 2, kO = 3 };

inline constexpr std::array<CoarseTag, 4> kAllCoarseTags = {
    CoarseTag::kRes, CoarseTag::kFun, CoarseTag::kLoc, CoarseTag::kO};
// Entity classes in reporting order.
inline constexpr std::array<CoarseTag, 3> kEntityTagsReportOrder = {
    CoarseTag::kFun, CoarseTag::kLoc, CoarseTag::kRes};

std::string_view CoarseTagName(CoarseTag tag);
std::optional<CoarseTag> ParseCoarseTag(std::string_view s);

enum class Prefix { kNone, kB, kI, kE, kS };

// A BIOES label. kO always pairs with Prefix::kNone.
struct BioesLabel {
  Prefix prefix = Prefix::kNone;
  CoarseTag tag = CoarseTag::kO;

  static BioesLabel O() { return {}; }
  static BioesLabel Make(Prefix p, CoarseTag t);

  bool is_o() const { return tag == CoarseTag::kO; }
  friend bool operator==(const BioesLabel &, const BioesLabel &) = default;
};

// Dense label ids: 0 is O, then B/I/E/S for RES, FUN, LOC in that order.
inline constexpr int kNumLabels = 13;

int LabelIndex(const BioesLabel &label);
BioesLabel LabelFromIndex(int index);

// "O" or "<prefix>-<tag>", e.g. "S-RES".
std::string LabelName(const BioesLabel &label);
std::optional<BioesLabel> ParseLabel(std::string_view s);

}  // namespace ipod

#endif  // IPOD_TAGS_H_
