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

#include "ipod/tags.h"

#include "ipod/common.h"

namespace ipod {

std::string_view CoarseTagName(CoarseTag tag) {
  switch (tag) {
    case CoarseTag::kRes:
      return "RES";
    case CoarseTag::kFun:
      return "FUN";
    case CoarseTag::kLoc:
      return "LOC";
    case CoarseTag::kO:
      break;
  }
  return "O";
}

std::optional<CoarseTag> ParseCoarseTag(std::string_view s) {
  for (CoarseTag t : kAllCoarseTags) {
    if (CoarseTagName(t) == s) return t;
  }
  return std::nullopt;
}

BioesLabel BioesLabel::Make(Prefix p, CoarseTag t) {
  if ((p == Prefix::kNone) != (t == CoarseTag::kO)) {
    throw Error(ErrorKind::kInvalidArgument,
                "O must carry no prefix and entities must carry one");
  }
  return BioesLabel{p, t};
}

int LabelIndex(const BioesLabel &label) {
  if (label.is_o()) return 0;
  int prefix = 0;
  switch (label.prefix) {
    case Prefix::kB:
      prefix = 0;
      break;
    case Prefix::kI:
      prefix = 1;
      break;
    case Prefix::kE:
      prefix = 2;
      break;
    case Prefix::kS:
      prefix = 3;
      break;
    case Prefix::kNone:
      throw Error(ErrorKind::kInvalidArgument, "entity label without prefix");
  }
  return 1 + 4 * static_cast<int>(label.tag) + prefix;
}

BioesLabel LabelFromIndex(int index) {
  if (index < 0 || index >= kNumLabels) {
    throw Error(ErrorKind::kInvalidArgument,
                "label index out of range: " + std::to_string(index));
  }
  if (index == 0) return BioesLabel::O();
  static constexpr Prefix kPrefixes[] = {Prefix::kB, Prefix::kI, Prefix::kE,
                                         Prefix::kS};
  return BioesLabel{kPrefixes[(index - 1) % 4],
                    static_cast<CoarseTag>((index - 1) / 4)};
}

std::string LabelName(const BioesLabel &label) {
  if (label.is_o()) return "O";
  char p = '?';
  switch (label.prefix) {
    case Prefix::kB:
      p = 'B';
      break;
    case Prefix::kI:
      p = 'I';
      break;
    case Prefix::kE:
      p = 'E';
      break;
    case Prefix::kS:
      p = 'S';
      break;
    case Prefix::kNone:
      break;
  }
  std::string out(1, p);
  out += '-';
  out += CoarseTagName(label.tag);
  return out;
}

std::optional<BioesLabel> ParseLabel(std::string_view s) {
  if (s == "O") return BioesLabel::O();
  if (s.size() < 3 || s[1] != '-') return std::nullopt;
  Prefix p;
  switch (s[0]) {
    case 'B':
      p = Prefix::kB;
      break;
    case 'I':
      p = Prefix::kI;
      break;
    case 'E':
      p = Prefix::kE;
      break;
    case 'S':
      p = Prefix::kS;
      break;
    default:
      return std::nullopt;
  }
  std::optional<CoarseTag> tag = ParseCoarseTag(s.substr(2));
  if (!tag || *tag == CoarseTag::kO) return std::nullopt;
  return BioesLabel{p, *tag};
}

}  // namespace ipod
