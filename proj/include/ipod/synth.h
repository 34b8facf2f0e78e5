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

#ifndef IPOD_SYNTH_H_
#define IPOD_SYNTH_H_

#include <cstdint>

#include "ipod/corpus.h"
#include "ipod/gazetteer.h"

namespace ipod {

// Deterministic template-grammar corpus drawn from the gazetteer's token
// pools:
//
//   [RES]? ( RES | FUN{1,2} RES | RES O FUN{1,2} ) [LOC{1,2}]?
//
// Titles are 1-6 tokens long. Requires at least one gazetteer token for each
// of RES, FUN, LOC and O.
Corpus SynthCorpus(const Gazetteer &g, uint64_t seed, size_t count);

}  // namespace ipod

#endif  // IPOD_SYNTH_H_
