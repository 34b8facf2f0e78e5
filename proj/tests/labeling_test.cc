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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>
#include <string>

#include "fixtures.h"
#include "ipod/common.h"
#include "ipod/labeling.h"

using namespace ipod;
using ipod::testing::MaximalRuns;
using ipod::testing::Seq;

namespace {

std::vector<std::string> Names(const std::vector<BioesLabel> &labels) {
  std::vector<std::string> out;
  for (const BioesLabel &l : labels) out.push_back(LabelName(l));
  return out;
}

std::vector<BioesLabel> Labels(const std::vector<std::string> &names) {
  std::vector<BioesLabel> out;
  for (const std::string &n : names) out.push_back(*ParseLabel(n));
  return out;
}

using T = CoarseTag;

}  // namespace

TEST_CASE("label inventory") {
  for (int i = 0; i < kNumLabels; ++i) {
    BioesLabel l = LabelFromIndex(i);
    CHECK(LabelIndex(l) == i);
    CHECK(*ParseLabel(LabelName(l)) == l);
  }
  CHECK(LabelName(LabelFromIndex(0)) == "O");
  CHECK_FALSE(ParseLabel("S-O").has_value());
  CHECK_FALSE(ParseLabel("X-RES").has_value());
  CHECK_THROWS_AS(BioesLabel::Make(Prefix::kB, CoarseTag::kO), Error);
}

TEST_CASE("encode the chief financial officer example") {
  std::vector<CoarseTag> c = {T::kRes, T::kFun, T::kRes, T::kLoc, T::kLoc};
  CHECK(Names(EncodeBioes(c)) ==
        std::vector<std::string>{"S-RES", "S-FUN", "S-RES", "B-LOC", "E-LOC"});
}

TEST_CASE("encode run lengths") {
  std::vector<CoarseTag> three = {T::kLoc, T::kLoc, T::kLoc};
  CHECK(Names(EncodeBioes(three)) ==
        std::vector<std::string>{"B-LOC", "I-LOC", "E-LOC"});
  std::vector<CoarseTag> o = {T::kO};
  CHECK(Names(EncodeBioes(o)) == std::vector<std::string>{"O"});
  std::vector<CoarseTag> oo = {T::kO, T::kO, T::kRes};
  CHECK(Names(EncodeBioes(oo)) == std::vector<std::string>{"O", "O", "S-RES"});
}

TEST_CASE("decode strict") {
  auto chunks = DecodeBioes(Labels({"S-RES", "S-FUN", "S-RES", "B-LOC", "E-LOC"}),
                            DecodePolicy::kStrict);
  CHECK(chunks == std::vector<Chunk>{{T::kRes, 0, 0},
                                     {T::kFun, 1, 1},
                                     {T::kRes, 2, 2},
                                     {T::kLoc, 3, 4}});
  CHECK(DecodeBioes(Labels({"B-LOC", "E-LOC"}), DecodePolicy::kStrict) ==
        std::vector<Chunk>{{T::kLoc, 0, 1}});
}

TEST_CASE("decode strict names the first offending position") {
  auto bad = Labels({"S-RES", "I-FUN", "E-FUN"});
  CHECK(FirstIllegalPosition(bad) == 1);
  try {
    DecodeBioes(bad, DecodePolicy::kStrict);
    FAIL("expected an error");
  } catch (const Error &e) {
    CHECK(std::string(e.what()).find("position 1") != std::string::npos);
  }
  CHECK(FirstIllegalPosition(Labels({"B-RES", "I-RES"})) == 2);
  CHECK(FirstIllegalPosition(Labels({"B-RES", "E-FUN"})) == 1);
  CHECK(FirstIllegalPosition(Labels({"B-RES", "O"})) == 1);
  CHECK(FirstIllegalPosition(Labels({"B-RES", "B-RES", "E-RES"})) == 1);
}

TEST_CASE("decode repair") {
  // An orphan I-X opens a chunk and the E-X closes it.
  CHECK(DecodeBioes(Labels({"I-FUN", "E-FUN"}), DecodePolicy::kRepair) ==
        std::vector<Chunk>{{T::kFun, 0, 1}});
  // An orphan E-X makes a one-token chunk.
  CHECK(DecodeBioes(Labels({"O", "E-RES"}), DecodePolicy::kRepair) ==
        std::vector<Chunk>{{T::kRes, 1, 1}});
  // A tag change closes the open chunk.
  CHECK(DecodeBioes(Labels({"B-RES", "I-FUN", "E-FUN"}), DecodePolicy::kRepair) ==
        std::vector<Chunk>{{T::kRes, 0, 0}, {T::kFun, 1, 2}});
  // An unclosed chunk ends with the sequence.
  CHECK(DecodeBioes(Labels({"B-LOC", "I-LOC"}), DecodePolicy::kRepair) ==
        std::vector<Chunk>{{T::kLoc, 0, 1}});
}

TEST_CASE("exhaustive encode/decode round trip up to length 6") {
  size_t checked = 0;
  for (int len = 1; len <= 6; ++len) {
    int total = 1;
    for (int i = 0; i < len; ++i) total *= 4;
    for (int code = 0; code < total; ++code) {
      std::vector<CoarseTag> coarse(len);
      int c = code;
      for (int i = 0; i < len; ++i) {
        coarse[i] = static_cast<CoarseTag>(c % 4);
        c /= 4;
      }
      std::vector<BioesLabel> labels = EncodeBioes(coarse);
      REQUIRE(labels.size() == coarse.size());
      REQUIRE_FALSE(FirstIllegalPosition(labels).has_value());
      REQUIRE(DecodeBioes(labels, DecodePolicy::kStrict) == MaximalRuns(coarse));
      // REPAIR agrees with STRICT on legal input.
      REQUIRE(DecodeBioes(labels, DecodePolicy::kRepair) == MaximalRuns(coarse));
      ++checked;
    }
  }
  CHECK(checked == 4 + 16 + 64 + 256 + 1024 + 4096);
}

TEST_CASE("repair never fails on arbitrary label sequences") {
  Rng rng(5);
  std::uniform_int_distribution<int> label(0, kNumLabels - 1);
  for (int trial = 0; trial < 5000; ++trial) {
    std::vector<BioesLabel> labels(1 + trial % 7);
    for (auto &l : labels) l = LabelFromIndex(label(rng));
    std::vector<Chunk> chunks = DecodeBioes(labels, DecodePolicy::kRepair);
    size_t prev_end = 0;
    for (size_t k = 0; k < chunks.size(); ++k) {
      REQUIRE(chunks[k].start <= chunks[k].end);
      REQUIRE(chunks[k].end < labels.size());
      if (k > 0) REQUIRE(chunks[k].start > prev_end);
      prev_end = chunks[k].end;
    }
  }
}

TEST_CASE("auto tag") {
  const Gazetteer &g = DefaultGazetteer();
  LabeledSequence s = AutoTag(NormalizeTitle("Chief Financial Officer Asia Pacific"), g);
  CHECK(Names(s.labels) ==
        std::vector<std::string>{"S-RES", "S-FUN", "S-RES", "B-LOC", "E-LOC"});
  CHECK(Names(AutoTag(NormalizeTitle("manager"), g).labels) ==
        std::vector<std::string>{"S-RES"});
  CHECK(Names(AutoTag(NormalizeTitle("zxqv"), g).labels) ==
        std::vector<std::string>{"O"});
  CHECK_THROWS_AS(AutoTag(NormalizeTitle("!!!"), g), Error);
}

TEST_CASE("conll format") {
  std::vector<LabeledSequence> data = {
      Seq({"vice", "president"}, {"B-RES", "E-RES"}), Seq({"zxqv"}, {"O"})};
  std::string text = SerializeConll(data);
  CHECK(text == "vice\tB-RES\npresident\tE-RES\n\nzxqv\tO\n\n");
  CHECK(ParseConll(text) == data);
  // CRLF line endings and missing final blank line are accepted.
  CHECK(ParseConll("vice\tB-RES\r\npresident\tE-RES\r\n\r\nzxqv\tO") == data);
  CHECK_THROWS_AS(ParseConll("vice B-RES\n"), Error);
  CHECK_THROWS_AS(ParseConll("vice\tB-XYZ\n"), Error);
}

TEST_CASE("split: 80/10/10 by title, seeded") {
  std::vector<LabeledSequence> data;
  for (int i = 0; i < 1000; ++i) {
    data.push_back(ipod::testing::Seq({"t" + std::to_string(i)}, {"S-RES"}));
  }
  DataSplit a = SplitData(data, 42);
  CHECK(a.train.size() == 800);
  CHECK(a.dev.size() == 100);
  CHECK(a.test.size() == 100);
  std::set<std::string> seen;
  for (const auto *part : {&a.train, &a.dev, &a.test}) {
    for (const auto &ex : *part) seen.insert(ex.tokens[0]);
  }
  CHECK(seen.size() == 1000);
  DataSplit b = SplitData(data, 42);
  CHECK(a.train == b.train);
  CHECK(a.test == b.test);
  CHECK_FALSE(SplitData(data, 43).train == a.train);
  DataSplit odd = SplitData(std::span(data).first(7), 1);
  CHECK(odd.train.size() == 5);
  CHECK(odd.dev.size() == 0);
  CHECK(odd.test.size() == 2);
  CHECK_THROWS_AS(SplitData(data, 1, 0.9, 0.2), Error);
}
