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

// Fixtures shared by unit and acceptance tests.

#ifndef IPOD_TESTS_FIXTURES_H_
#define IPOD_TESTS_FIXTURES_H_

#include <Eigen/Dense>

#include <array>
#include <random>
#include <string>
#include <vector>

#include "ipod/common.h"
#include "ipod/crf.h"
#include "ipod/gazetteer.h"
#include "ipod/labeling.h"
#include "ipod/synth.h"

namespace ipod::testing {

// Three annotators over `unanimous + two_way` tokens. Unanimous tokens get
// the same tag from everyone; two-way tokens have exactly one dissenter,
// rotating which annotator dissents.
inline std::array<AnnotationSet, 3> IrrFixture(int unanimous, int two_way) {
  std::array<AnnotationSet, 3> sets = {AnnotationSet("a"), AnnotationSet("b"),
                                       AnnotationSet("c")};
  for (int k = 0; k < unanimous + two_way; ++k) {
    const std::string tok = "tok" + std::to_string(k);
    const CoarseTag tag = kAllCoarseTags[k % 4];
    const CoarseTag other = kAllCoarseTags[(k + 1) % 4];
    for (int s = 0; s < 3; ++s) {
      bool dissent = k >= unanimous && s == (k % 3);
      sets[s].Add(tok, dissent ? other : tag);
    }
  }
  return sets;
}

// Ten tokens, two annotators agreeing on 7.
//   a: R R R F F F L L O O      marginals R3 F3 L2 O2
//   b: R R F F F L L L O R      marginals R3 F3 L3 O1
// p_o = 0.7, p_e = (9 + 9 + 6 + 2) / 100 = 0.26,
// kappa = 0.44 / 0.74 = 22 / 37.
inline std::array<AnnotationSet, 2> KappaFixture() {
  using T = CoarseTag;
  const T a[] = {T::kRes, T::kRes, T::kRes, T::kFun, T::kFun,
                 T::kFun, T::kLoc, T::kLoc, T::kO,   T::kO};
  const T b[] = {T::kRes, T::kRes, T::kFun, T::kFun, T::kFun,
                 T::kLoc, T::kLoc, T::kLoc, T::kO,   T::kRes};
  std::array<AnnotationSet, 2> sets = {AnnotationSet("a"), AnnotationSet("b")};
  for (int i = 0; i < 10; ++i) {
    sets[0].Add("t" + std::to_string(i), a[i]);
    sets[1].Add("t" + std::to_string(i), b[i]);
  }
  return sets;
}
inline constexpr double kKappaFixtureValue = 22.0 / 37.0;

inline LabeledSequence Seq(std::vector<std::string> tokens,
                           const std::vector<std::string> &labels) {
  LabeledSequence s;
  s.tokens = std::move(tokens);
  for (const std::string &l : labels) s.labels.push_back(*ParseLabel(l));
  return s;
}

// Ten tokens over three titles with two label errors.
//   title 1: all five correct.
//   title 2: gold B-RES E-RES O S-FUN, predicted S-RES at position 3.
//   title 3: gold S-RES, predicted O.
// Gold non-O = 9, predicted non-O = 8, TP = 7, FP = 1, FN = 2.
//   P = 7/8, R = 7/9, F1 = 14/17, token EM = 8/10, title EM = 1/3.
// Per tag (TP, FP, FN): RES (4, 1, 1), FUN (1, 0, 1), LOC (2, 0, 0).
struct ScoreFixture {
  std::vector<LabeledSequence> gold;
  std::vector<LabeledSequence> pred;
};

inline ScoreFixture MakeScoreFixture() {
  ScoreFixture f;
  std::vector<std::string> t1 = {"chief", "financial", "officer", "asia", "pacific"};
  std::vector<std::string> t2 = {"vice", "president", "of", "sales"};
  std::vector<std::string> t3 = {"manager"};
  f.gold = {Seq(t1, {"S-RES", "S-FUN", "S-RES", "B-LOC", "E-LOC"}),
            Seq(t2, {"B-RES", "E-RES", "O", "S-FUN"}), Seq(t3, {"S-RES"})};
  f.pred = {Seq(t1, {"S-RES", "S-FUN", "S-RES", "B-LOC", "E-LOC"}),
            Seq(t2, {"B-RES", "E-RES", "O", "S-RES"}), Seq(t3, {"O"})};
  return f;
}

// Synthetic titles labeled by the built-in gazetteer.
inline std::vector<LabeledSequence> SynthLabeled(uint64_t seed, size_t count) {
  Corpus c = SynthCorpus(DefaultGazetteer(), seed, count);
  std::vector<LabeledSequence> out;
  for (const Title &t : c.titles) out.push_back(AutoTag(t, DefaultGazetteer()));
  return out;
}

// 50 titles from a level / function / role template with an optional
// location.
inline std::vector<std::vector<std::string>> TemplatedTitles() {
  const std::vector<std::string> level = {"senior", "junior", "lead", "chief", "principal"};
  const std::vector<std::string> fun = {"software", "sales", "marketing", "data", "finance"};
  const std::vector<std::string> role = {"engineer", "manager", "director", "analyst"};
  const std::vector<std::string> loc = {"", " asia", " europe"};
  std::vector<std::vector<std::string>> out;
  for (int i = 0; i < 50; ++i) {
    std::string t = level[i % 5] + " " + fun[(i / 5) % 5] + " " + role[(i * 7) % 4] +
                    loc[(i / 3) % 3];
    out.push_back(SplitWhitespace(t));
  }
  return out;
}

// Independent oracle: maximal runs of one non-O tag.
inline std::vector<Chunk> MaximalRuns(const std::vector<CoarseTag> &coarse) {
  std::vector<Chunk> chunks;
  for (size_t i = 0; i < coarse.size(); ++i) {
    if (coarse[i] == CoarseTag::kO) continue;
    if (!chunks.empty() && chunks.back().tag == coarse[i] && chunks.back().end + 1 == i) {
      chunks.back().end = i;
    } else {
      chunks.push_back({coarse[i], i, i});
    }
  }
  return chunks;
}

// Random CRF models over a small word list.
inline const std::vector<std::string> kWords = {"senior", "manager", "of",  "sales",
                                         "asia",   "pacific", "vp",  "data"};

inline std::vector<std::string> RandomTokens(Rng &rng, int n) {
  std::uniform_int_distribution<size_t> pick(0, kWords.size() - 1);
  std::vector<std::string> tokens(n);
  for (auto &t : tokens) t = kWords[pick(rng)];
  return tokens;
}

inline Eigen::MatrixXd RandomMatrix(Rng &rng, Eigen::Index rows, Eigen::Index cols,
                             double scale) {
  std::normal_distribution<double> d(0.0, scale);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = d(rng);
  return m;
}

inline CrfModel RandomCrfModel(Rng &rng, const std::vector<std::string> &tokens,
                     double scale = 0.5) {
  CrfModel m;
  for (size_t i = 0; i < tokens.size(); ++i) {
    for (const std::string &f : ExtractFeatures(tokens, i)) m.vocab.Intern(f);
  }
  m.emission = RandomMatrix(rng, m.vocab.size(), kNumLabels, scale);
  m.transitions.trans = RandomMatrix(rng, kNumLabels, kNumLabels, 1.0);
  m.transitions.start = RandomMatrix(rng, kNumLabels, 1, 1.0);
  m.transitions.stop = RandomMatrix(rng, kNumLabels, 1, 1.0);
  return m;
}

// A random STRICT-legal label sequence.
inline std::vector<BioesLabel> RandomLegalLabels(Rng &rng, int n) {
  std::uniform_int_distribution<int> tag(0, 3);
  std::vector<CoarseTag> coarse(n);
  for (auto &c : coarse) c = static_cast<CoarseTag>(tag(rng));
  return EncodeBioes(coarse);
}

inline Eigen::VectorXd PackCrf(const CrfModel &m) {
  Eigen::VectorXd v(m.emission.size() + m.transitions.trans.size() + 2 * kNumLabels);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < m.emission.size(); ++i) v(k++) = m.emission.data()[i];
  for (Eigen::Index i = 0; i < m.transitions.trans.size(); ++i) {
    v(k++) = m.transitions.trans.data()[i];
  }
  for (int i = 0; i < kNumLabels; ++i) v(k++) = m.transitions.start(i);
  for (int i = 0; i < kNumLabels; ++i) v(k++) = m.transitions.stop(i);
  return v;
}

inline void UnpackCrf(const Eigen::VectorXd &v, CrfModel &m) {
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < m.emission.size(); ++i) m.emission.data()[i] = v(k++);
  for (Eigen::Index i = 0; i < m.transitions.trans.size(); ++i) {
    m.transitions.trans.data()[i] = v(k++);
  }
  for (int i = 0; i < kNumLabels; ++i) m.transitions.start(i) = v(k++);
  for (int i = 0; i < kNumLabels; ++i) m.transitions.stop(i) = v(k++);
}

inline Eigen::VectorXd PackCrfGradient(const CrfGradient &g) {
  CrfModel shape;
  shape.emission = g.emission;
  shape.transitions = g.transitions;
  return PackCrf(shape);
}

}  // namespace ipod::testing

#endif  // IPOD_TESTS_FIXTURES_H_
