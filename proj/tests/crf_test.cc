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

#include <cmath>
#include <memory>
#include <random>

#include "fixtures.h"
#include "ipod/common.h"
#include "ipod/crf.h"
#include "ipod/synth.h"
#include "oracles.h"

using namespace ipod;
using ipod::testing::BruteForce;
using ipod::testing::ForEachPath;
using ipod::testing::PackCrf;
using ipod::testing::PackCrfGradient;
using ipod::testing::RandomCrfModel;
using ipod::testing::RandomLegalLabels;
using ipod::testing::RandomTokens;
using ipod::testing::Seq;
using ipod::testing::SynthLabeled;
using ipod::testing::UnpackCrf;

TEST_CASE("feature templates") {
  std::vector<std::string> vp = {"vice", "president"};
  std::vector<std::string> f = ExtractFeatures(vp, 0);
  auto has = [&](const std::string &name) {
    return std::find(f.begin(), f.end(), name) != f.end();
  };
  CHECK(has("w0=vice"));
  CHECK(has("w+1=president"));
  CHECK(has("first"));
  CHECK_FALSE(has("last"));
  CHECK(has("w-1=<s>"));
  CHECK(has("pre3=vic"));
  CHECK(has("suf2=ce"));

  std::vector<std::string> one = {"manager"};
  Gazetteer g = DefaultGazetteer();
  f = ExtractFeatures(one, 0, &g);
  CHECK(has("gaz=RES"));
  CHECK(has("w-1=<s>"));
  CHECK(has("w+1=</s>"));
  CHECK(has("first"));
  CHECK(has("last"));
  // Deterministic and duplicate free.
  CHECK(f == ExtractFeatures(one, 0, &g));
  std::vector<std::string> sorted = f;
  std::sort(sorted.begin(), sorted.end());
  CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
}

TEST_CASE("frozen vocab rejects new features") {
  FeatureVocab v;
  CHECK(v.Intern("a") == 0);
  CHECK(v.Intern("b") == 1);
  CHECK(v.Intern("a") == 0);
  v.Freeze();
  CHECK_FALSE(v.Intern("c").has_value());
  CHECK(v.size() == 2);
}

TEST_CASE("log partition with zero weights") {
  CrfModel m;
  std::vector<std::string> tokens = {"a", "b", "c"};
  for (size_t i = 0; i < tokens.size(); ++i) {
    for (const auto &f : ExtractFeatures(tokens, i)) m.vocab.Intern(f);
  }
  m.emission = Eigen::MatrixXd::Zero(m.vocab.size(), kNumLabels);
  CHECK(LogPartition(m, tokens) == doctest::Approx(3.0 * std::log(13.0)));
  LabeledSequence ex = Seq(tokens, {"O", "O", "S-RES"});
  CHECK(NllAndGradient(m, ex, nullptr) == doctest::Approx(3.0 * std::log(13.0)));
}

TEST_CASE("log partition of a single token") {
  Rng rng(1);
  std::vector<std::string> tokens = {"manager"};
  CrfModel m = RandomCrfModel(rng, tokens);
  Eigen::VectorXd e = m.Emissions(tokens).row(0).transpose();
  Eigen::VectorXd s = e + m.transitions.start + m.transitions.stop;
  double expected = std::log(s.array().exp().sum());
  CHECK(LogPartition(m, tokens) == doctest::Approx(expected).epsilon(1e-12));
  // Viterbi is the argmax of the same scores.
  Eigen::Index best;
  s.maxCoeff(&best);
  CHECK(LabelIndex(ViterbiDecode(m, tokens)[0]) == best);
}

TEST_CASE("viterbi and log partition match brute force") {
  Rng rng(2026);
  for (int model = 0; model < 20; ++model) {
    for (int n = 1; n <= 4; ++n) {
      std::vector<std::string> tokens = RandomTokens(rng, n);
      CrfModel m = RandomCrfModel(rng, tokens);
      Eigen::MatrixXd e = m.Emissions(tokens);
      auto brute = BruteForce(e, m.transitions);
      REQUIRE(std::abs(LogPartition(m, tokens) - brute.log_partition) < 1e-6);
      REQUIRE(LabelIds(ViterbiDecode(m, tokens)) == brute.argmax);
    }
  }
  for (int k = 0; k < 5; ++k) {
    std::vector<std::string> tokens = RandomTokens(rng, 5);
    CrfModel m = RandomCrfModel(rng, tokens);
    auto brute = BruteForce(m.Emissions(tokens), m.transitions);
    CHECK(std::abs(LogPartition(m, tokens) - brute.log_partition) < 1e-6);
    CHECK(LabelIds(ViterbiDecode(m, tokens)) == brute.argmax);
  }
}

TEST_CASE("path probabilities sum to one") {
  Rng rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<std::string> tokens = RandomTokens(rng, 1 + trial % 4);
    CrfModel m = RandomCrfModel(rng, tokens);
    Eigen::MatrixXd e = m.Emissions(tokens);
    double log_z = LogPartition(m, tokens);
    long double total = 0.0L;
    ForEachPath(static_cast<int>(tokens.size()), kNumLabels,
                [&](const std::vector<int> &path) {
                  total += std::exp(static_cast<long double>(
                      PathScore(e, m.transitions, std::span<const int>(path)) - log_z));
                });
    CHECK(static_cast<double>(total) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("viterbi is invariant to positive weight scaling") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::string> tokens = RandomTokens(rng, 1 + trial % 6);
    CrfModel m = RandomCrfModel(rng, tokens);
    std::vector<BioesLabel> before = ViterbiDecode(m, tokens);
    m.emission *= 3.7;
    m.transitions.trans *= 3.7;
    m.transitions.start *= 3.7;
    m.transitions.stop *= 3.7;
    REQUIRE(ViterbiDecode(m, tokens) == before);
  }
}

TEST_CASE("nll gradient matches central finite differences") {
  Rng rng(314);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::string> tokens = RandomTokens(rng, 5);
    CrfModel m = RandomCrfModel(rng, tokens);
    LabeledSequence ex{tokens, RandomLegalLabels(rng, 5)};
    CrfGradient g;
    NllAndGradient(m, ex, &g);
    Eigen::VectorXd analytic = PackCrfGradient(g);
    CrfModel probe = m;
    auto f = [&](const Eigen::VectorXd &x) {
      UnpackCrf(x, probe);
      return NllAndGradient(probe, ex, nullptr);
    };
    Eigen::VectorXd numeric = ipod::testing::NumericGradient(f, PackCrf(m));
    REQUIRE(ipod::testing::RelativeError(analytic, numeric) <= 1e-4);
  }
}

TEST_CASE("confident model has near-zero loss") {
  std::vector<std::string> tokens = {"sales", "manager"};
  LabeledSequence ex = Seq(tokens, {"S-FUN", "S-RES"});
  CrfModel m;
  for (size_t i = 0; i < tokens.size(); ++i) {
    for (const auto &f : ExtractFeatures(tokens, i)) m.vocab.Intern(f);
  }
  m.emission = Eigen::MatrixXd::Zero(m.vocab.size(), kNumLabels);
  m.emission(*m.vocab.Find("w0=sales"), LabelIndex(*ParseLabel("S-FUN"))) = 20.0;
  m.emission(*m.vocab.Find("w0=manager"), LabelIndex(*ParseLabel("S-RES"))) = 20.0;
  CHECK(NllAndGradient(m, ex, nullptr) <= 1e-3);
}

TEST_CASE("illegal gold labels are rejected") {
  CrfModel m;
  LabeledSequence ex = Seq({"a", "b"}, {"I-RES", "E-RES"});
  CHECK_THROWS_AS(NllAndGradient(m, ex, nullptr), Error);
  std::vector<LabeledSequence> data = {ex};
  CHECK_THROWS_AS(TrainCrf(data, TrainConfig::CrfDefaults()), Error);
  CHECK_THROWS_AS(TrainCrf({}, TrainConfig::CrfDefaults()), Error);
}

TEST_CASE("training memorizes a repeated example") {
  std::vector<LabeledSequence> data(
      10, Seq({"chief", "financial", "officer", "asia", "pacific"},
              {"S-RES", "S-FUN", "S-RES", "B-LOC", "E-LOC"}));
  TrainConfig cfg = TrainConfig::CrfDefaults();
  cfg.word_dropout = 0.0;
  cfg.batch_size = 1;
  cfg.epochs = 50;
  TrainLog log;
  CrfModel m = TrainCrf(data, cfg, nullptr, &log);
  REQUIRE(log.epoch_loss.size() == 50);
  CHECK(log.epoch_loss.back() < 0.01);
  CHECK(ViterbiDecode(m, data[0].tokens) == data[0].labels);
}

TEST_CASE("training is bitwise reproducible") {
  std::vector<LabeledSequence> data = SynthLabeled(3, 300);
  TrainConfig cfg = TrainConfig::CrfDefaults();
  cfg.epochs = 3;
  cfg.seed = 17;
  auto g = std::make_shared<const Gazetteer>(DefaultGazetteer());
  std::string a = SerializeCrfModel(TrainCrf(data, cfg, g));
  std::string b = SerializeCrfModel(TrainCrf(data, cfg, g));
  CHECK(a == b);
  cfg.seed = 18;
  CHECK(SerializeCrfModel(TrainCrf(data, cfg, g)) != a);
}

TEST_CASE("training loss trends down on synthetic data") {
  std::vector<LabeledSequence> data = SynthLabeled(4, 500);
  TrainConfig cfg = TrainConfig::CrfDefaults();
  cfg.epochs = 5;
  TrainLog log;
  TrainCrf(data, cfg, nullptr, &log);
  REQUIRE(log.epoch_loss.size() == 5);
  CHECK(log.epoch_loss.back() < log.epoch_loss.front());
}

TEST_CASE("adam optimizer trains") {
  std::vector<LabeledSequence> data = SynthLabeled(4, 200);
  TrainConfig cfg = TrainConfig::CrfDefaults();
  cfg.optimizer = OptimizerKind::kAdam;
  cfg.learning_rate = 0.01;
  cfg.epochs = 3;
  TrainLog log;
  TrainCrf(data, cfg, nullptr, &log);
  CHECK(log.epoch_loss.back() < log.epoch_loss.front());
}

TEST_CASE("divergence aborts training") {
  std::vector<LabeledSequence> data = SynthLabeled(4, 64);
  TrainConfig cfg = TrainConfig::CrfDefaults();
  cfg.learning_rate = 1e300;
  cfg.epochs = 5;
  CHECK_THROWS_AS(TrainCrf(data, cfg), Error);
  try {
    TrainCrf(data, cfg);
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::kDivergence);
  }
}

TEST_CASE("logreg decodes per-token argmax and fits gazetteer labels") {
  std::vector<LabeledSequence> train = SynthLabeled(8, 1500);
  std::vector<LabeledSequence> test = SynthLabeled(9, 300);
  TrainConfig cfg = TrainConfig::CrfDefaults();
  cfg.epochs = 10;
  auto g = std::make_shared<const Gazetteer>(DefaultGazetteer());
  CrfModel m = TrainLogReg(train, cfg, g);
  CHECK(m.transitions.trans.isZero(0.0));
  CHECK(m.transitions.start.isZero(0.0));
  CHECK(m.transitions.stop.isZero(0.0));
  size_t correct = 0, total = 0;
  for (const LabeledSequence &ex : test) {
    std::vector<BioesLabel> pred = ViterbiDecode(m, ex.tokens);
    REQUIRE(LabelIds(pred) == RowArgmax(m.Emissions(ex.tokens)));
    for (size_t i = 0; i < ex.size(); ++i) correct += pred[i] == ex.labels[i];
    total += ex.size();
  }
  CHECK(static_cast<double>(correct) / total >= 0.99);
}

TEST_CASE("unseen features are ignored at inference") {
  std::vector<LabeledSequence> data = SynthLabeled(4, 100);
  TrainConfig cfg = TrainConfig::CrfDefaults();
  cfg.epochs = 1;
  CrfModel m = TrainCrf(data, cfg);
  CHECK(m.vocab.frozen());
  int before = m.vocab.size();
  std::vector<std::string> novel = {"qqqq", "zzzz"};
  CHECK(ViterbiDecode(m, novel).size() == 2);
  CHECK(m.vocab.size() == before);
}

TEST_CASE("model file round trip") {
  std::vector<LabeledSequence> data = SynthLabeled(5, 200);
  TrainConfig cfg = TrainConfig::CrfDefaults();
  cfg.epochs = 2;
  auto g = std::make_shared<const Gazetteer>(DefaultGazetteer());
  for (bool logreg : {false, true}) {
    CrfModel m = logreg ? TrainLogReg(data, cfg, g) : TrainCrf(data, cfg, g);
    std::string bytes = SerializeCrfModel(m);
    CHECK(bytes.substr(0, 8) == "IPODMDL1");
    CrfModel loaded = DeserializeCrfModel(bytes);
    CHECK(loaded.kind == m.kind);
    CHECK(SerializeCrfModel(loaded) == bytes);
    for (const LabeledSequence &ex : data) {
      REQUIRE(ViterbiDecode(loaded, ex.tokens).size() == ex.size());
    }
  }
  CHECK_THROWS_AS(DeserializeCrfModel("garbage"), Error);
  std::string truncated = SerializeCrfModel(TrainCrf(data, cfg));
  truncated.resize(truncated.size() - 3);
  CHECK_THROWS_AS(DeserializeCrfModel(truncated), Error);
}
