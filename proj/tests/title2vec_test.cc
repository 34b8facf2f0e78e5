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
#include <random>

#include "fixtures.h"
#include "ipod/common.h"
#include "ipod/gazetteer.h"
#include "ipod/synth.h"
#include "ipod/title2vec.h"
#include "oracles.h"

using namespace ipod;
using ipod::testing::NumericGradient;
using ipod::testing::PackBlocks;
using ipod::testing::RandomizeBlocks;
using ipod::testing::RelativeError;
using ipod::testing::TemplatedTitles;
using ipod::testing::UnpackBlocks;

namespace {

using Titles = std::vector<std::vector<std::string>>;

Titles Split(const std::vector<std::string> &lines) {
  Titles out;
  for (const std::string &l : lines) out.push_back(SplitWhitespace(l));
  return out;
}

BiLmModel SmallModel(int d, int h, int l, uint64_t seed) {
  Titles corpus = Split({"senior data engineer", "sales director", "data director asia"});
  Rng rng(seed);
  BiLmModel m = InitBiLm(Vocab::Build(corpus, 1), {d, h, l}, rng);
  RandomizeBlocks(m.Blocks(), seed + 1, 0.5);
  return m;
}

TrainConfig TinyConfig() {
  TrainConfig cfg;
  cfg.optimizer = OptimizerKind::kAdam;
  cfg.learning_rate = 0.01;
  cfg.batch_size = 10;
  cfg.epochs = 5;
  cfg.seed = 3;
  return cfg;
}

double Cosine(const Eigen::VectorXd &a, const Eigen::VectorXd &b) {
  return a.dot(b) / (a.norm() * b.norm());
}

}  // namespace

TEST_CASE("vocab: cutoff, sentinels and id order") {
  Titles corpus = Split({"a a b"});
  Vocab v2 = Vocab::Build(corpus, 2);
  CHECK(v2.size() == 4);
  CHECK(v2.Token(0) == "<unk>");
  CHECK(v2.Token(1) == "<s>");
  CHECK(v2.Token(2) == "</s>");
  CHECK(v2.Id("a") == 3);
  CHECK(v2.Id("b") == Vocab::kUnk);
  CHECK_FALSE(v2.Contains("b"));

  Vocab v1 = Vocab::Build(corpus, 1);
  CHECK(v1.size() == 5);
  CHECK(v1.Id("a") == 3);
  CHECK(v1.Id("b") == 4);

  // Equal counts fall back to lexicographic order.
  Vocab tie = Vocab::Build(Split({"zeta alpha mid", "mid"}), 1);
  CHECK(tie.tokens() == std::vector<std::string>{"<unk>", "<s>", "</s>", "mid", "alpha", "zeta"});

  CHECK_THROWS_AS(Vocab::Build(corpus, 0), Error);
  CHECK_THROWS_AS(Vocab::Build(Titles{}, 1), Error);
  CHECK(Vocab::FromTokens(v1.tokens()).tokens() == v1.tokens());
  CHECK_THROWS_AS(Vocab::FromTokens({"a", "b", "c"}), Error);
}

TEST_CASE("biLM: contextual dimension is D + 2HL") {
  SUBCASE("D=8 H=16 L=1") {
    BiLmModel m = SmallModel(8, 16, 1, 1);
    CHECK(m.context_dim() == 40);
    Eigen::MatrixXd e = EmbedTitle(m, SplitWhitespace("senior data engineer"));
    CHECK(e.rows() == 3);
    CHECK(e.cols() == 40);
  }
  SUBCASE("D=4 H=3 L=2") {
    BiLmModel m = SmallModel(4, 3, 2, 2);
    CHECK(EmbedTitle(m, SplitWhitespace("sales director")).cols() == 4 + 2 * 3 * 2);
  }
  SUBCASE("1024 + 2 * 512 * 2 = 3072") {
    Rng rng(0);
    BiLmModel m = InitBiLm(Vocab::Build(Split({"project manager"}), 1), {1024, 512, 2}, rng);
    CHECK(m.context_dim() == 3072);
    CHECK(EmbedTitle(m, SplitWhitespace("project manager")).cols() == 3072);
  }
}

TEST_CASE("biLM: embedding slice is the input embedding, unknowns map to <unk>") {
  BiLmModel m = SmallModel(4, 3, 1, 5);
  Eigen::MatrixXd e = EmbedTitle(m, SplitWhitespace("data plumber"));
  CHECK(e.row(0).head(4).transpose() == m.embedding.col(m.vocab.Id("data")));
  CHECK(e.row(1).head(4).transpose() == m.embedding.col(Vocab::kUnk));
  CHECK_THROWS_AS(EmbedTitle(m, std::vector<std::string>{}), Error);
}

TEST_CASE("biLM: analytic gradient matches finite differences per block") {
  for (int layers : {1, 2}) {
    BiLmModel m = SmallModel(4, 4, layers, 10 + layers);
    const std::vector<std::string> title = SplitWhitespace("senior data director");
    BiLmModel grad = m.ZerosLike();
    BiLmNll(m, title, &grad);
    Eigen::VectorXd analytic = PackBlocks(grad.Blocks());
    auto f = [&](const Eigen::VectorXd &x) {
      BiLmModel probe = m;
      UnpackBlocks(x, probe.Blocks());
      return BiLmNll(probe, title);
    };
    Eigen::VectorXd numeric = NumericGradient(f, PackBlocks(m.Blocks()));
    Eigen::Index at = 0;
    int block_no = 0;
    for (const auto &b : grad.Blocks()) {
      CAPTURE(layers);
      CAPTURE(block_no);
      CHECK(RelativeError(analytic.segment(at, b.size()), numeric.segment(at, b.size())) <=
            1e-3);
      at += b.size();
      ++block_no;
    }
  }
}

TEST_CASE("biLM: forward LM sees only the past, backward only the future") {
  BiLmModel m = SmallModel(4, 5, 2, 21);
  const std::vector<std::string> base = SplitWhitespace("senior data engineer sales director");
  const size_t n = base.size();
  Eigen::MatrixXd f0 = ForwardLogProbs(m, base);
  Eigen::MatrixXd b0 = BackwardLogProbs(m, base);
  CHECK(f0.cols() == static_cast<Eigen::Index>(n + 1));
  CHECK(f0.col(0).array().exp().sum() == doctest::Approx(1.0));
  for (size_t k = 1; k <= n; ++k) {
    std::vector<std::string> changed = base;
    changed[k - 1] = changed[k - 1] == "asia" ? "data" : "asia";
    Eigen::MatrixXd f = ForwardLogProbs(m, changed);
    Eigen::MatrixXd b = BackwardLogProbs(m, changed);
    for (size_t t = 0; t <= n; ++t) {
      CAPTURE(k);
      CAPTURE(t);
      // Forward column t conditions on w1..wt.
      CHECK((f.col(t) == f0.col(t)) == (t < k));
      // Backward column t conditions on wn..w(n-t+1).
      CHECK((b.col(t) == b0.col(t)) == (t < n - k + 1));
    }
  }
}

TEST_CASE("biLM: training beats the uniform model within 5 epochs") {
  Titles corpus = TemplatedTitles();
  BiLmLog log;
  BiLmModel m = TrainBiLm(corpus, {16, 16, 1}, TinyConfig(), 1, &log);
  const double uniform = static_cast<double>(m.vocab.size());
  REQUIRE(log.perplexity.size() == 5);
  CHECK(BiLmPerplexity(m, corpus) < uniform);
  CHECK(log.perplexity.back() < uniform);
  for (size_t e = 1; e < log.perplexity.size(); ++e) {
    CHECK(log.perplexity[e] <= 1.05 * log.perplexity[e - 1]);
  }
}

TEST_CASE("biLM: seeded training is reproducible") {
  Titles corpus = TemplatedTitles();
  TrainConfig cfg = TinyConfig();
  cfg.epochs = 2;
  BiLmModel a = TrainBiLm(corpus, {6, 5, 1}, cfg);
  BiLmModel b = TrainBiLm(corpus, {6, 5, 1}, cfg);
  CHECK(PackBlocks(a.Blocks()) == PackBlocks(b.Blocks()));
  cfg.seed = 4;
  BiLmModel c = TrainBiLm(corpus, {6, 5, 1}, cfg);
  CHECK(PackBlocks(a.Blocks()) != PackBlocks(c.Blocks()));
}

TEST_CASE("biLM: a token gets different vectors in different titles") {
  BiLmModel m = TrainBiLm(TemplatedTitles(), {16, 16, 1}, TinyConfig());
  Eigen::MatrixXd a = EmbedTitle(m, SplitWhitespace("sales director"));
  Eigen::MatrixXd b = EmbedTitle(m, SplitWhitespace("chief data director asia"));
  const double cos = Cosine(a.row(1).transpose(), b.row(2).transpose());
  CHECK(cos < 1.0 - 1e-6);
  // The static slice is shared.
  CHECK(a.row(1).head(16) == b.row(2).head(16));
}

TEST_CASE("biLM: serialization round trip") {
  BiLmModel m = SmallModel(4, 3, 2, 30);
  BiLmModel back = DeserializeBiLm(SerializeBiLm(m));
  CHECK(back.vocab.tokens() == m.vocab.tokens());
  CHECK(back.context_dim() == m.context_dim());
  // Weights are stored as binary32.
  CHECK((PackBlocks(back.Blocks()) - PackBlocks(m.Blocks())).lpNorm<Eigen::Infinity>() < 1e-6);
  CHECK(SerializeBiLm(back) == SerializeBiLm(m));
  CHECK(back.ContentHash() == m.ContentHash());
  CHECK(back.ContentHash().size() == 16);
  std::string bytes = SerializeBiLm(m);
  CHECK_THROWS_AS(DeserializeBiLm(bytes.substr(0, bytes.size() - 3)), Error);
}

TEST_CASE("embedding file: bit-exact round trip") {
  EmbeddingFile f;
  f.dim = 3;
  f.hash = "00ff";
  f.Add("t1", (Eigen::MatrixXd(2, 3) << 0.1, -1e-300, 1.0 / 3.0, 5e300, 0.0, -2.5).finished());
  Rng rng(9);
  std::normal_distribution<double> d;
  Eigen::MatrixXd r(4, 3);
  for (Eigen::Index i = 0; i < r.size(); ++i) r.data()[i] = d(rng);
  f.Add("profile 7", r);
  std::string text = SerializeEmbeddingFile(f);
  CHECK(text.rfind("ipod-emb v1 3 00ff\nt1\t2\n0.1 -1e-300 0.3333333333333333\n5e+300 0 -2.5\n", 0) == 0);
  EmbeddingFile back = ParseEmbeddingFile(text);
  CHECK(back.dim == 3);
  CHECK(back.hash == "00ff");
  REQUIRE(back.records.size() == 2);
  CHECK(back.records[1].title_id == "profile 7");
  for (size_t k = 0; k < 2; ++k) CHECK(back.records[k].vectors == f.records[k].vectors);
  CHECK(SerializeEmbeddingFile(back) == text);
}

TEST_CASE("embedding file: malformed input and dimension checks") {
  CHECK_THROWS_AS(ParseEmbeddingFile(""), Error);
  CHECK_THROWS_AS(ParseEmbeddingFile("ipod-emb v2 3 x\n"), Error);
  CHECK_THROWS_AS(ParseEmbeddingFile("ipod-emb v1 2 x\nt\t1\n1 2 3\n"), Error);
  CHECK_THROWS_AS(ParseEmbeddingFile("ipod-emb v1 2 x\nt\t2\n1 2\n"), Error);
  CHECK_THROWS_AS(ParseEmbeddingFile("ipod-emb v1 2 x\nt\t1\n1 zz\n"), Error);
  CHECK(ParseEmbeddingFile("ipod-emb v1 2 x\r\nt\t1\r\n1 2\r\n").records.size() == 1);
  EmbeddingFile f;
  f.dim = 2;
  CHECK_THROWS_AS(f.Add("x", Eigen::MatrixXd::Zero(1, 3)), Error);
  CHECK_THROWS_AS(f.Add("x", Eigen::MatrixXd::Zero(0, 2)), Error);
}

TEST_CASE("nearest titles: self match, k, ties and mismatch") {
  EmbeddingFile f;
  f.dim = 2;
  f.Add("a", (Eigen::MatrixXd(2, 2) << 1, 0, 1, 2).finished());
  f.Add("b", (Eigen::MatrixXd(1, 2) << 0, 1).finished());
  f.Add("c", (Eigen::MatrixXd(1, 2) << 0, 3).finished());
  std::vector<Neighbor> r = NearestTitles(f, MeanPool(f.records[0].vectors), 10);
  REQUIRE(r.size() == 3);
  CHECK(r[0].title_id == "a");
  CHECK(r[0].similarity == doctest::Approx(1.0));
  // b and c are parallel: equal similarity, insertion order kept.
  CHECK(r[1].title_id == "b");
  CHECK(r[2].title_id == "c");
  CHECK(NearestTitles(f, Eigen::Vector2d(0, 1), 1).front().title_id == "b");
  CHECK(NearestTitles(f, Eigen::Vector2d(0, 0), 3).front().similarity == 0.0);
  CHECK_THROWS_AS(NearestTitles(f, Eigen::Vector3d(1, 0, 0), 1), Error);
  CHECK_THROWS_AS(NearestTitles(EmbeddingFile{}, Eigen::VectorXd(), 1), Error);
}

TEST_CASE("nearest titles: retrieval on a synthetic corpus") {
  Corpus corpus = SynthCorpus(DefaultGazetteer(), 42, 2000);
  Titles titles;
  for (const Title &t : corpus.titles) titles.push_back(t.tokens);
  TrainConfig cfg = TinyConfig();
  cfg.batch_size = 32;
  cfg.epochs = 3;
  BiLmModel m = TrainBiLm(titles, {16, 16, 1}, cfg);
  REQUIRE(m.vocab.Contains("project"));
  REQUIRE(m.vocab.Contains("pacific"));
  EmbeddingFile store;
  store.dim = m.context_dim();
  store.hash = m.ContentHash();
  for (const char *t : {"asia pacific", "project manager"}) {
    store.Add(t, EmbedTitle(m, SplitWhitespace(t)));
  }
  std::vector<Neighbor> r =
      NearestTitles(store, MeanPool(EmbedTitle(m, SplitWhitespace("senior project manager"))), 2);
  CHECK(r[0].title_id == "project manager");
  CHECK(r[0].similarity > r[1].similarity);
}
