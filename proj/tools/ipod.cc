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

// ipod: command line front end for the job-title NER pipeline.
//
// Exit codes: 0 success, 2 usage error, 3 I/O error, 4 malformed input,
// 5 training diverged, 6 invalid argument or other failure.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ipod/common.h"
#include "ipod/corpus.h"
#include "ipod/crf.h"
#include "ipod/eval.h"
#include "ipod/gazetteer.h"
#include "ipod/labeling.h"
#include "ipod/model_io.h"
#include "ipod/neural.h"
#include "ipod/synth.h"
#include "ipod/title2vec.h"
#include "ipod/train_config.h"

namespace ipod {
namespace {

enum ExitCode { kOk = 0, kUsage = 2, kIoFailure = 3, kBadFormat = 4, kDiverged = 5, kOther = 6 };

int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kIo:
      return kIoFailure;
    case ErrorKind::kFormat:
      return kBadFormat;
    case ErrorKind::kDivergence:
      return kDiverged;
    case ErrorKind::kInvalidArgument:
      break;
  }
  return kOther;
}

// Writes to `path`, or stdout when it is empty or "-".
void Emit(const std::string &path, const std::string &text) {
  if (path.empty() || path == "-") {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return;
  }
  WriteFile(path, text);
}

void PrintSeed(uint64_t seed) { std::cerr << "seed=" << seed << "\n"; }

CorpusFormat ParseCorpusFormat(const std::string &s) {
  return s == "tsv" ? CorpusFormat::kTsv : CorpusFormat::kLines;
}

Corpus ReadCorpus(const std::string &path, const std::string &format) {
  Corpus c = LoadCorpus(path, ParseCorpusFormat(format));
  for (const std::string &d : c.diagnostics) std::cerr << path << ": " << d << "\n";
  return c;
}

// "builtin" or a gazetteer TSV path.
std::shared_ptr<const Gazetteer> ReadGazetteer(const std::string &spec) {
  if (spec.empty()) return nullptr;
  if (spec == "builtin") return std::make_shared<const Gazetteer>(DefaultGazetteer());
  return std::make_shared<const Gazetteer>(LoadGazetteer(spec));
}

std::string Num(double v, const char *fmt = "%.4f") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

// Titles for tagging or prediction, from CoNLL (labels ignored) or a corpus.
std::vector<std::vector<std::string>> ReadTitles(const std::string &path,
                                                 const std::string &format) {
  std::vector<std::vector<std::string>> out;
  if (format == "conll") {
    for (LabeledSequence &ex : LoadConll(path)) out.push_back(std::move(ex.tokens));
    return out;
  }
  for (Title &t : ReadCorpus(path, format).titles) out.push_back(std::move(t.tokens));
  return out;
}

// Hyperparameter flags. Unset ones keep the model's defaults.
struct HyperFlags {
  std::optional<double> lr;
  std::optional<int> batch_size;
  std::optional<int> epochs;
  std::optional<std::string> optimizer;
  std::optional<int> layers;
  std::optional<int> hidden;
  std::optional<int> dim;
  std::optional<double> word_dropout;
  std::optional<double> var_dropout;
  std::optional<double> clip_norm;
  uint64_t seed = 0;

  void Register(CLI::App *cmd, bool require_seed = true) {
    cmd->add_option("--lr", lr, "Learning rate");
    cmd->add_option("--batch-size", batch_size, "Mini-batch size");
    cmd->add_option("--epochs", epochs, "Training epochs");
    cmd->add_option("--optimizer", optimizer, "sgd or adam")
        ->check(CLI::IsMember({"sgd", "adam"}));
    cmd->add_option("--layers", layers, "LSTM layers");
    cmd->add_option("--hidden", hidden, "LSTM state size");
    cmd->add_option("--dim", dim, "Embedding dimension");
    cmd->add_option("--word-dropout", word_dropout, "Word dropout probability");
    cmd->add_option("--var-dropout", var_dropout, "Recurrent (variational) dropout probability");
    cmd->add_option("--clip-norm", clip_norm, "Global gradient-norm clip, <= 0 disables");
    auto *s = cmd->add_option("--seed", seed, "Random seed");
    if (require_seed) s->required();
  }

  TrainConfig Apply(TrainConfig cfg) const {
    if (lr) cfg.learning_rate = *lr;
    if (batch_size) cfg.batch_size = *batch_size;
    if (epochs) cfg.epochs = *epochs;
    if (optimizer) cfg.optimizer = *ParseOptimizer(*optimizer);
    if (layers) cfg.layers = *layers;
    if (hidden) cfg.hidden_size = *hidden;
    if (dim) cfg.embedding_dim = *dim;
    if (word_dropout) cfg.word_dropout = *word_dropout;
    if (var_dropout) cfg.variational_dropout = *var_dropout;
    if (clip_norm) cfg.clip_norm = *clip_norm;
    cfg.seed = seed;
    cfg.Validate();
    return cfg;
  }
};

TrainConfig DefaultsFor(const std::string &model) {
  if (model == "crf" || model == "logreg") return TrainConfig::CrfDefaults();
  if (model == "bilm") {
    TrainConfig cfg;
    cfg.hidden_size = 128;
    return cfg;
  }
  return TrainConfig::LstmCrfDefaults();
}

std::shared_ptr<const BiLmModel> ReadBiLm(const std::string &path) {
  if (path.empty()) return nullptr;
  return std::make_shared<const BiLmModel>(LoadBiLm(path));
}

// A loaded tagger of any kind.
struct AnyTagger {
  std::optional<CrfModel> crf;
  std::optional<LstmCrfModel> lstm;

  std::vector<BioesLabel> operator()(std::span<const std::string> tokens) const {
    return crf ? ViterbiDecode(*crf, tokens) : Predict(*lstm, tokens);
  }
};

AnyTagger LoadTagger(const std::string &path, const std::string &embeddings) {
  const std::string kind = PeekModelKind(path);
  AnyTagger t;
  if (kind == "crf" || kind == "logreg") {
    t.crf = LoadCrfModel(path);
  } else if (kind == "lstm-crf" || kind == "lstm") {
    t.lstm = LoadLstmCrf(path, ReadBiLm(embeddings));
  } else {
    throw Error(ErrorKind::kFormat, path + ": not a tagger model (kind '" + kind + "')");
  }
  return t;
}

Tagger TrainTagger(const std::string &model, std::span<const LabeledSequence> data,
                   const TrainConfig &cfg, std::shared_ptr<const Gazetteer> gazetteer,
                   std::shared_ptr<const BiLmModel> bilm, TrainLog *log) {
  if (model == "crf" || model == "logreg") {
    auto m = std::make_shared<CrfModel>(model == "crf" ? TrainCrf(data, cfg, gazetteer, log)
                                                       : TrainLogReg(data, cfg, gazetteer, log));
    return [m](std::span<const std::string> t) { return ViterbiDecode(*m, t); };
  }
  auto m = std::make_shared<LstmCrfModel>(model == "lstm-crf"
                                              ? TrainLstmCrf(data, cfg, bilm, log)
                                              : TrainLstmSoftmax(data, cfg, bilm, log));
  return [m](std::span<const std::string> t) { return Predict(*m, t); };
}

std::string StatsText(const Corpus &c, const std::string &format) {
  LengthStats stats = ComputeLengthStats(c);
  LengthHistogram hist = ComputeLengthHistogram(c);
  std::vector<std::pair<std::string, const LengthSummary *>> rows = {{"ALL", &stats.overall}};
  for (const auto &[region, s] : stats.by_region) rows.emplace_back(std::string(RegionName(region)), &s);
  std::string out;
  if (format == "kv") {
    out += "titles=" + std::to_string(c.size()) + "\n";
    out += "excluded_empty=" + std::to_string(c.excluded_empty) + "\n";
    for (const auto &[name, s] : rows) {
      const std::string p = "length." + name + ".";
      out += p + "count=" + std::to_string(s->count) + "\n";
      out += p + "min=" + std::to_string(s->min) + "\n";
      out += p + "max=" + std::to_string(s->max) + "\n";
      out += p + "avg=" + Num(s->avg) + "\n";
      out += p + "median=" + std::to_string(s->median) + "\n";
    }
    for (const auto &[len, pct] : hist.all) {
      out += "histogram.ALL." + std::to_string(len) + "=" + Num(pct) + "\n";
    }
    for (const auto &[region, h] : hist.by_region) {
      for (const auto &[len, pct] : h) {
        out += "histogram." + std::string(RegionName(region)) + "." + std::to_string(len) + "=" +
               Num(pct) + "\n";
      }
    }
    return out;
  }
  if (format == "tsv") {
    out = "region\tcount\tmin\tmax\tavg\tmedian\n";
    for (const auto &[name, s] : rows) {
      out += name + "\t" + std::to_string(s->count) + "\t" + std::to_string(s->min) + "\t" +
             std::to_string(s->max) + "\t" + Num(s->avg) + "\t" + std::to_string(s->median) + "\n";
    }
    return out;
  }
  out = "titles: " + std::to_string(c.size()) + " (" + std::to_string(c.excluded_empty) +
        " empty excluded)\n\n";
  out += "region      count   min   max     avg  median\n";
  for (const auto &[name, s] : rows) {
    char line[128];
    std::snprintf(line, sizeof(line), "%-8s %8zu %5zu %5zu %7.2f %7zu\n", name.c_str(), s->count,
                  s->min, s->max, s->avg, s->median);
    out += line;
  }
  out += "\nlength  share(%)  cumulative(%)\n";
  for (const auto &[len, pct] : hist.all) {
    char line[128];
    std::snprintf(line, sizeof(line), "%6zu %9.2f %14.2f\n", len, pct, CumulativeShare(hist.all, len));
    out += line;
  }
  return out;
}

std::string NgramsText(const NgramTable &table, size_t top, const std::string &format) {
  std::string out;
  const size_t n = std::min(top, table.entries.size());
  if (format == "text") {
    for (size_t i = 0; i < n; ++i) {
      char line[32];
      std::snprintf(line, sizeof(line), "%8llu  ",
                    static_cast<unsigned long long>(table.entries[i].second));
      out += line + Join(table.entries[i].first, " ") + "\n";
    }
    return out;
  }
  const char sep = format == "kv" ? '=' : '\t';
  if (format == "tsv") out = "ngram\tcount\n";
  for (size_t i = 0; i < n; ++i) {
    out += Join(table.entries[i].first, " ") + sep + std::to_string(table.entries[i].second) + "\n";
  }
  return out;
}

std::string IrrText(const IrrReport &r, const std::string &format) {
  if (format == "kv") return IrrReportToKv(r);
  std::string out;
  out += "tokens:                " + std::to_string(r.total()) + "\n";
  out += "unanimous:             " + std::to_string(r.unanimous_count) + " (" +
         Num(100.0 * static_cast<double>(r.unanimous_count) / static_cast<double>(r.total()), "%.1f") +
         "%)\n";
  out += "two-way majority:      " + std::to_string(r.majority_count) + "\n";
  out += "no agreement:          " + std::to_string(r.disagreement_count) + "\n";
  out += "percentage agreement:  " + Num(r.percentage_agreement) + "\n";
  out += "Cohen's kappa (mean):  " + Num(r.cohens_kappa) + "\n";
  return out;
}

std::string MetricsText(const MetricsReport &r, const std::string &format, const std::string &name) {
  if (format == "kv") return MetricsToKv(r);
  std::vector<NamedReport> one = {{name, r}};
  if (format == "tsv") return CompareTsv(one);
  return CompareText(one) + "\nEM (title level): " + Num(r.em_title, "%.2f") + "\n";
}

}  // namespace
}  // namespace ipod

int main(int argc, char **argv) {
  using namespace ipod;
  CLI::App app{"Occupational named entity recognition over job titles."};
  app.footer(
      "Exit codes: 0 ok, 2 usage, 3 I/O error, 4 malformed input, 5 training diverged,\n"
      "6 invalid argument. Flags may also come from `ipod --config FILE <command>`\n"
      "(key=value lines under [command] sections); command line flags win.");
  app.set_config("--config", "", "Read flags from a key=value file");
  app.require_subcommand(1);

  std::string in, out, format = "text", input_format = "lines";
  auto add_io = [&](CLI::App *cmd, bool need_in = true) {
    auto *o = cmd->add_option("--in", in, "Input file");
    if (need_in) o->required();
    cmd->add_option("--out", out, "Output file (stdout when omitted)");
  };
  auto add_format = [&](CLI::App *cmd) {
    cmd->add_option("--format", format, "text, kv or tsv")
        ->check(CLI::IsMember({"text", "kv", "tsv"}));
  };
  auto add_input_format = [&](CLI::App *cmd, std::vector<std::string> allowed) {
    cmd->add_option("--input-format", input_format, "Input layout")
        ->check(CLI::IsMember(allowed));
  };

  // normalize
  auto *normalize = app.add_subcommand("normalize", "Normalize raw job titles");
  add_io(normalize);
  add_input_format(normalize, {"lines", "tsv"});
  normalize->callback([&] {
    Corpus c = ReadCorpus(in, input_format);
    if (c.excluded_empty > 0) std::cerr << "excluded_empty=" << c.excluded_empty << "\n";
    Emit(out, SerializeCorpus(c, ParseCorpusFormat(input_format)));
  });

  // stats
  auto *stats = app.add_subcommand("stats", "Title length statistics");
  add_io(stats);
  add_format(stats);
  add_input_format(stats, {"lines", "tsv"});
  stats->callback([&] { Emit(out, StatsText(ReadCorpus(in, input_format), format)); });

  // ngrams
  size_t ngram_n = 1, top = 20;
  auto *ngrams = app.add_subcommand("ngrams", "Most frequent n-grams");
  add_io(ngrams);
  add_format(ngrams);
  add_input_format(ngrams, {"lines", "tsv"});
  ngrams->add_option("-n", ngram_n, "N-gram order")->capture_default_str();
  ngrams->add_option("--top", top, "Rows to print")->capture_default_str();
  ngrams->callback([&] {
    Emit(out, NgramsText(CountNgrams(ReadCorpus(in, input_format), ngram_n), top, format));
  });

  // gazetteer
  auto *gaz = app.add_subcommand("gazetteer", "Build and inspect gazetteers");
  gaz->require_subcommand(1);
  std::vector<std::string> annotations;
  auto *gaz_build = gaz->add_subcommand("build", "Majority-vote three annotation files");
  gaz_build->add_option("--annotations", annotations, "Three token<TAB>tag files")
      ->required()
      ->expected(3);
  gaz_build->add_option("--out", out, "Gazetteer TSV");
  gaz_build->callback([&] {
    std::array<AnnotationSet, 3> sets = {LoadAnnotationSet(annotations[0]),
                                         LoadAnnotationSet(annotations[1]),
                                         LoadAnnotationSet(annotations[2])};
    MergeResult merged = MergeAnnotations(sets);
    for (const std::string &t : merged.rejected) std::cerr << "rejected (no majority): " << t << "\n";
    Emit(out, SerializeGazetteer(merged.gazetteer));
  });
  auto *gaz_irr = gaz->add_subcommand("irr", "Inter-rater reliability of three annotation files");
  gaz_irr->add_option("--annotations", annotations, "Three token<TAB>tag files")
      ->required()
      ->expected(3);
  gaz_irr->add_option("--out", out, "Output file");
  add_format(gaz_irr);
  gaz_irr->callback([&] {
    std::array<AnnotationSet, 3> sets = {LoadAnnotationSet(annotations[0]),
                                         LoadAnnotationSet(annotations[1]),
                                         LoadAnnotationSet(annotations[2])};
    Emit(out, IrrText(ComputeIrr(sets), format));
  });
  size_t top_k = 1000;
  auto *gaz_top = gaz->add_subcommand("top", "Most frequent unigrams, for annotation");
  add_io(gaz_top);
  add_input_format(gaz_top, {"lines", "tsv"});
  gaz_top->add_option("-k", top_k, "How many")->capture_default_str();
  gaz_top->callback([&] {
    TopUnigrams tu = ComputeTopUnigrams(ReadCorpus(in, input_format), top_k);
    if (tu.warning) std::cerr << "warning: " << *tu.warning << "\n";
    Emit(out, Join(tu.tokens, "\n") + (tu.tokens.empty() ? "" : "\n"));
  });
  auto *gaz_builtin = gaz->add_subcommand("builtin", "Write the built-in gazetteer");
  gaz_builtin->add_option("--out", out, "Gazetteer TSV");
  gaz_builtin->callback([&] { Emit(out, SerializeGazetteer(DefaultGazetteer())); });

  // tag
  std::string gazetteer_spec;
  auto *tag = app.add_subcommand("tag", "Label titles by gazetteer lookup (CoNLL out)");
  add_io(tag);
  add_input_format(tag, {"lines", "tsv"});
  tag->add_option("--gazetteer", gazetteer_spec, "Gazetteer TSV, or 'builtin'")
      ->default_val("builtin");
  tag->callback([&] {
    auto g = ReadGazetteer(gazetteer_spec);
    std::vector<LabeledSequence> data;
    for (const Title &t : ReadCorpus(in, input_format).titles) data.push_back(AutoTag(t, *g));
    Emit(out, SerializeConll(data));
  });

  // split
  uint64_t seed = 0;
  std::string train_path, dev_path, test_path;
  double train_frac = 0.8, dev_frac = 0.1;
  auto *split = app.add_subcommand("split", "Seeded train/dev/test split of a CoNLL file");
  split->add_option("--in", in, "CoNLL input")->required();
  split->add_option("--seed", seed, "Random seed")->required();
  split->add_option("--train", train_path, "Training output")->required();
  split->add_option("--dev", dev_path, "Dev output")->required();
  split->add_option("--test", test_path, "Test output")->required();
  split->add_option("--train-frac", train_frac, "Training share")->capture_default_str();
  split->add_option("--dev-frac", dev_frac, "Dev share")->capture_default_str();
  split->callback([&] {
    PrintSeed(seed);
    DataSplit s = SplitData(LoadConll(in), seed, train_frac, dev_frac);
    SaveConll(train_path, s.train);
    SaveConll(dev_path, s.dev);
    SaveConll(test_path, s.test);
    std::cerr << "train=" << s.train.size() << " dev=" << s.dev.size()
              << " test=" << s.test.size() << "\n";
  });

  // train
  std::string model_kind, embeddings;
  HyperFlags hyper;
  int min_count = 1;
  auto *train = app.add_subcommand("train", "Train a tagger or a biLM");
  train->add_option("model", model_kind, "crf, logreg, lstm, lstm-crf or bilm")
      ->required()
      ->check(CLI::IsMember({"crf", "logreg", "lstm", "lstm-crf", "bilm"}));
  train->add_option("--in", in, "Training CoNLL (bilm: corpus or CoNLL)")->required();
  train->add_option("--out", out, "Model file")->required();
  add_input_format(train, {"conll", "lines", "tsv"});
  train->add_option("--gazetteer", gazetteer_spec,
                    "crf/logreg: gazetteer features from a TSV or 'builtin'");
  train->add_option("--embeddings", embeddings, "lstm/lstm-crf: frozen biLM model as input");
  train->add_option("--min-count", min_count, "bilm: vocabulary cutoff")->capture_default_str();
  hyper.Register(train);
  train->callback([&] {
    PrintSeed(hyper.seed);
    TrainConfig cfg = hyper.Apply(DefaultsFor(model_kind));
    if (model_kind == "bilm") {
      const std::string fmt = train->count("--input-format") ? input_format : "conll";
      BiLmDims dims{cfg.embedding_dim, cfg.hidden_size, cfg.layers};
      BiLmLog log;
      BiLmModel m = TrainBiLm(ReadTitles(in, fmt), dims, cfg, min_count, &log);
      for (size_t e = 0; e < log.perplexity.size(); ++e) {
        std::cerr << "epoch " << e + 1 << " loss=" << Num(log.epoch_loss[e])
                  << " perplexity=" << Num(log.perplexity[e]) << "\n";
      }
      SaveBiLm(out, m);
      std::cerr << "hash=" << m.ContentHash() << "\n";
      return;
    }
    std::vector<LabeledSequence> data = LoadConll(in);
    TrainLog log;
    if (model_kind == "crf" || model_kind == "logreg") {
      auto g = ReadGazetteer(gazetteer_spec);
      CrfModel m = model_kind == "crf" ? TrainCrf(data, cfg, g, &log) : TrainLogReg(data, cfg, g, &log);
      SaveCrfModel(out, m);
    } else {
      auto bilm = ReadBiLm(embeddings);
      LstmCrfModel m = model_kind == "lstm-crf" ? TrainLstmCrf(data, cfg, bilm, &log)
                                                : TrainLstmSoftmax(data, cfg, bilm, &log);
      SaveLstmCrf(out, m);
    }
    for (size_t e = 0; e < log.epoch_loss.size(); ++e) {
      std::cerr << "epoch " << e + 1 << " loss=" << Num(log.epoch_loss[e]) << "\n";
    }
  });

  // predict
  std::string model_path;
  auto *predict = app.add_subcommand("predict", "Tag titles with a trained model (CoNLL out)");
  add_io(predict);
  predict->add_option("--model", model_path, "Model file")->required();
  predict->add_option("--embeddings", embeddings, "biLM model the tagger was trained on");
  add_input_format(predict, {"conll", "lines", "tsv"});
  predict->callback([&] {
    AnyTagger tagger = LoadTagger(model_path, embeddings);
    const std::string fmt = predict->count("--input-format") ? input_format : "conll";
    std::vector<LabeledSequence> pred;
    for (auto &tokens : ReadTitles(in, fmt)) {
      std::vector<BioesLabel> labels = tagger(tokens);
      pred.push_back({std::move(tokens), std::move(labels)});
    }
    Emit(out, SerializeConll(pred));
  });

  // eval
  std::string gold_path, name = "model";
  std::vector<std::string> pred_paths;
  auto *eval = app.add_subcommand(
      "eval", "Score predictions; two --pred files give the mean of both (human protocol)");
  eval->add_option("--gold", gold_path, "Reference CoNLL")->required();
  eval->add_option("--pred", pred_paths, "Predicted CoNLL (one or two)")
      ->required()
      ->expected(1, 2);
  eval->add_option("--name", name, "Row label in text/tsv output");
  eval->add_option("--out", out, "Output file");
  add_format(eval);
  eval->callback([&] {
    std::vector<LabeledSequence> gold = LoadConll(gold_path);
    std::vector<LabeledSequence> a = LoadConll(pred_paths[0]);
    MetricsReport r = pred_paths.size() == 2 ? HumanBaseline(gold, a, LoadConll(pred_paths[1]))
                                             : Score(gold, a);
    Emit(out, MetricsText(r, format, name));
  });

  // embed
  auto *embed = app.add_subcommand("embed", "Contextual token vectors for every title");
  add_io(embed);
  add_input_format(embed, {"lines", "tsv"});
  embed->add_option("--model", model_path, "biLM model")->required();
  embed->callback([&] {
    BiLmModel m = LoadBiLm(model_path);
    EmbeddingFile f;
    f.dim = m.context_dim();
    f.hash = m.ContentHash();
    Corpus c = ReadCorpus(in, input_format);
    for (size_t i = 0; i < c.size(); ++i) {
      f.Add(CanonicalForm(c.titles[i]), EmbedTitle(m, c.titles[i].tokens));
    }
    Emit(out, SerializeEmbeddingFile(f));
  });

  // nearest
  std::string store_path, query;
  size_t k = 5;
  auto *nearest = app.add_subcommand("nearest", "Titles closest to a query title");
  nearest->add_option("--store", store_path, "Embedding file")->required();
  nearest->add_option("--model", model_path, "biLM that produced the store")->required();
  nearest->add_option("--query", query, "Raw query title")->required();
  nearest->add_option("-k", k, "How many")->capture_default_str();
  nearest->add_option("--out", out, "Output file");
  add_format(nearest);
  nearest->callback([&] {
    BiLmModel m = LoadBiLm(model_path);
    EmbeddingFile store = LoadEmbeddingFile(store_path);
    if (store.hash != "-" && store.hash != m.ContentHash()) {
      throw Error(ErrorKind::kInvalidArgument, "store hash " + store.hash +
                                                   " does not match model hash " + m.ContentHash());
    }
    Title q = NormalizeTitle(query);
    if (q.empty()) throw Error(ErrorKind::kInvalidArgument, "query normalizes to nothing");
    std::string text = format == "tsv" ? "rank\ttitle\tcosine\n" : "";
    int rank = 0;
    for (const Neighbor &n : NearestTitles(store, MeanPool(EmbedTitle(m, q.tokens)), k)) {
      ++rank;
      if (format == "text") {
        text += std::to_string(rank) + ". " + n.title_id + "  (" + Num(n.similarity) + ")\n";
      } else if (format == "kv") {
        text += std::to_string(rank) + "=" + n.title_id + "\t" + Num(n.similarity) + "\n";
      } else {
        text += std::to_string(rank) + "\t" + n.title_id + "\t" + Num(n.similarity) + "\n";
      }
    }
    Emit(out, text);
  });

  // gridsearch
  std::vector<double> lrs;
  std::vector<int> layer_axis, hidden_axis, batch_axis;
  std::vector<std::string> optimizer_axis;
  int grid_epochs = 10;
  bool timings = false;
  HyperFlags grid_base;
  auto *grid = app.add_subcommand("gridsearch", "Hyperparameter grid search on a dev split");
  grid->add_option("model", model_kind, "crf, logreg, lstm or lstm-crf")
      ->required()
      ->check(CLI::IsMember({"crf", "logreg", "lstm", "lstm-crf"}));
  grid->add_option("--train", train_path, "Training CoNLL")->required();
  grid->add_option("--dev", dev_path, "Validation CoNLL")->required();
  grid->add_option("--out", out, "Result TSV");
  grid->add_option("--grid-epochs", grid_epochs, "Epochs per configuration")->capture_default_str();
  grid->add_option("--lrs", lrs, "Learning-rate axis");
  grid->add_option("--layer-axis", layer_axis, "Layer axis");
  grid->add_option("--hidden-axis", hidden_axis, "State-size axis");
  grid->add_option("--batch-axis", batch_axis, "Batch-size axis");
  grid->add_option("--optimizer-axis", optimizer_axis, "Optimizer axis")
      ->check(CLI::IsMember({"sgd", "adam"}));
  grid->add_option("--gazetteer", gazetteer_spec, "crf/logreg gazetteer features");
  grid->add_flag("--timings", timings, "Add a wall-time column (not reproducible)");
  grid_base.Register(grid);
  grid->callback([&] {
    PrintSeed(grid_base.seed);
    const bool lstm = model_kind == "lstm" || model_kind == "lstm-crf";
    SearchSpace space;
    if (lrs.empty() && layer_axis.empty() && hidden_axis.empty() && batch_axis.empty() &&
        optimizer_axis.empty()) {
      if (lstm) {
        space = SearchSpace::LstmCrfSpace();
      } else {
        space.learning_rates = {0.1, 0.01};
        space.batch_sizes = {32, 128};
        space.optimizers = {OptimizerKind::kAdam, OptimizerKind::kSgd};
      }
    } else {
      space.learning_rates = lrs;
      space.layers = layer_axis;
      space.hidden_sizes = hidden_axis;
      space.batch_sizes = batch_axis;
      for (const std::string &o : optimizer_axis) space.optimizers.push_back(*ParseOptimizer(o));
    }
    TrainConfig base = grid_base.Apply(DefaultsFor(model_kind));
    auto g = ReadGazetteer(gazetteer_spec);
    Trainer trainer = [&](std::span<const LabeledSequence> d, const TrainConfig &cfg) {
      return TrainTagger(model_kind, d, cfg, g, nullptr, nullptr);
    };
    std::vector<LabeledSequence> tr = LoadConll(train_path);
    std::vector<LabeledSequence> dv = LoadConll(dev_path);
    GridSearchResult r = GridSearch(trainer, space, base, tr, dv, grid_epochs);
    Emit(out, GridSearchTsv(r, timings));
  });

  // compare
  std::vector<std::string> entries;
  auto *compare = app.add_subcommand("compare", "Side-by-side table of metrics files");
  compare->add_option("reports", entries, "NAME=metrics.kv ...")->required();
  compare->add_option("--out", out, "Output file");
  add_format(compare);
  compare->callback([&] {
    std::vector<NamedReport> reports;
    for (const std::string &e : entries) {
      const size_t eq = e.find('=');
      if (eq == std::string::npos || eq == 0) {
        throw Error(ErrorKind::kInvalidArgument, "expected NAME=FILE, got '" + e + "'");
      }
      reports.push_back({e.substr(0, eq), ParseMetricsKv(ReadFile(e.substr(eq + 1)))});
    }
    Emit(out, format == "tsv" ? CompareTsv(reports) : CompareText(reports));
  });

  // synth
  size_t count = 5000;
  auto *synth = app.add_subcommand("synth", "Synthetic title corpus (TSV) from a gazetteer");
  synth->add_option("--seed", seed, "Random seed")->required();
  synth->add_option("--count", count, "Titles")->capture_default_str();
  synth->add_option("--gazetteer", gazetteer_spec, "Gazetteer TSV, or 'builtin'")
      ->default_val("builtin");
  synth->add_option("--out", out, "Output file");
  synth->callback([&] {
    PrintSeed(seed);
    Emit(out, SerializeCorpus(SynthCorpus(*ReadGazetteer(gazetteer_spec), seed, count),
                              CorpusFormat::kTsv));
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  } catch (const Error &e) {
    std::cerr << "ipod: " << e.what() << "\n";
    return ExitCodeFor(e.kind());
  } catch (const std::exception &e) {
    std::cerr << "ipod: " << e.what() << "\n";
    return kOther;
  }
  return kOk;
}
