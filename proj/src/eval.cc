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

#include "ipod/eval.h"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <map>

#include "ipod/common.h"

namespace ipod {

namespace {

double Pct(uint64_t num, uint64_t den) {
  return den == 0 ? 100.0 : 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

TagMetrics FromCounts(const Counts &c) {
  TagMetrics m;
  m.counts = c;
  if (c.tp + c.fp + c.fn == 0) {
    m.precision = m.recall = m.em = m.f1 = 100.0;
    return m;
  }
  m.precision = c.tp + c.fp == 0 ? 0.0 : Pct(c.tp, c.tp + c.fp);
  m.recall = c.tp + c.fn == 0 ? 0.0 : Pct(c.tp, c.tp + c.fn);
  m.em = Pct(c.tp, c.tp + c.fp + c.fn);
  m.f1 = F1Score(m.precision, m.recall);
  return m;
}

size_t TagSlot(CoarseTag t) {
  for (size_t i = 0; i < kEntityTagsReportOrder.size(); ++i) {
    if (kEntityTagsReportOrder[i] == t) return i;
  }
  throw Error(ErrorKind::kInvalidArgument, "O has no per-tag metrics");
}

std::string Fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::string Fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

double F1Score(double precision, double recall) {
  return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

const TagMetrics &MetricsReport::tag(CoarseTag t) const { return per_tag[TagSlot(t)]; }

MetricsReport Score(std::span<const LabeledSequence> gold,
                    std::span<const LabeledSequence> pred) {
  if (gold.size() != pred.size()) {
    throw Error(ErrorKind::kInvalidArgument,
                "gold has " + std::to_string(gold.size()) + " titles, prediction has " +
                    std::to_string(pred.size()));
  }
  MetricsReport r;
  std::array<Counts, 3> tag_counts{};
  uint64_t exact_tokens = 0;
  uint64_t exact_titles = 0;
  for (size_t k = 0; k < gold.size(); ++k) {
    const LabeledSequence &g = gold[k];
    const LabeledSequence &p = pred[k];
    if (g.tokens != p.tokens || g.labels.size() != g.tokens.size() ||
        p.labels.size() != p.tokens.size()) {
      throw Error(ErrorKind::kInvalidArgument,
                  "title " + std::to_string(k + 1) + " is not aligned between gold and prediction");
    }
    bool all = true;
    for (size_t i = 0; i < g.size(); ++i) {
      const BioesLabel &gl = g.labels[i];
      const BioesLabel &pl = p.labels[i];
      const bool match = gl == pl;
      exact_tokens += match;
      all = all && match;
      if (!pl.is_o()) {
        Counts &c = tag_counts[TagSlot(pl.tag)];
        (match ? c.tp : c.fp) += 1;
        (match ? r.counts.tp : r.counts.fp) += 1;
      }
      if (!gl.is_o() && !match) {
        tag_counts[TagSlot(gl.tag)].fn += 1;
        r.counts.fn += 1;
      }
    }
    exact_titles += all;
    r.tokens += g.size();
  }
  r.titles = gold.size();
  TagMetrics overall = FromCounts(r.counts);
  r.precision = overall.precision;
  r.recall = overall.recall;
  r.f1 = overall.f1;
  r.em_positive = overall.em;
  r.em_token = Pct(exact_tokens, r.tokens);
  r.em_title = Pct(exact_titles, r.titles);
  for (size_t i = 0; i < 3; ++i) r.per_tag[i] = FromCounts(tag_counts[i]);
  return r;
}

MetricsReport MeanReport(std::span<const MetricsReport> reports) {
  if (reports.empty()) throw Error(ErrorKind::kInvalidArgument, "no reports to average");
  MetricsReport m;
  const double n = static_cast<double>(reports.size());
  auto add = [](Counts &a, const Counts &b) {
    a.tp += b.tp;
    a.fp += b.fp;
    a.fn += b.fn;
  };
  for (const MetricsReport &r : reports) {
    m.precision += r.precision / n;
    m.recall += r.recall / n;
    m.f1 += r.f1 / n;
    m.em_token += r.em_token / n;
    m.em_title += r.em_title / n;
    m.em_positive += r.em_positive / n;
    add(m.counts, r.counts);
    m.tokens += r.tokens;
    m.titles += r.titles;
    for (size_t i = 0; i < 3; ++i) {
      m.per_tag[i].precision += r.per_tag[i].precision / n;
      m.per_tag[i].recall += r.per_tag[i].recall / n;
      m.per_tag[i].em += r.per_tag[i].em / n;
      m.per_tag[i].f1 += r.per_tag[i].f1 / n;
      add(m.per_tag[i].counts, r.per_tag[i].counts);
    }
  }
  return m;
}

MetricsReport HumanBaseline(std::span<const LabeledSequence> a1,
                            std::span<const LabeledSequence> a2,
                            std::span<const LabeledSequence> a3) {
  const MetricsReport pair[] = {Score(a1, a2), Score(a1, a3)};
  return MeanReport(pair);
}

std::string MetricsToKv(const MetricsReport &r) {
  std::string out;
  auto kv = [&out](const std::string &k, const std::string &v) { out += k + "=" + v + "\n"; };
  kv("precision", Fmt(r.precision));
  kv("recall", Fmt(r.recall));
  kv("em_token", Fmt(r.em_token));
  kv("em_title", Fmt(r.em_title));
  kv("em_positive", Fmt(r.em_positive));
  kv("f1", Fmt(r.f1));
  kv("tp", std::to_string(r.counts.tp));
  kv("fp", std::to_string(r.counts.fp));
  kv("fn", std::to_string(r.counts.fn));
  kv("tokens", std::to_string(r.tokens));
  kv("titles", std::to_string(r.titles));
  for (size_t i = 0; i < 3; ++i) {
    const std::string p = "per_tag." + std::string(CoarseTagName(kEntityTagsReportOrder[i])) + ".";
    const TagMetrics &t = r.per_tag[i];
    kv(p + "precision", Fmt(t.precision));
    kv(p + "recall", Fmt(t.recall));
    kv(p + "em", Fmt(t.em));
    kv(p + "f1", Fmt(t.f1));
    kv(p + "tp", std::to_string(t.counts.tp));
    kv(p + "fp", std::to_string(t.counts.fp));
    kv(p + "fn", std::to_string(t.counts.fn));
  }
  return out;
}

MetricsReport ParseMetricsKv(std::string_view text) {
  std::map<std::string, std::string> kv;
  size_t line_no = 0;
  for (std::string line : SplitFields(text, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::kFormat,
                  "metrics line " + std::to_string(line_no) + ": expected key=value");
    }
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto get = [&kv](const std::string &k) -> const std::string & {
    auto it = kv.find(k);
    if (it == kv.end()) throw Error(ErrorKind::kFormat, "metrics missing key '" + k + "'");
    return it->second;
  };
  auto real = [&](const std::string &k) {
    try {
      size_t used = 0;
      double v = std::stod(get(k), &used);
      if (used != get(k).size()) throw std::invalid_argument(k);
      return v;
    } catch (const std::logic_error &) {
      throw Error(ErrorKind::kFormat, "metrics key '" + k + "' is not a number");
    }
  };
  auto count = [&](const std::string &k) {
    try {
      size_t used = 0;
      uint64_t v = std::stoull(get(k), &used);
      if (used != get(k).size()) throw std::invalid_argument(k);
      return v;
    } catch (const std::logic_error &) {
      throw Error(ErrorKind::kFormat, "metrics key '" + k + "' is not a count");
    }
  };
  MetricsReport r;
  r.precision = real("precision");
  r.recall = real("recall");
  r.em_token = real("em_token");
  r.em_title = real("em_title");
  r.em_positive = real("em_positive");
  r.f1 = real("f1");
  r.counts = {count("tp"), count("fp"), count("fn")};
  r.tokens = count("tokens");
  r.titles = count("titles");
  for (size_t i = 0; i < 3; ++i) {
    const std::string p = "per_tag." + std::string(CoarseTagName(kEntityTagsReportOrder[i])) + ".";
    TagMetrics &t = r.per_tag[i];
    t.precision = real(p + "precision");
    t.recall = real(p + "recall");
    t.em = real(p + "em");
    t.f1 = real(p + "f1");
    t.counts = {count(p + "tp"), count(p + "fp"), count(p + "fn")};
  }
  return r;
}

namespace {

std::string Pad(const std::string &s, size_t width, bool right) {
  if (s.size() >= width) return s;
  std::string fill(width - s.size(), ' ');
  return right ? fill + s : s + fill;
}

void RequireReports(std::span<const NamedReport> reports) {
  if (reports.empty()) throw Error(ErrorKind::kInvalidArgument, "nothing to compare");
}

}  // namespace

std::string CompareText(std::span<const NamedReport> reports) {
  RequireReports(reports);
  size_t name_w = 5;
  for (const NamedReport &r : reports) name_w = std::max(name_w, r.name.size());
  const size_t w = 8;
  std::string out = "Overall\n" + Pad("Model", name_w, false);
  for (const char *h : {"P", "R", "EM", "F1"}) out += Pad(h, w, true);
  out += '\n';
  for (const NamedReport &r : reports) {
    out += Pad(r.name, name_w, false);
    for (double v : {r.report.precision, r.report.recall, r.report.em_token, r.report.f1}) {
      out += Pad(Fmt2(v), w, true);
    }
    out += '\n';
  }
  out += "\nBy tag\n" + std::string(name_w, ' ');
  for (CoarseTag t : kEntityTagsReportOrder) out += Pad(std::string(CoarseTagName(t)), 2 * w, true);
  out += '\n' + Pad("Model", name_w, false);
  for (int i = 0; i < 3; ++i) out += Pad("EM", w, true) + Pad("F1", w, true);
  out += '\n';
  for (const NamedReport &r : reports) {
    out += Pad(r.name, name_w, false);
    for (const TagMetrics &t : r.report.per_tag) out += Pad(Fmt2(t.em), w, true) + Pad(Fmt2(t.f1), w, true);
    out += '\n';
  }
  return out;
}

std::string CompareTsv(std::span<const NamedReport> reports) {
  RequireReports(reports);
  std::string out = "model\tprecision\trecall\tem\tf1\tem_title";
  for (CoarseTag t : kEntityTagsReportOrder) {
    const std::string n(CoarseTagName(t));
    out += "\t" + n + "_em\t" + n + "_f1";
  }
  out += '\n';
  for (const NamedReport &r : reports) {
    const MetricsReport &m = r.report;
    out += r.name;
    for (double v : {m.precision, m.recall, m.em_token, m.f1, m.em_title}) out += "\t" + Fmt(v);
    for (const TagMetrics &t : m.per_tag) out += "\t" + Fmt(t.em) + "\t" + Fmt(t.f1);
    out += '\n';
  }
  return out;
}

SearchSpace SearchSpace::LstmCrfSpace() {
  return {{0.1, 0.01}, {1, 2}, {128, 256}, {32, 128}, {OptimizerKind::kAdam, OptimizerKind::kSgd}};
}

std::vector<TrainConfig> SearchSpace::Enumerate(const TrainConfig &base) const {
  auto or_base = [](const auto &axis, auto value) {
    using T = typename std::decay_t<decltype(axis)>::value_type;
    return axis.empty() ? std::vector<T>{value} : axis;
  };
  std::vector<TrainConfig> out;
  for (double lr : or_base(learning_rates, base.learning_rate)) {
    for (int l : or_base(layers, base.layers)) {
      for (int h : or_base(hidden_sizes, base.hidden_size)) {
        for (int b : or_base(batch_sizes, base.batch_size)) {
          for (OptimizerKind o : or_base(optimizers, base.optimizer)) {
            TrainConfig c = base;
            c.learning_rate = lr;
            c.layers = l;
            c.hidden_size = h;
            c.batch_size = b;
            c.optimizer = o;
            out.push_back(c);
          }
        }
      }
    }
  }
  return out;
}

GridSearchResult GridSearch(const Trainer &trainer, const SearchSpace &space,
                            const TrainConfig &base, std::span<const LabeledSequence> train,
                            std::span<const LabeledSequence> validation, int epochs) {
  if (train.empty() || validation.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "grid search needs non-empty splits");
  }
  const auto *t0 = train.data();
  const auto *t1 = t0 + train.size();
  const auto *v0 = validation.data();
  const auto *v1 = v0 + validation.size();
  if (std::less<>()(v0, t1) && std::less<>()(t0, v1)) {
    throw Error(ErrorKind::kInvalidArgument, "validation split overlaps the training split");
  }
  GridSearchResult result;
  for (TrainConfig cfg : space.Enumerate(base)) {
    cfg.epochs = epochs;
    GridRow row;
    row.config = cfg;
    const auto start = std::chrono::steady_clock::now();
    try {
      cfg.Validate();
      Tagger tagger = trainer(train, cfg);
      std::vector<LabeledSequence> pred;
      pred.reserve(validation.size());
      for (const LabeledSequence &ex : validation) pred.push_back({ex.tokens, tagger(ex.tokens)});
      row.metrics = Score(validation, pred);
    } catch (const Error &e) {
      if (e.kind() != ErrorKind::kDivergence) throw;
      row.failed = true;
      row.error = e.what();
    }
    row.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!row.failed && (!result.best || row.metrics.f1 > result.rows[*result.best].metrics.f1)) {
      result.best = result.rows.size();
    }
    result.rows.push_back(std::move(row));
  }
  return result;
}

std::string GridSearchTsv(const GridSearchResult &result, bool with_seconds) {
  std::string out = "lr\tlayers\thidden\tbatch\toptimizer\tstatus\tprecision\trecall\tem\tf1";
  if (with_seconds) out += "\tseconds";
  out += '\n';
  for (size_t i = 0; i < result.rows.size(); ++i) {
    const GridRow &r = result.rows[i];
    char lr[32];
    std::snprintf(lr, sizeof(lr), "%g", r.config.learning_rate);
    out += std::string(lr) + "\t" + std::to_string(r.config.layers) + "\t" +
           std::to_string(r.config.hidden_size) + "\t" + std::to_string(r.config.batch_size) +
           "\t" + std::string(OptimizerName(r.config.optimizer)) + "\t";
    out += r.failed ? "failed" : (result.best == i ? "best" : "ok");
    for (double v : {r.metrics.precision, r.metrics.recall, r.metrics.em_token, r.metrics.f1}) {
      out += "\t" + (r.failed ? std::string("-") : Fmt(v));
    }
    if (with_seconds) out += "\t" + Fmt2(r.seconds);
    out += '\n';
  }
  return out;
}

}  // namespace ipod
