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

#include "ipod/gazetteer.h"

#include <algorithm>
#include <cstdio>
#include <map>

#include "ipod/common.h"

namespace ipod {

void AnnotationSet::Add(const std::string &token, CoarseTag tag) {
  if (!votes_.emplace(token, tag).second) {
    throw Error(ErrorKind::kInvalidArgument,
                "annotator " + annotator_id_ + " voted twice on '" + token + "'");
  }
  tokens_.push_back(token);
}

std::optional<CoarseTag> AnnotationSet::Vote(const std::string &token) const {
  auto it = votes_.find(token);
  if (it == votes_.end()) return std::nullopt;
  return it->second;
}

namespace {

CoarseTag ParseTagOrThrow(const std::string &s, size_t line_no) {
  std::optional<CoarseTag> tag = ParseCoarseTag(s);
  if (!tag) {
    throw Error(ErrorKind::kFormat, "line " + std::to_string(line_no) +
                                        ": unknown tag '" + s + "'");
  }
  return *tag;
}

std::string_view AgreementName(Agreement a) {
  return a == Agreement::kUnanimous ? "UNANIMOUS" : "MAJORITY";
}

}  // namespace

AnnotationSet LoadAnnotationSet(const std::string &path) {
  AnnotationSet set(path);
  std::vector<std::string> lines = ReadLines(path);
  for (size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    std::vector<std::string> f = SplitFields(lines[i], '\t');
    if (f.size() != 2) {
      throw Error(ErrorKind::kFormat, path + ": line " + std::to_string(i + 1) +
                                          ": expected token<TAB>tag");
    }
    set.Add(f[0], ParseTagOrThrow(f[1], i + 1));
  }
  return set;
}

std::string SerializeAnnotationSet(const AnnotationSet &set) {
  std::string out;
  for (const std::string &tok : set.tokens()) {
    out += tok;
    out += '\t';
    out += CoarseTagName(*set.Vote(tok));
    out += '\n';
  }
  return out;
}

void Gazetteer::Add(GazetteerEntry entry) {
  int support = static_cast<int>(
      std::count(entry.votes.begin(), entry.votes.end(), entry.tag));
  if (support < 2) {
    throw Error(ErrorKind::kInvalidArgument,
                "gazetteer entry '" + entry.token + "' has fewer than two votes");
  }
  entry.agreement = support == 3 ? Agreement::kUnanimous : Agreement::kMajority;
  if (!index_.emplace(entry.token, entries_.size()).second) {
    throw Error(ErrorKind::kInvalidArgument,
                "duplicate gazetteer token '" + entry.token + "'");
  }
  entries_.push_back(std::move(entry));
}

CoarseTag Gazetteer::Lookup(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? CoarseTag::kO : entries_[it->second].tag;
}

bool Gazetteer::Contains(std::string_view token) const {
  return index_.count(std::string(token)) > 0;
}

std::vector<std::string> Gazetteer::TokensWithTag(CoarseTag tag) const {
  std::vector<std::string> out;
  for (const GazetteerEntry &e : entries_) {
    if (e.tag == tag) out.push_back(e.token);
  }
  return out;
}

Gazetteer Gazetteer::SortedByFrequency(const Corpus &corpus) const {
  std::unordered_map<std::string, uint64_t> freq;
  for (const Title &t : corpus.titles) {
    for (const std::string &tok : t.tokens) ++freq[tok];
  }
  std::vector<const GazetteerEntry *> order;
  for (const GazetteerEntry &e : entries_) order.push_back(&e);
  auto count_of = [&](const GazetteerEntry *e) -> uint64_t {
    auto it = freq.find(e->token);
    return it == freq.end() ? 0 : it->second;
  };
  std::stable_sort(order.begin(), order.end(),
                   [&](const GazetteerEntry *a, const GazetteerEntry *b) {
                     uint64_t ca = count_of(a), cb = count_of(b);
                     if (ca != cb) return ca > cb;
                     if (ca == 0) return false;
                     return a->token < b->token;
                   });
  Gazetteer sorted;
  for (const GazetteerEntry *e : order) sorted.Add(*e);
  return sorted;
}

Gazetteer ParseGazetteer(std::string_view contents) {
  Gazetteer g;
  size_t line_no = 0;
  for (const std::string &line : SplitFields(contents, '\n')) {
    ++line_no;
    std::string_view l = line;
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
    if (l.empty()) continue;
    std::vector<std::string> f = SplitFields(l, '\t');
    if (f.size() != 6) {
      throw Error(ErrorKind::kFormat, "gazetteer line " + std::to_string(line_no) +
                                          ": expected 6 tab-separated columns");
    }
    GazetteerEntry e;
    e.token = f[0];
    e.tag = ParseTagOrThrow(f[1], line_no);
    for (int i = 0; i < 3; ++i) e.votes[i] = ParseTagOrThrow(f[2 + i], line_no);
    if (f[5] != "UNANIMOUS" && f[5] != "MAJORITY") {
      throw Error(ErrorKind::kFormat, "gazetteer line " + std::to_string(line_no) +
                                          ": bad agreement '" + f[5] + "'");
    }
    try {
      g.Add(std::move(e));
    } catch (const Error &err) {
      throw Error(ErrorKind::kFormat, "gazetteer line " +
                                          std::to_string(line_no) + ": " +
                                          err.what());
    }
    if (AgreementName(g.entries().back().agreement) != f[5]) {
      throw Error(ErrorKind::kFormat, "gazetteer line " + std::to_string(line_no) +
                                          ": agreement column contradicts votes");
    }
  }
  return g;
}

Gazetteer LoadGazetteer(const std::string &path) {
  return ParseGazetteer(ReadFile(path));
}

std::string SerializeGazetteer(const Gazetteer &g) {
  std::string out;
  for (const GazetteerEntry &e : g.entries()) {
    out += e.token;
    out += '\t';
    out += CoarseTagName(e.tag);
    for (CoarseTag v : e.votes) {
      out += '\t';
      out += CoarseTagName(v);
    }
    out += '\t';
    out += AgreementName(e.agreement);
    out += '\n';
  }
  return out;
}

const Gazetteer &DefaultGazetteer() {
  static const Gazetteer kGazetteer = [] {
    // Managerial level, operational role, and seniority words.
    static const char *kRes[] = {
        "manager",    "director",    "engineer",   "senior",    "president",
        "vice",       "lead",        "supervisor", "designer",  "accountant",
        "technician", "junior",      "associate",  "assistant", "chief",
        "officer",    "executive",   "head",       "consultant", "analyst",
        "specialist", "coordinator", "administrator", "partner", "founder",
        "intern",     "developer",   "architect",  "scientist", "principal",
        "strategist", "owner",       "advisor",    "representative", "clerk",
        "trainee",    "programmer", "recruiter", "controller",
        "auditor",    "researcher",  "secretary",  "ceo",       "cfo",
        "cto",        "vp",          "avp",        "svp",       "evp",
        "deputy",     "staff",       "team",       "leader",    "instructor",
        "lecturer",   "professor",   "teacher",    "nurse",     "editor",
        "writer",     "planner",     "buyer",      "agent",     "cofounder"};
    // Departments, scope, and content of work.
    static const char *kFun[] = {
        "sales",      "marketing",   "finance",    "financial", "operations",
        "strategy",   "enterprise",  "project",    "customer",  "national",
        "site",       "data",        "r&d",        "security",  "training",
        "integration", "education",  "business",   "software",  "product",
        "human",      "resources",   "it",         "account",   "technology",
        "research",   "development", "quality",    "supply",    "chain",
        "digital",    "network",     "systems",    "services",  "support",
        "program",    "risk",        "compliance", "legal",     "procurement",
        "logistics",  "talent",      "acquisition", "communications", "media",
        "brand",      "design",      "investment", "banking",   "credit",
        "audit",      "tax",         "treasury",   "engineering", "infrastructure",
        "cloud",      "analytics",   "solutions",  "channel",   "retail",
        "regional",   "global",      "corporate",  "commercial", "administrative",
        "mechanical", "electrical",  "process",    "manufacturing", "production"};
    // Regions, countries, states, cities.
    static const char *kLoc[] = {
        "apac",      "sea",       "asia",      "european", "north",
        "central",   "china",     "america",   "singapore", "colorado",
        "pacific",   "emea",      "europe",    "india",    "japan",
        "malaysia",  "indonesia", "thailand",  "vietnam",  "philippines",
        "korea",     "australia", "texas",     "california", "york",
        "east",      "west",      "south",     "southeast", "americas",
        "latam",     "anz",       "greater",   "hong",      "kong",
        "taiwan",    "usa",       "canada",    "uk",        "germany"};
    static const char *kO[] = {"and", "of", "the", "for", "in",
                               "at",  "to", "with", "on", "a"};
    Gazetteer g;
    auto add_all = [&g](const auto &tokens, CoarseTag tag) {
      for (const char *tok : tokens) {
        if (g.Contains(tok)) continue;
        GazetteerEntry e;
        e.token = tok;
        e.tag = tag;
        e.votes = {tag, tag, tag};
        g.Add(std::move(e));
      }
    };
    add_all(kRes, CoarseTag::kRes);
    add_all(kFun, CoarseTag::kFun);
    add_all(kLoc, CoarseTag::kLoc);
    add_all(kO, CoarseTag::kO);
    return g;
  }();
  return kGazetteer;
}

TopUnigrams ComputeTopUnigrams(const Corpus &corpus, size_t k) {
  if (k == 0) throw Error(ErrorKind::kInvalidArgument, "k must be >= 1");
  NgramTable unigrams = CountNgrams(corpus, 1);
  TopUnigrams out;
  if (k > unigrams.entries.size()) {
    out.warning = "requested " + std::to_string(k) + " tokens but vocabulary has " +
                  std::to_string(unigrams.entries.size());
    k = unigrams.entries.size();
  }
  for (size_t i = 0; i < k; ++i) out.tokens.push_back(unigrams.entries[i].first[0]);
  return out;
}

namespace {

void RequireSameCoverage(const std::array<AnnotationSet, 3> &sets) {
  for (int s = 1; s < 3; ++s) {
    if (sets[s].size() != sets[0].size()) {
      throw Error(ErrorKind::kInvalidArgument,
                  "annotation sets cover different numbers of tokens");
    }
    for (const std::string &tok : sets[0].tokens()) {
      if (!sets[s].Vote(tok)) {
        throw Error(ErrorKind::kInvalidArgument,
                    "token '" + tok + "' missing from annotator " +
                        sets[s].annotator_id());
      }
    }
  }
}

void RequireSameCoverage(const AnnotationSet &a, const AnnotationSet &b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::kInvalidArgument,
                "annotation sets cover different numbers of tokens");
  }
  for (const std::string &tok : a.tokens()) {
    if (!b.Vote(tok)) {
      throw Error(ErrorKind::kInvalidArgument,
                  "token '" + tok + "' missing from annotator " + b.annotator_id());
    }
  }
}

std::array<CoarseTag, 3> VotesFor(const std::array<AnnotationSet, 3> &sets,
                                  const std::string &tok) {
  return {*sets[0].Vote(tok), *sets[1].Vote(tok), *sets[2].Vote(tok)};
}

}  // namespace

MergeResult MergeAnnotations(const std::array<AnnotationSet, 3> &sets) {
  RequireSameCoverage(sets);
  MergeResult result;
  for (const std::string &tok : sets[0].tokens()) {
    std::array<CoarseTag, 3> v = VotesFor(sets, tok);
    std::optional<CoarseTag> majority;
    if (v[0] == v[1] || v[0] == v[2]) {
      majority = v[0];
    } else if (v[1] == v[2]) {
      majority = v[1];
    }
    if (!majority) {
      result.rejected.push_back(tok);
      continue;
    }
    GazetteerEntry e;
    e.token = tok;
    e.tag = *majority;
    e.votes = v;
    result.gazetteer.Add(std::move(e));
  }
  return result;
}

double PercentageAgreement(const std::array<AnnotationSet, 3> &sets) {
  RequireSameCoverage(sets);
  if (sets[0].size() == 0) {
    throw Error(ErrorKind::kInvalidArgument, "empty token set");
  }
  uint64_t agreeing_pairs = 0;
  for (const std::string &tok : sets[0].tokens()) {
    std::array<CoarseTag, 3> v = VotesFor(sets, tok);
    agreeing_pairs += (v[0] == v[1]) + (v[0] == v[2]) + (v[1] == v[2]);
  }
  return static_cast<double>(agreeing_pairs) /
         (3.0 * static_cast<double>(sets[0].size()));
}

double CohensKappa(const AnnotationSet &a, const AnnotationSet &b) {
  RequireSameCoverage(a, b);
  if (a.size() == 0) throw Error(ErrorKind::kInvalidArgument, "empty token set");
  std::array<double, 4> ma{}, mb{};
  double agree = 0.0;
  for (const std::string &tok : a.tokens()) {
    CoarseTag ta = *a.Vote(tok), tb = *b.Vote(tok);
    ma[static_cast<int>(ta)] += 1.0;
    mb[static_cast<int>(tb)] += 1.0;
    if (ta == tb) agree += 1.0;
  }
  double n = static_cast<double>(a.size());
  double p_o = agree / n;
  double p_e = 0.0;
  for (int k = 0; k < 4; ++k) p_e += (ma[k] / n) * (mb[k] / n);
  if (p_e >= 1.0) {
    if (p_o >= 1.0) return 1.0;
    throw Error(ErrorKind::kInvalidArgument, "kappa undefined: chance agreement is 1");
  }
  return (p_o - p_e) / (1.0 - p_e);
}

IrrReport ComputeIrr(const std::array<AnnotationSet, 3> &sets) {
  IrrReport r;
  r.percentage_agreement = PercentageAgreement(sets);
  r.pairwise_kappa = {CohensKappa(sets[0], sets[1]), CohensKappa(sets[0], sets[2]),
                      CohensKappa(sets[1], sets[2])};
  r.cohens_kappa =
      (r.pairwise_kappa[0] + r.pairwise_kappa[1] + r.pairwise_kappa[2]) / 3.0;
  for (const std::string &tok : sets[0].tokens()) {
    std::array<CoarseTag, 3> v = VotesFor(sets, tok);
    int pairs = (v[0] == v[1]) + (v[0] == v[2]) + (v[1] == v[2]);
    if (pairs == 3) {
      ++r.unanimous_count;
    } else if (pairs == 1) {
      ++r.majority_count;
    } else {
      ++r.disagreement_count;
    }
  }
  return r;
}

std::string IrrReportToKv(const IrrReport &r) {
  char buf[512];
  double total = static_cast<double>(r.total());
  std::snprintf(buf, sizeof(buf),
                "percentage_agreement=%.6f\n"
                "cohens_kappa=%.6f\n"
                "kappa.ab=%.6f\n"
                "kappa.ac=%.6f\n"
                "kappa.bc=%.6f\n"
                "total=%llu\n"
                "unanimous_count=%llu\n"
                "unanimous_share=%.6f\n"
                "majority_count=%llu\n"
                "majority_share=%.6f\n"
                "disagreement_count=%llu\n",
                r.percentage_agreement, r.cohens_kappa, r.pairwise_kappa[0],
                r.pairwise_kappa[1], r.pairwise_kappa[2],
                static_cast<unsigned long long>(r.total()),
                static_cast<unsigned long long>(r.unanimous_count),
                total > 0 ? r.unanimous_count / total : 0.0,
                static_cast<unsigned long long>(r.majority_count),
                total > 0 ? r.majority_count / total : 0.0,
                static_cast<unsigned long long>(r.disagreement_count));
  return buf;
}

}  // namespace ipod
