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

#include "ipod/corpus.h"

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include <algorithm>
#include <map>
#include <numeric>

#include "ipod/common.h"

namespace ipod {

std::string_view RegionName(Region r) {
  switch (r) {
    case Region::kUS:
      return "US";
    case Region::kAsia:
      return "ASIA";
    case Region::kUnknown:
      break;
  }
  return "UNKNOWN";
}

Region ParseRegion(std::string_view s) {
  std::string up(s);
  for (char &c : up) {
    if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
  }
  if (up == "US") return Region::kUS;
  if (up == "ASIA") return Region::kAsia;
  return Region::kUnknown;
}

namespace {

std::string CaseFold(std::string_view raw) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2 *nfkc_cf =
      icu::Normalizer2::getNFKCCasefoldInstance(status);
  icu::UnicodeString in = icu::UnicodeString::fromUTF8(
      icu::StringPiece(raw.data(), static_cast<int32_t>(raw.size())));
  icu::UnicodeString folded;
  if (U_SUCCESS(status)) folded = nfkc_cf->normalize(in, status);
  std::string out;
  if (U_FAILURE(status)) {
    // Fall back to ASCII folding; non-ASCII bytes are dropped later anyway.
    out.assign(raw);
    for (char &c : out) {
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
  }
  folded.toUTF8String(out);
  return out;
}

bool IsKept(char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '&';
}

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

}  // namespace

Title NormalizeTitle(std::string_view raw) {
  Title title;
  title.raw = std::string(raw);
  std::string folded = CaseFold(raw);
  std::string filtered;
  filtered.reserve(folded.size());
  for (char c : folded) {
    if (IsKept(c)) {
      filtered.push_back(c);
    } else if (IsSpace(c)) {
      filtered.push_back(' ');
    }
  }
  for (std::string &tok : SplitWhitespace(filtered)) {
    bool all_amp =
        std::all_of(tok.begin(), tok.end(), [](char c) { return c == '&'; });
    title.tokens.push_back(all_amp ? std::string("and") : std::move(tok));
  }
  return title;
}

std::string CanonicalForm(const Title &title) { return Join(title.tokens, " "); }

Corpus ParseCorpus(std::string_view contents, CorpusFormat format,
                   std::string source_label) {
  Corpus corpus;
  corpus.source_label = std::move(source_label);
  size_t line_no = 0;
  size_t start = 0;
  while (start < contents.size()) {
    size_t pos = contents.find('\n', start);
    if (pos == std::string_view::npos) pos = contents.size();
    std::string_view line = contents.substr(start, pos - start);
    start = pos + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (format == CorpusFormat::kLines) {
      Title t = NormalizeTitle(line);
      if (t.empty()) {
        ++corpus.excluded_empty;
        continue;
      }
      corpus.titles.push_back(std::move(t));
      continue;
    }
    std::vector<std::string> fields = SplitFields(line, '\t');
    if (fields.size() != 3) {
      corpus.diagnostics.push_back("line " + std::to_string(line_no) +
                                   ": expected 3 tab-separated columns, got " +
                                   std::to_string(fields.size()));
      continue;
    }
    Title t = NormalizeTitle(fields[0]);
    t.region = ParseRegion(fields[1]);
    t.profile_id = fields[2];
    if (t.empty()) {
      ++corpus.excluded_empty;
      continue;
    }
    corpus.titles.push_back(std::move(t));
  }
  return corpus;
}

Corpus LoadCorpus(const std::string &path, CorpusFormat format) {
  return ParseCorpus(ReadFile(path), format, path);
}

std::string SerializeCorpus(const Corpus &corpus, CorpusFormat format) {
  std::string out;
  for (const Title &t : corpus.titles) {
    out += CanonicalForm(t);
    if (format == CorpusFormat::kTsv) {
      out += '\t';
      out += RegionName(t.region);
      out += '\t';
      out += t.profile_id;
    }
    out += '\n';
  }
  return out;
}

namespace {

LengthSummary Summarize(std::vector<size_t> lengths) {
  LengthSummary s;
  s.count = lengths.size();
  std::sort(lengths.begin(), lengths.end());
  s.min = lengths.front();
  s.max = lengths.back();
  s.median = lengths[(lengths.size() - 1) / 2];
  double total = std::accumulate(lengths.begin(), lengths.end(), 0.0);
  s.avg = total / static_cast<double>(lengths.size());
  return s;
}

std::map<size_t, double> Percentages(const std::vector<size_t> &lengths) {
  std::map<size_t, uint64_t> counts;
  for (size_t len : lengths) ++counts[len];
  std::map<size_t, double> pct;
  for (const auto &[len, c] : counts) {
    pct[len] = 100.0 * static_cast<double>(c) /
               static_cast<double>(lengths.size());
  }
  return pct;
}

void RequireNonEmpty(const Corpus &corpus) {
  if (corpus.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "corpus is empty");
  }
}

}  // namespace

LengthStats ComputeLengthStats(const Corpus &corpus) {
  RequireNonEmpty(corpus);
  std::vector<size_t> all;
  std::map<Region, std::vector<size_t>> per_region;
  for (const Title &t : corpus.titles) {
    all.push_back(t.length());
    per_region[t.region].push_back(t.length());
  }
  LengthStats stats;
  stats.overall = Summarize(std::move(all));
  for (auto &[region, lengths] : per_region) {
    stats.by_region[region] = Summarize(std::move(lengths));
  }
  return stats;
}

LengthHistogram ComputeLengthHistogram(const Corpus &corpus) {
  RequireNonEmpty(corpus);
  std::vector<size_t> all;
  std::map<Region, std::vector<size_t>> per_region;
  for (const Title &t : corpus.titles) {
    all.push_back(t.length());
    per_region[t.region].push_back(t.length());
  }
  LengthHistogram hist;
  hist.all = Percentages(all);
  for (const auto &[region, lengths] : per_region) {
    hist.by_region[region] = Percentages(lengths);
  }
  return hist;
}

double CumulativeShare(const std::map<size_t, double> &histogram,
                       size_t max_len) {
  double share = 0.0;
  for (const auto &[len, pct] : histogram) {
    if (len <= max_len) share += pct;
  }
  return share;
}

NgramTable CountNgrams(const Corpus &corpus, size_t n) {
  if (n == 0) throw Error(ErrorKind::kInvalidArgument, "n-gram order must be >= 1");
  std::map<std::vector<std::string>, uint64_t> counts;
  for (const Title &t : corpus.titles) {
    if (t.length() < n) continue;
    for (size_t i = 0; i + n <= t.length(); ++i) {
      std::vector<std::string> gram(t.tokens.begin() + i,
                                    t.tokens.begin() + i + n);
      ++counts[std::move(gram)];
    }
  }
  NgramTable table;
  table.n = n;
  table.entries.assign(counts.begin(), counts.end());
  // std::map already yields lexicographic order; a stable sort by count
  // keeps it for ties.
  std::stable_sort(table.entries.begin(), table.entries.end(),
                   [](const auto &a, const auto &b) { return a.second > b.second; });
  return table;
}

}  // namespace ipod
