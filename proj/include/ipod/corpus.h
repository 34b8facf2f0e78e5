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

// Job-title corpora: text normalization, loading, and descriptive
// statistics (length distribution and n-gram frequencies).

#ifndef IPOD_CORPUS_H_
#define IPOD_CORPUS_H_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ipod {

enum class Region { kUS, kAsia, kUnknown };

std::string_view RegionName(Region r);

// Case-insensitive "US" / "ASIA"; anything else is kUnknown.
Region ParseRegion(std::string_view s);

struct Title {
  std::string raw;
  std::vector<std::string> tokens;
  Region region = Region::kUnknown;
  std::string profile_id;

  // A title whose normalization produced no tokens. Such titles are
  // excluded from corpora and only counted.
  bool empty() const { return tokens.empty(); }
  size_t length() const { return tokens.size(); }
};

struct Corpus {
  std::vector<Title> titles;
  std::string source_label;
  // Inputs that normalized to nothing.
  size_t excluded_empty = 0;
  // Skipped-row diagnostics of the form "line N: reason".
  std::vector<std::string> diagnostics;

  bool empty() const { return titles.empty(); }
  size_t size() const { return titles.size(); }
};

// Lowercases with Unicode compatibility case folding, removes every
// character outside [a-z0-9&] and whitespace, splits on whitespace, and
// replaces standalone ampersands with "and". Embedded ampersands ("r&d")
// stay inside their token. No stemming.
Title NormalizeTitle(std::string_view raw);

// The canonical single-line form: tokens joined by one space.
std::string CanonicalForm(const Title &title);

enum class CorpusFormat { kLines, kTsv };

// LINES: one raw title per line. TSV: raw, region, profile_id (no header).
// Malformed TSV rows are skipped and reported in Corpus::diagnostics.
Corpus LoadCorpus(const std::string &path, CorpusFormat format);
Corpus ParseCorpus(std::string_view contents, CorpusFormat format,
                   std::string source_label = {});

// Inverse of LoadCorpus on the canonical form.
std::string SerializeCorpus(const Corpus &corpus, CorpusFormat format);

struct LengthSummary {
  size_t count = 0;
  size_t min = 0;
  size_t max = 0;
  double avg = 0.0;
  // Lower median for even counts, so it is always an observed length.
  size_t median = 0;
};

struct LengthStats {
  LengthSummary overall;
  // Only regions with at least one title appear.
  std::map<Region, LengthSummary> by_region;
};

LengthStats ComputeLengthStats(const Corpus &corpus);

// Length -> percentage of titles. The "ALL" histogram covers every title.
struct LengthHistogram {
  std::map<size_t, double> all;
  std::map<Region, std::map<size_t, double>> by_region;
};

LengthHistogram ComputeLengthHistogram(const Corpus &corpus);

// Cumulative share (percent) of titles with length <= max_len.
double CumulativeShare(const std::map<size_t, double> &histogram,
                       size_t max_len);

struct NgramTable {
  size_t n = 1;
  // Sorted by count descending, then lexicographically by tokens.
  std::vector<std::pair<std::vector<std::string>, uint64_t>> entries;
};

NgramTable CountNgrams(const Corpus &corpus, size_t n);

}  // namespace ipod

#endif  // IPOD_CORPUS_H_
