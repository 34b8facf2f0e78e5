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

#ifndef IPOD_COMMON_H_
#define IPOD_COMMON_H_

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ipod {

// Broad failure classes. The command line tool maps each one to its own
// exit code.
enum class ErrorKind {
  kInvalidArgument,
  kIo,
  kFormat,
  kDivergence,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string &what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// All randomized components draw from this engine so that a seed fully
// determines a run.
using Rng = std::mt19937_64;

// 64-bit FNV-1a. Used as a content hash for model/embedding pairing.
inline uint64_t Fnv1a64(std::string_view bytes,
                        uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string HexDigest(uint64_t h);

// Splits on a single delimiter character, keeping empty fields.
std::vector<std::string> SplitFields(std::string_view line, char delim);

// Splits on runs of ASCII whitespace, dropping empty pieces.
std::vector<std::string> SplitWhitespace(std::string_view text);

std::string Join(const std::vector<std::string> &parts, std::string_view sep);

// Reads a whole file. Throws kIo when it cannot be opened.
std::string ReadFile(const std::string &path);
void WriteFile(const std::string &path, std::string_view contents);

// Reads a file line by line, stripping a trailing '\r' from each line.
std::vector<std::string> ReadLines(const std::string &path);

}  // namespace ipod

#endif  // IPOD_COMMON_H_
