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

// The versioned binary model container. Every file starts with the magic
// "IPODMDL1" followed by a kind string; the payload is a sequence of
// length-prefixed strings, unsigned integers and matrices. Integers are
// little-endian u32, reals are little-endian IEEE-754 binary32, matrices
// are (rows u32, cols u32, row-major values).

#ifndef IPOD_MODEL_IO_H_
#define IPOD_MODEL_IO_H_

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ipod {

inline constexpr std::string_view kModelMagic = "IPODMDL1";

class ModelWriter {
 public:
  explicit ModelWriter(std::string_view kind);

  void U32(uint32_t v);
  void F32(double v);
  void String(std::string_view s);
  void Strings(const std::vector<std::string> &v);
  void Matrix(const Eigen::MatrixXd &m);
  void Vector(const Eigen::VectorXd &v);

  const std::string &bytes() const { return buf_; }

 private:
  std::string buf_;
};

class ModelReader {
 public:
  // Throws kFormat if the magic is missing.
  explicit ModelReader(std::string bytes);

  const std::string &kind() const { return kind_; }

  uint32_t U32();
  double F32();
  std::string String();
  std::vector<std::string> Strings();
  Eigen::MatrixXd Matrix();
  Eigen::VectorXd Vector();

  bool at_end() const { return pos_ == buf_.size(); }
  // Throws kFormat unless every byte was consumed.
  void ExpectEnd() const;

 private:
  void Need(size_t n) const;

  std::string buf_;
  size_t pos_ = 0;
  std::string kind_;
};

// Reads the kind string without decoding the rest.
std::string PeekModelKind(const std::string &path);

}  // namespace ipod

#endif  // IPOD_MODEL_IO_H_
