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

#include "ipod/model_io.h"

#include <bit>
#include <cstring>

#include "ipod/common.h"

namespace ipod {

namespace {

constexpr uint32_t kFormatVersion = 1;

void PutLe32(std::string &buf, uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

uint32_t GetLe32(const std::string &buf, size_t pos) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<uint32_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
  }
  return v;
}

}  // namespace

ModelWriter::ModelWriter(std::string_view kind) {
  buf_.append(kModelMagic);
  U32(kFormatVersion);
  String(kind);
}

void ModelWriter::U32(uint32_t v) { PutLe32(buf_, v); }

void ModelWriter::F32(double v) {
  PutLe32(buf_, std::bit_cast<uint32_t>(static_cast<float>(v)));
}

void ModelWriter::String(std::string_view s) {
  U32(static_cast<uint32_t>(s.size()));
  buf_.append(s);
}

void ModelWriter::Strings(const std::vector<std::string> &v) {
  U32(static_cast<uint32_t>(v.size()));
  for (const std::string &s : v) String(s);
}

void ModelWriter::Matrix(const Eigen::MatrixXd &m) {
  U32(static_cast<uint32_t>(m.rows()));
  U32(static_cast<uint32_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) F32(m(r, c));
  }
}

void ModelWriter::Vector(const Eigen::VectorXd &v) { Matrix(v); }

ModelReader::ModelReader(std::string bytes) : buf_(std::move(bytes)) {
  if (buf_.size() < kModelMagic.size() ||
      std::string_view(buf_).substr(0, kModelMagic.size()) != kModelMagic) {
    throw Error(ErrorKind::kFormat, "not an IPODMDL1 model file");
  }
  pos_ = kModelMagic.size();
  uint32_t version = U32();
  if (version != kFormatVersion) {
    throw Error(ErrorKind::kFormat,
                "unsupported model format version " + std::to_string(version));
  }
  kind_ = String();
}

void ModelReader::Need(size_t n) const {
  if (buf_.size() - pos_ < n) {
    throw Error(ErrorKind::kFormat, "truncated model file");
  }
}

uint32_t ModelReader::U32() {
  Need(4);
  uint32_t v = GetLe32(buf_, pos_);
  pos_ += 4;
  return v;
}

double ModelReader::F32() {
  return static_cast<double>(std::bit_cast<float>(U32()));
}

std::string ModelReader::String() {
  uint32_t n = U32();
  Need(n);
  std::string s = buf_.substr(pos_, n);
  pos_ += n;
  return s;
}

std::vector<std::string> ModelReader::Strings() {
  uint32_t n = U32();
  std::vector<std::string> out;
  out.reserve(n);
  for (uint32_t i = 0; i < n; ++i) out.push_back(String());
  return out;
}

Eigen::MatrixXd ModelReader::Matrix() {
  uint32_t rows = U32();
  uint32_t cols = U32();
  Need(static_cast<size_t>(rows) * cols * 4);
  Eigen::MatrixXd m(rows, cols);
  for (uint32_t r = 0; r < rows; ++r) {
    for (uint32_t c = 0; c < cols; ++c) m(r, c) = F32();
  }
  return m;
}

Eigen::VectorXd ModelReader::Vector() {
  Eigen::MatrixXd m = Matrix();
  if (m.cols() != 1) throw Error(ErrorKind::kFormat, "expected a column vector");
  return m.col(0);
}

void ModelReader::ExpectEnd() const {
  if (!at_end()) throw Error(ErrorKind::kFormat, "trailing bytes in model file");
}

std::string PeekModelKind(const std::string &path) {
  return ModelReader(ReadFile(path)).kind();
}

}  // namespace ipod
