// Copyright 2026 The muse-embed Authors.
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


#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "muse/common.hpp"

namespace muse {

// A (word, sense) pair with its position in the flat sense index space.
struct SenseRef {
  WordId word = 0;
  std::uint32_t sense = 0;

  static SenseRef from_flat(std::size_t flat, std::size_t n) {
    return {static_cast<WordId>(flat / n), static_cast<std::uint32_t>(flat % n)};
  }
  std::size_t flat(std::size_t n) const { return std::size_t(word) * n + sense; }

  friend bool operator==(const SenseRef&, const SenseRef&) = default;
};

// Row-major dense matrix; rows are exposed as spans.
template <typename Real>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, Real(0)) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::span<Real> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const Real> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::vector<Real>& data() { return data_; }
  const std::vector<Real>& data() const { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Real> data_;
};

// All trainable state:
//   context  (P): |W| x d word embeddings feeding the selector
//   selector (Q): |W| x n x d sense-scoring weights, stored as |W|*n rows
//   input    (U): |W|*n x d input sense embeddings
//   output   (V): |W|*n x d collocation estimation embeddings
template <typename Real>
struct BasicModelParams {
  std::size_t vocab_size = 0;
  std::size_t dim = 0;
  std::size_t senses = 0;
  Matrix<Real> context;
  Matrix<Real> selector;
  Matrix<Real> input;
  Matrix<Real> output;

  BasicModelParams() = default;
  BasicModelParams(std::size_t vocab, std::size_t d, std::size_t n)
      : vocab_size(vocab), dim(d), senses(n), context(vocab, d), selector(vocab * n, d),
        input(vocab * n, d), output(vocab * n, d) {}

  std::size_t sense_count() const { return vocab_size * senses; }

  std::span<Real> selector_row(WordId w, std::size_t k) { return selector.row(std::size_t(w) * senses + k); }
  std::span<const Real> selector_row(WordId w, std::size_t k) const {
    return selector.row(std::size_t(w) * senses + k);
  }
  std::span<Real> input_row(SenseRef z) { return input.row(z.flat(senses)); }
  std::span<const Real> input_row(SenseRef z) const { return input.row(z.flat(senses)); }
  std::span<Real> output_row(SenseRef z) { return output.row(z.flat(senses)); }
  std::span<const Real> output_row(SenseRef z) const { return output.row(z.flat(senses)); }

  bool all_finite() const {
    for (const auto* m : {&context, &selector, &input, &output}) {
      for (Real x : m->data()) {
        if (!std::isfinite(x)) return false;
      }
    }
    return true;
  }

  friend bool operator==(const BasicModelParams&, const BasicModelParams&) = default;
};

using ModelParams = BasicModelParams<float>;

inline double init_bound(std::size_t d) { return std::sqrt(3.0 / double(d)); }

// Q and V start at zero; P and U are uniform on [-sqrt(3/d), sqrt(3/d)] so
// every row has unit squared norm in expectation.
template <typename Real = float>
BasicModelParams<Real> init_params(std::size_t vocab_size, std::size_t d, std::size_t n,
                                   std::uint64_t seed) {
  if (d < 1 || n < 1) throw ConfigError("init_params: d and n must be >= 1");
  BasicModelParams<Real> p(vocab_size, d, n);
  const double a = init_bound(d);
  Rng rng(seed);
  for (auto& x : p.context.data()) x = static_cast<Real>((2.0 * uniform01(rng) - 1.0) * a);
  for (auto& x : p.input.data()) x = static_cast<Real>((2.0 * uniform01(rng) - 1.0) * a);
  return p;
}

// FNV-1a over the raw bytes of all four tensors.
template <typename Real>
std::uint64_t checksum(const BasicModelParams<Real>& p) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto* m : {&p.context, &p.selector, &p.input, &p.output}) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(m->data().data());
    for (std::size_t i = 0; i < m->data().size() * sizeof(Real); ++i) {
      h = (h ^ bytes[i]) * 1099511628211ULL;
    }
  }
  return h;
}

}  // namespace muse
