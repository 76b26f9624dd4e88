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
#include <random>
#include <span>
#include <stdexcept>
#include <string>

namespace muse {

using WordId = std::uint32_t;
using Rng = std::mt19937_64;

// Error taxonomy shared by every module. The CLI maps these onto exit codes.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct FormatError : Error {
  using Error::Error;
};
struct TrainingFailure : Error {
  using Error::Error;
};

template <typename Real>
inline Real sigmoid(Real x) {
  if (x >= Real(0)) {
    return Real(1) / (Real(1) + std::exp(-x));
  }
  const Real e = std::exp(x);
  return e / (Real(1) + e);
}

// log(sigmoid(x)) without underflow for large |x|.
template <typename Real>
inline Real log_sigmoid(Real x) {
  if (x >= Real(0)) {
    return -std::log1p(std::exp(-x));
  }
  return x - std::log1p(std::exp(x));
}

template <typename Real>
inline Real dot(std::span<const Real> a, std::span<const Real> b) {
  Real s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    s += a[i] * b[i];
  }
  return s;
}

template <typename Real>
inline void axpy(Real alpha, std::span<const Real> x, std::span<Real> y) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] += alpha * x[i];
  }
}

template <typename Real>
inline double cosine(std::span<const Real> a, std::span<const Real> b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += double(a[i]) * double(b[i]);
    aa += double(a[i]) * double(a[i]);
    bb += double(b[i]) * double(b[i]);
  }
  if (aa == 0.0 || bb == 0.0) {
    return 0.0;
  }
  return ab / std::sqrt(aa * bb);
}

// Uniform draw in [0, 1) from 53 random bits; stable across standard libraries.
inline double uniform01(Rng& rng) {
  return double(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n) by multiply-shift; n must be > 0.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  return static_cast<std::uint64_t>(
      (static_cast<unsigned __int128>(rng()) * n) >> 64);
}

}  // namespace muse
