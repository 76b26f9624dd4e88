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

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "muse/common.hpp"
#include "muse/params.hpp"
#include "muse/unigram_table.hpp"

namespace muse {

enum class RewardKind {
  ApproxLogLik,      // realized negative-sampling log-likelihood
  BernoulliLik,      // sigma(U_target . V_colloc)
  ExactCategorical,  // full softmax over all senses; diagnostics only
};

inline std::string to_string(RewardKind k) {
  switch (k) {
    case RewardKind::ApproxLogLik: return "approx";
    case RewardKind::BernoulliLik: return "bernoulli";
    case RewardKind::ExactCategorical: return "exact";
  }
  return "?";
}

inline RewardKind parse_reward(const std::string& s) {
  if (s == "approx") return RewardKind::ApproxLogLik;
  if (s == "bernoulli") return RewardKind::BernoulliLik;
  if (s == "exact") return RewardKind::ExactCategorical;
  throw ConfigError("unknown reward '" + s + "'");
}

inline constexpr std::size_t kExactRewardMaxSenses = 10000;

// Value of the negative-sampling objective for one positive pair and a
// fixed set of negatives (flat sense indices into V).
template <typename Real>
double sgns_objective(SenseRef target, SenseRef colloc, std::span<const std::size_t> negatives,
                      const BasicModelParams<Real>& params) {
  const auto u = params.input_row(target);
  double value = log_sigmoid(double(dot<Real>(u, params.output_row(colloc))));
  for (auto neg : negatives) {
    value += log_sigmoid(-double(dot<Real>(u, params.output.row(neg))));
  }
  return value;
}

// One gradient-ascent step on the negative-sampling objective with the
// negatives given. All dot products use the pre-update rows, so the step is
// exactly lr times the gradient. Returns the pre-update objective value.
template <typename Real>
double sgns_update_with_negatives(SenseRef target, SenseRef colloc, std::span<const std::size_t> negatives,
                                  BasicModelParams<Real>& params, Real lr, std::vector<Real>& scratch) {
  const std::size_t n = params.senses;
  auto u = params.input_row(target);
  const std::size_t pos = colloc.flat(n);

  thread_local std::vector<Real> coeff;
  coeff.resize(negatives.size() + 1);
  double value = 0.0;
  {
    const Real x = dot<Real>(u, params.output.row(pos));
    coeff[0] = Real(1) - sigmoid(x);
    value += log_sigmoid(double(x));
  }
  for (std::size_t i = 0; i < negatives.size(); ++i) {
    const Real x = dot<Real>(u, params.output.row(negatives[i]));
    coeff[i + 1] = -sigmoid(x);
    value += log_sigmoid(-double(x));
  }
  if (!std::isfinite(value)) {
    throw TrainingFailure("non-finite collocation log-likelihood");
  }

  scratch.assign(params.dim, Real(0));
  axpy<Real>(coeff[0], params.output.row(pos), scratch);
  for (std::size_t i = 0; i < negatives.size(); ++i) {
    axpy<Real>(coeff[i + 1], params.output.row(negatives[i]), scratch);
  }
  axpy<Real>(lr * coeff[0], u, params.output.row(pos));
  for (std::size_t i = 0; i < negatives.size(); ++i) {
    axpy<Real>(lr * coeff[i + 1], u, params.output.row(negatives[i]));
  }
  axpy<Real>(lr, std::span<const Real>(scratch), u);
  return value;
}

// Draws `count` negatives from the table, redrawing any draw equal to the
// positive sense. Draws equal to the target sense are kept.
inline void draw_negatives(const UnigramTable& table, std::size_t positive_flat, std::size_t count,
                           Rng& rng, std::vector<std::size_t>& out) {
  out.clear();
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t z = table.sample(rng);
    for (int attempt = 0; z == positive_flat; ++attempt) {
      if (attempt == 1000) throw ConfigError("negative table cannot avoid the positive sense");
      z = table.sample(rng);
    }
    out.push_back(z);
  }
}

template <typename Real>
double sgns_update(SenseRef target, SenseRef colloc, BasicModelParams<Real>& params,
                   const UnigramTable& table, std::size_t negatives, Real lr, Rng& rng) {
  thread_local std::vector<std::size_t> negs;
  thread_local std::vector<Real> scratch;
  draw_negatives(table, colloc.flat(params.senses), negatives, rng, negs);
  return sgns_update_with_negatives<Real>(target, colloc, negs, params, lr, scratch);
}

// sigma(U_target . V_colloc): one dot product, no sampling.
template <typename Real>
double reward_bernoulli(SenseRef target, SenseRef colloc, const BasicModelParams<Real>& params) {
  return sigmoid(double(dot<Real>(params.input_row(target), params.output_row(colloc))));
}

// Full categorical collocation probability of colloc given target.
template <typename Real>
double reward_exact(SenseRef target, SenseRef colloc, const BasicModelParams<Real>& params) {
  const std::size_t total = params.sense_count();
  if (total > kExactRewardMaxSenses) {
    throw ConfigError("exact categorical reward limited to " + std::to_string(kExactRewardMaxSenses) +
                      " senses, model has " + std::to_string(total));
  }
  const auto u = params.input_row(target);
  std::vector<double> logits(total);
  for (std::size_t z = 0; z < total; ++z) logits[z] = double(dot<Real>(u, params.output.row(z)));
  const double mx = *std::max_element(logits.begin(), logits.end());
  double norm = 0.0;
  for (double x : logits) norm += std::exp(x - mx);
  return std::exp(logits[colloc.flat(params.senses)] - mx) / norm;
}

}  // namespace muse
