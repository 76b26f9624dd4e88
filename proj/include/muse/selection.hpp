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
#include "muse/corpus.hpp"
#include "muse/params.hpp"

namespace muse {

// Scores of every sense of one word in one context. logits are Q_k . c;
// policy is their softmax and qvalues their elementwise sigmoid, so all
// three share an argmax.
struct SelectionScores {
  WordId word = 0;
  std::vector<double> logits;
  std::vector<double> policy;
  std::vector<double> qvalues;

  std::size_t senses() const { return logits.size(); }
};

enum class StrategyKind { Greedy, EpsilonGreedy, Boltzmann, PolicySample };

struct Strategy {
  StrategyKind kind = StrategyKind::Greedy;
  double epsilon = 0.0;

  static Strategy greedy() { return {StrategyKind::Greedy, 0.0}; }
  static Strategy epsilon_greedy(double eps) {
    if (!(eps >= 0.0 && eps <= 1.0)) throw ConfigError("epsilon must lie in [0, 1]");
    return {StrategyKind::EpsilonGreedy, eps};
  }
  static Strategy boltzmann() { return {StrategyKind::Boltzmann, 0.0}; }
  static Strategy policy_sample() { return {StrategyKind::PolicySample, 0.0}; }

  bool samples_policy() const {
    return kind == StrategyKind::Boltzmann || kind == StrategyKind::PolicySample;
  }
};

inline std::string to_string(StrategyKind k) {
  switch (k) {
    case StrategyKind::Greedy: return "greedy";
    case StrategyKind::EpsilonGreedy: return "egreedy";
    case StrategyKind::Boltzmann: return "boltzmann";
    case StrategyKind::PolicySample: return "policy";
  }
  return "?";
}

inline StrategyKind parse_strategy(const std::string& s) {
  if (s == "greedy") return StrategyKind::Greedy;
  if (s == "egreedy" || s == "epsilon-greedy") return StrategyKind::EpsilonGreedy;
  if (s == "boltzmann") return StrategyKind::Boltzmann;
  if (s == "policy") return StrategyKind::PolicySample;
  throw ConfigError("unknown strategy '" + s + "'");
}

// Sum of context word embeddings; the target is not part of the window.
template <typename Real>
void encode_context(const ContextWindow& window, const BasicModelParams<Real>& params,
                    std::span<Real> out) {
  std::fill(out.begin(), out.end(), Real(0));
  window.for_each_context([&](WordId w) { axpy<Real>(Real(1), params.context.row(w), out); });
}

template <typename Real>
std::vector<Real> encode_context(const ContextWindow& window, const BasicModelParams<Real>& params) {
  std::vector<Real> c(params.dim);
  encode_context<Real>(window, params, c);
  return c;
}

// Max-shifted softmax.
inline void softmax(std::span<const double> logits, std::span<double> out) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    out[k] = std::exp(logits[k] - mx);
    z += out[k];
  }
  for (auto& p : out) p /= z;
}

inline void fill_scores(SelectionScores& s) {
  const std::size_t n = s.logits.size();
  s.policy.resize(n);
  s.qvalues.resize(n);
  softmax(s.logits, s.policy);
  for (std::size_t k = 0; k < n; ++k) s.qvalues[k] = sigmoid(s.logits[k]);
}

template <typename Real>
void score_from_context(WordId word, std::span<const Real> context, const BasicModelParams<Real>& params,
                        SelectionScores& s) {
  s.word = word;
  s.logits.resize(params.senses);
  for (std::size_t k = 0; k < params.senses; ++k) {
    s.logits[k] = double(dot<Real>(params.selector_row(word, k), context));
  }
  fill_scores(s);
}

template <typename Real>
SelectionScores score_senses(const ContextWindow& window, const BasicModelParams<Real>& params) {
  SelectionScores s;
  const auto c = encode_context(window, params);
  score_from_context<Real>(window.target, c, params, s);
  return s;
}

// Lowest index wins ties.
inline std::size_t argmax_index(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (v[k] > v[best]) best = k;
  }
  return best;
}

inline std::size_t sample_categorical(std::span<const double> probs, Rng& rng) {
  const double u = uniform01(rng);
  double acc = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    acc += probs[k];
    if (u < acc) return k;
  }
  return probs.size() - 1;
}

// Greedy picks the largest Q-value. It is taken over the logits, which
// share the argmax but do not saturate to equal values.
inline SenseRef select_sense(const SelectionScores& scores, const Strategy& strategy, Rng& rng) {
  std::size_t k = 0;
  switch (strategy.kind) {
    case StrategyKind::Greedy:
      k = argmax_index(scores.logits);
      break;
    case StrategyKind::EpsilonGreedy:
      if (uniform01(rng) < strategy.epsilon) {
        k = uniform_index(rng, scores.senses());
      } else {
        k = argmax_index(scores.logits);
      }
      break;
    case StrategyKind::Boltzmann:
    case StrategyKind::PolicySample:
      k = sample_categorical(scores.policy, rng);
      break;
  }
  return {scores.word, static_cast<std::uint32_t>(k)};
}

// Greedy sense for every position, each chosen independently from its own
// +-m window: O(n L) senses examined for L tokens.
template <typename Real>
std::vector<SenseRef> decode_sequence(std::span<const WordId> tokens, const BasicModelParams<Real>& params,
                                      std::size_t m) {
  std::vector<SenseRef> out;
  out.reserve(tokens.size());
  std::vector<Real> c(params.dim);
  SelectionScores s;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    std::fill(c.begin(), c.end(), Real(0));
    const std::size_t lo = t >= m ? t - m : 0;
    const std::size_t hi = std::min(tokens.size(), t + m + 1);
    for (std::size_t j = lo; j < hi; ++j) {
      if (j != t) axpy<Real>(Real(1), params.context.row(tokens[j]), c);
    }
    score_from_context<Real>(tokens[t], c, params, s);
    out.push_back({tokens[t], static_cast<std::uint32_t>(argmax_index(s.logits))});
  }
  return out;
}

}  // namespace muse
