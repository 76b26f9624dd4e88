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

#include <cstdint>
#include <limits>
#include <string>

#include <json.hpp>

#include "muse/common.hpp"
#include "muse/representation.hpp"
#include "muse/selection.hpp"

namespace muse {

enum class Learner { PolicyGradient, QLearning };

// Which pair orientation supplies the Q-learning target.
enum class RewardDirection {
  TargetToColloc,  // sigma(U[z_ik] . V[z_jl]), what the representation module fits
  CollocToTarget,  // sigma(U[z_jl] . V[z_ik])
};

// How phase 3 reduces per-sample selector gradients within a batch.
// Mean divides by the batch size, RowMean by the number of samples that
// touched each row, Sum not at all.
enum class BatchReduction { Mean, RowMean, Sum };

inline std::string to_string(Learner l) { return l == Learner::PolicyGradient ? "policy" : "qlearning"; }
inline Learner parse_learner(const std::string& s) {
  if (s == "policy") return Learner::PolicyGradient;
  if (s == "qlearning") return Learner::QLearning;
  throw ConfigError("unknown learner '" + s + "'");
}
inline std::string to_string(RewardDirection d) {
  return d == RewardDirection::TargetToColloc ? "target-colloc" : "colloc-target";
}
inline RewardDirection parse_reward_direction(const std::string& s) {
  if (s == "target-colloc") return RewardDirection::TargetToColloc;
  if (s == "colloc-target") return RewardDirection::CollocToTarget;
  throw ConfigError("unknown reward direction '" + s + "'");
}
inline std::string to_string(BatchReduction r) {
  switch (r) {
    case BatchReduction::Mean: return "mean";
    case BatchReduction::RowMean: return "row-mean";
    case BatchReduction::Sum: return "sum";
  }
  return "?";
}
inline BatchReduction parse_batch_reduction(const std::string& s) {
  if (s == "mean") return BatchReduction::Mean;
  if (s == "row-mean") return BatchReduction::RowMean;
  if (s == "sum") return BatchReduction::Sum;
  throw ConfigError("unknown batch reduction '" + s + "'");
}

struct TrainingConfig {
  std::size_t dim = 300;
  std::size_t senses = 3;
  std::size_t window = 5;
  double lr0 = 0.025;
  double min_lr_fraction = 1e-4;
  std::size_t negatives = 25;
  double unigram_power = 0.75;
  double epsilon = 0.05;
  std::size_t batch_size = 2048;
  BatchReduction batch_reduction = BatchReduction::Mean;
  Learner learner = Learner::QLearning;
  StrategyKind strategy = StrategyKind::Boltzmann;
  RewardKind reward = RewardKind::BernoulliLik;
  RewardDirection reward_direction = RewardDirection::TargetToColloc;
  std::size_t epochs = 1;
  double subsample_t = 1e-4;
  std::uint64_t min_count = 5;
  std::size_t min_sentence_tokens = 10;
  bool lowercase = false;
  bool all_offsets = false;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  bool relaxed = false;
  std::uint64_t progress_every = 0;
  std::uint64_t checkpoint_every = 0;

  Strategy selection_strategy() const {
    if (learner == Learner::PolicyGradient) return Strategy::policy_sample();
    switch (strategy) {
      case StrategyKind::Greedy: return Strategy::greedy();
      case StrategyKind::EpsilonGreedy: return Strategy::epsilon_greedy(epsilon);
      case StrategyKind::Boltzmann: return Strategy::boltzmann();
      case StrategyKind::PolicySample: return Strategy::policy_sample();
    }
    return Strategy::greedy();
  }

  StreamOptions stream_options() const {
    StreamOptions o;
    o.window = window;
    o.subsample_t = subsample_t;
    o.all_offsets = all_offsets;
    o.corpus.min_sentence_tokens = min_sentence_tokens;
    o.corpus.lowercase = lowercase;
    return o;
  }

  void validate() const {
    if (dim < 1) throw ConfigError("dim must be >= 1");
    if (senses < 1) throw ConfigError("senses must be >= 1");
    if (window < 1) throw ConfigError("window must be >= 1");
    if (!(lr0 > 0.0)) throw ConfigError("learning rate must be > 0");
    if (!(unigram_power > 0.0 && unigram_power <= 1.0)) throw ConfigError("unigram power must lie in (0, 1]");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon must lie in [0, 1]");
    if (batch_size < 1) throw ConfigError("batch size must be >= 1");
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (threads < 1) throw ConfigError("threads must be >= 1");
    if (threads > 1 && !relaxed) throw ConfigError("multiple threads require relaxed mode");
    if (reward == RewardKind::ExactCategorical) {
      throw ConfigError("the exact categorical reward is a diagnostic, not a training reward");
    }
    if (learner == Learner::PolicyGradient) {
      if (strategy == StrategyKind::Greedy || strategy == StrategyKind::EpsilonGreedy) {
        throw ConfigError("policy gradient requires on-policy sampling; use --strategy boltzmann");
      }
      if (reward != RewardKind::ApproxLogLik) {
        throw ConfigError("policy gradient uses the realized negative-sampling log-likelihood reward");
      }
    }
  }
};

inline nlohmann::json to_json(const TrainingConfig& c) {
  return nlohmann::json{
      {"dim", c.dim},
      {"senses", c.senses},
      {"window", c.window},
      {"lr0", c.lr0},
      {"min_lr_fraction", c.min_lr_fraction},
      {"negatives", c.negatives},
      {"unigram_power", c.unigram_power},
      {"epsilon", c.epsilon},
      {"batch_size", c.batch_size},
      {"batch_reduction", to_string(c.batch_reduction)},
      {"learner", to_string(c.learner)},
      {"strategy", to_string(c.strategy)},
      {"reward", to_string(c.reward)},
      {"reward_direction", to_string(c.reward_direction)},
      {"epochs", c.epochs},
      {"subsample_t", c.subsample_t},
      {"min_count", c.min_count},
      {"min_sentence_tokens", c.min_sentence_tokens},
      {"lowercase", c.lowercase},
      {"all_offsets", c.all_offsets},
      {"seed", c.seed},
      {"threads", c.threads},
      {"relaxed", c.relaxed},
      {"progress_every", c.progress_every},
      {"checkpoint_every", c.checkpoint_every},
  };
}

inline TrainingConfig config_from_json(const nlohmann::json& j) {
  TrainingConfig c;
  try {
    c.dim = j.at("dim").get<std::size_t>();
    c.senses = j.at("senses").get<std::size_t>();
    c.window = j.at("window").get<std::size_t>();
    c.lr0 = j.at("lr0").get<double>();
    c.min_lr_fraction = j.at("min_lr_fraction").get<double>();
    c.negatives = j.at("negatives").get<std::size_t>();
    c.unigram_power = j.at("unigram_power").get<double>();
    c.epsilon = j.at("epsilon").get<double>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.batch_reduction = parse_batch_reduction(j.at("batch_reduction").get<std::string>());
    c.learner = parse_learner(j.at("learner").get<std::string>());
    c.strategy = parse_strategy(j.at("strategy").get<std::string>());
    c.reward = parse_reward(j.at("reward").get<std::string>());
    c.reward_direction = parse_reward_direction(j.at("reward_direction").get<std::string>());
    c.epochs = j.at("epochs").get<std::size_t>();
    // JSON has no infinity; a disabled threshold is written as null.
    c.subsample_t = j.at("subsample_t").is_null() ? std::numeric_limits<double>::infinity()
                                                  : j.at("subsample_t").get<double>();
    c.min_count = j.at("min_count").get<std::uint64_t>();
    c.min_sentence_tokens = j.at("min_sentence_tokens").get<std::size_t>();
    c.lowercase = j.at("lowercase").get<bool>();
    c.all_offsets = j.at("all_offsets").get<bool>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.threads = j.at("threads").get<std::size_t>();
    c.relaxed = j.at("relaxed").get<bool>();
    c.progress_every = j.at("progress_every").get<std::uint64_t>();
    c.checkpoint_every = j.at("checkpoint_every").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("config echo: ") + e.what());
  }
  return c;
}

}  // namespace muse
