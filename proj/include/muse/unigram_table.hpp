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
#include <vector>

#include "muse/common.hpp"
#include "muse/vocabulary.hpp"

namespace muse {

// Sense-level negative-sampling distribution: the smoothed word unigram
// split evenly across each word's senses. Draws are O(log S) by binary
// search over the cumulative mass.
class UnigramTable {
 public:
  UnigramTable() = default;

  UnigramTable(std::span<const std::uint64_t> counts, std::size_t senses_per_word,
               double power = 0.75)
      : senses_(senses_per_word), power_(power) {
    if (senses_per_word < 1) throw ConfigError("senses_per_word must be >= 1");
    if (!(power > 0.0 && power <= 1.0)) throw ConfigError("unigram power must lie in (0, 1]");
    if (counts.empty()) throw ConfigError("unigram table over an empty vocabulary");
    double z = 0.0;
    for (auto c : counts) z += std::pow(double(c), power);
    cumulative_.resize(counts.size() * senses_per_word);
    sense_mass_.resize(counts.size());
    double acc = 0.0;
    for (std::size_t w = 0; w < counts.size(); ++w) {
      const double share = std::pow(double(counts[w]), power) / z / double(senses_per_word);
      sense_mass_[w] = share;
      for (std::size_t k = 0; k < senses_per_word; ++k) {
        acc += share;
        cumulative_[w * senses_per_word + k] = acc;
      }
    }
    cumulative_.back() = 1.0;
  }

  std::size_t size() const { return cumulative_.size(); }
  std::size_t senses_per_word() const { return senses_; }
  double power() const { return power_; }
  const std::vector<double>& cumulative() const { return cumulative_; }

  // Mass of one flat sense; identical for every sense of a word.
  double probability(std::size_t flat) const { return sense_mass_[flat / senses_]; }

  std::size_t sample(Rng& rng) const {
    const double u = uniform01(rng);
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) --it;
    return static_cast<std::size_t>(it - cumulative_.begin());
  }

 private:
  std::vector<double> cumulative_;
  std::vector<double> sense_mass_;
  std::size_t senses_ = 1;
  double power_ = 0.75;
};

inline UnigramTable build_negative_table(const Vocabulary& vocab, std::size_t senses_per_word,
                                         double power = 0.75) {
  return UnigramTable(vocab.counts(), senses_per_word, power);
}

}  // namespace muse
