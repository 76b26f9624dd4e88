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

#include <map>
#include <string>
#include <vector>

#include "muse/evaluation.hpp"
#include "muse/pseudoword.hpp"
#include "muse/selection.hpp"

namespace muse {

// Greedy sense selection on labelled pseudoword occurrences, scored under
// the majority mapping: each sense is credited with the source word it is
// most often chosen for.
struct SelectionAccuracy {
  std::string pseudoword;
  std::size_t occurrences = 0;
  std::size_t correct = 0;
  // counts[sense][source word]
  std::map<std::uint32_t, std::map<std::string, std::size_t>> counts;
  double accuracy() const { return occurrences ? double(correct) / double(occurrences) : 0.0; }
  // Share of the most frequent source word: the score of a selector that
  // always picks the same sense.
  double majority_baseline() const {
    std::map<std::string, std::size_t> per_source;
    for (const auto& [sense, m] : counts) {
      for (const auto& [src, c] : m) per_source[src] += c;
    }
    std::size_t best = 0;
    for (const auto& [src, c] : per_source) best = std::max(best, c);
    return occurrences ? double(best) / double(occurrences) : 0.0;
  }
};

template <typename Real>
std::vector<SelectionAccuracy> sense_selection_accuracy(const std::vector<LabelledOccurrence>& occurrences,
                                                        const BasicModelParams<Real>& params, const Vocabulary& vocab,
                                                        std::size_t m) {
  std::map<std::string, SelectionAccuracy> by_word;
  for (const auto& occ : occurrences) {
    MarkedContext c{occ.pseudoword, occ.sentence, occ.index};
    const auto win = context_window(c, vocab, m);
    if (!win) continue;
    const auto s = score_senses(*win, params);
    auto& acc = by_word[occ.pseudoword];
    acc.pseudoword = occ.pseudoword;
    ++acc.counts[static_cast<std::uint32_t>(argmax_index(s.logits))][occ.original];
    ++acc.occurrences;
  }
  std::vector<SelectionAccuracy> out;
  for (auto& [w, acc] : by_word) {
    acc.correct = 0;
    for (const auto& [sense, m2] : acc.counts) {
      std::size_t best = 0;
      for (const auto& [src, c] : m2) best = std::max(best, c);
      acc.correct += best;
    }
    out.push_back(std::move(acc));
  }
  return out;
}

}  // namespace muse
