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
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "muse/common.hpp"

namespace muse {

// Whitespace tokenizer; the only tokenization the corpus contract allows.
inline void split_tokens(std::string_view line, std::vector<std::string_view>& out) {
  out.clear();
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
}

inline void ascii_lower(std::string& s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}

struct CorpusOptions {
  // Sentences with fewer raw tokens are ignored; 0 disables the filter.
  std::size_t min_sentence_tokens = 10;
  bool lowercase = false;
};

class Vocabulary {
 public:
  static constexpr WordId kNone = std::numeric_limits<WordId>::max();

  Vocabulary() = default;

  // Words must already be in id order (descending count, ties lexicographic).
  Vocabulary(std::vector<std::string> words, std::vector<std::uint64_t> counts,
             std::uint64_t min_count = 1, std::uint64_t dropped_tokens = 0)
      : words_(std::move(words)), counts_(std::move(counts)),
        min_count_(min_count), dropped_tokens_(dropped_tokens) {
    if (words_.size() != counts_.size()) {
      throw ConfigError("vocabulary: words/counts length mismatch");
    }
    index_.reserve(words_.size());
    for (std::size_t i = 0; i < words_.size(); ++i) {
      if (!index_.emplace(words_[i], static_cast<WordId>(i)).second) {
        throw FormatError("vocabulary: duplicate word '" + words_[i] + "'");
      }
      total_tokens_ += counts_[i];
    }
  }

  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }
  const std::string& word(WordId id) const { return words_.at(id); }
  std::uint64_t count(WordId id) const { return counts_.at(id); }
  const std::vector<std::string>& words() const { return words_; }
  const std::vector<std::uint64_t>& counts() const { return counts_; }
  std::uint64_t total_tokens() const { return total_tokens_; }
  std::uint64_t dropped_tokens() const { return dropped_tokens_; }
  std::uint64_t min_count() const { return min_count_; }

  WordId find(std::string_view w) const {
    auto it = index_.find(std::string(w));
    return it == index_.end() ? kNone : it->second;
  }
  bool contains(std::string_view w) const { return find(w) != kNone; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.words_ == b.words_ && a.counts_ == b.counts_;
  }

 private:
  std::vector<std::string> words_;
  std::vector<std::uint64_t> counts_;
  std::unordered_map<std::string, WordId> index_;
  std::uint64_t total_tokens_ = 0;
  std::uint64_t min_count_ = 1;
  std::uint64_t dropped_tokens_ = 0;
};

// Builds a vocabulary from raw counts: keeps count >= min_count, orders by
// descending count with lexicographic ties.
inline Vocabulary vocabulary_from_counts(
    const std::unordered_map<std::string, std::uint64_t>& raw, std::uint64_t min_count) {
  std::vector<std::pair<std::string, std::uint64_t>> kept;
  std::uint64_t dropped = 0;
  for (const auto& [w, c] : raw) {
    if (c >= min_count) {
      kept.emplace_back(w, c);
    } else {
      dropped += c;
    }
  }
  if (kept.empty()) {
    throw ConfigError("vocabulary is empty after applying min_count=" + std::to_string(min_count));
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  std::vector<std::string> words;
  std::vector<std::uint64_t> counts;
  words.reserve(kept.size());
  counts.reserve(kept.size());
  for (auto& [w, c] : kept) {
    words.push_back(std::move(w));
    counts.push_back(c);
  }
  return Vocabulary(std::move(words), std::move(counts), min_count, dropped);
}

inline Vocabulary build_vocabulary(const std::string& corpus_path, std::uint64_t min_count,
                                   const CorpusOptions& options = {}) {
  std::ifstream in(corpus_path);
  if (!in) throw IoError("cannot open corpus '" + corpus_path + "'");
  std::unordered_map<std::string, std::uint64_t> raw;
  std::string line;
  std::vector<std::string_view> toks;
  while (std::getline(in, line)) {
    if (options.lowercase) ascii_lower(line);
    split_tokens(line, toks);
    if (toks.empty() || toks.size() < options.min_sentence_tokens) continue;
    for (auto t : toks) ++raw[std::string(t)];
  }
  if (in.bad()) throw IoError("read failure on '" + corpus_path + "'");
  return vocabulary_from_counts(raw, min_count);
}

// word2vec source-code subsampling rule: min(1, (sqrt(f/t) + 1) * t / f).
inline double keep_probability(double frequency, double threshold) {
  if (!(frequency > 0.0)) return 1.0;
  const double r = frequency / threshold;
  return std::min(1.0, (std::sqrt(r) + 1.0) / r);
}

inline double keep_probability(WordId word, const Vocabulary& vocab, double threshold) {
  const double f = double(vocab.count(word)) / double(vocab.total_tokens());
  return keep_probability(f, threshold);
}

// Text format: one `word<TAB>count` per line, id = line number.
inline void save_vocabulary(const Vocabulary& vocab, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write vocabulary '" + path + "'");
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    out << vocab.words()[i] << '\t' << vocab.counts()[i] << '\n';
  }
  if (!out) throw IoError("write failure on '" + path + "'");
}

inline Vocabulary load_vocabulary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open vocabulary '" + path + "'");
  std::vector<std::string> words;
  std::vector<std::uint64_t> counts;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw FormatError(path + ":" + std::to_string(lineno) + ": expected word<TAB>count");
    }
    words.push_back(line.substr(0, tab));
    try {
      counts.push_back(std::stoull(line.substr(tab + 1)));
    } catch (const std::exception&) {
      throw FormatError(path + ":" + std::to_string(lineno) + ": bad count");
    }
  }
  std::uint64_t min_count = counts.empty() ? 1 : *std::min_element(counts.begin(), counts.end());
  return Vocabulary(std::move(words), std::move(counts), min_count);
}

}  // namespace muse
