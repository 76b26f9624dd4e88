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
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "muse/common.hpp"
#include "muse/vocabulary.hpp"

namespace muse {

// Local context of one token: up to m surviving neighbours on each side,
// truncated at the sentence boundary. The target itself is not included.
struct ContextWindow {
  WordId target = 0;
  std::vector<WordId> left;
  std::vector<WordId> right;

  std::size_t size() const { return left.size() + right.size(); }

  template <typename F>
  void for_each_context(F&& f) const {
    for (auto w : left) f(w);
    for (auto w : right) f(w);
  }

  friend bool operator==(const ContextWindow&, const ContextWindow&) = default;
};

inline void fill_window(std::span<const WordId> seq, std::size_t t, std::size_t m,
                        ContextWindow& w) {
  w.target = seq[t];
  const std::size_t lo = t >= m ? t - m : 0;
  const std::size_t hi = std::min(seq.size(), t + m + 1);
  w.left.assign(seq.begin() + lo, seq.begin() + t);
  w.right.assign(seq.begin() + t + 1, seq.begin() + hi);
}

inline ContextWindow make_window(std::span<const WordId> seq, std::size_t t, std::size_t m) {
  ContextWindow w;
  fill_window(seq, t, m, w);
  return w;
}

struct CollocationSample {
  ContextWindow target_window;
  ContextWindow colloc_window;
  int offset = 0;

  friend bool operator==(const CollocationSample&, const CollocationSample&) = default;
};

struct StreamOptions {
  std::size_t window = 5;
  // Subsampling threshold t; <= 0 or infinity disables subsampling.
  double subsample_t = 1e-4;
  // Emit every valid offset instead of one uniformly sampled offset.
  bool all_offsets = false;
  CorpusOptions corpus;
};

// Maps a raw sentence to surviving ids: OOV tokens dropped, then subsampling.
class SentenceFilter {
 public:
  SentenceFilter(const Vocabulary& vocab, const StreamOptions& opts) : vocab_(vocab), opts_(opts) {
    const bool enabled = opts.subsample_t > 0.0 && std::isfinite(opts.subsample_t);
    keep_.assign(vocab.size(), 1.0);
    if (enabled) {
      for (WordId i = 0; i < vocab.size(); ++i) keep_[i] = keep_probability(i, vocab, opts.subsample_t);
    }
  }

  // Returns false when the sentence is rejected by the length filter.
  bool apply(std::string& line, Rng& rng, std::vector<WordId>& out) {
    if (opts_.corpus.lowercase) ascii_lower(line);
    split_tokens(line, toks_);
    out.clear();
    if (toks_.empty() || toks_.size() < opts_.corpus.min_sentence_tokens) return false;
    for (auto t : toks_) {
      const WordId id = vocab_.find(t);
      if (id == Vocabulary::kNone) continue;
      if (keep_[id] < 1.0 && uniform01(rng) >= keep_[id]) continue;
      out.push_back(id);
    }
    return true;
  }

  double keep(WordId id) const { return keep_[id]; }

 private:
  const Vocabulary& vocab_;
  StreamOptions opts_;
  std::vector<double> keep_;
  std::vector<std::string_view> toks_;
};

// Single-pass, single-reader stream of collocation samples. A byte range
// [begin, end) restricts the stream to the lines starting inside it, which
// is how parallel training shards the corpus.
class SampleStream {
 public:
  SampleStream(const std::string& path, const Vocabulary& vocab, StreamOptions opts,
               std::uint64_t seed, std::uint64_t begin = 0,
               std::uint64_t end = std::numeric_limits<std::uint64_t>::max())
      : in_(path, std::ios::binary), filter_(vocab, opts), opts_(opts), rng_(seed), end_(end) {
    if (!in_) throw IoError("cannot open corpus '" + path + "'");
    if (opts_.window < 1) throw ConfigError("window radius must be >= 1");
    if (begin > 0) {
      in_.seekg(static_cast<std::streamoff>(begin - 1));
      std::string skip;
      std::getline(in_, skip);  // finish the line straddling `begin`
    }
  }

  bool next(CollocationSample& s) {
    while (true) {
      if (pos_ < seq_.size()) {
        if (emit(s)) return true;
        continue;
      }
      if (!load_sentence()) return false;
    }
  }

  std::uint64_t sentences_read() const { return sentences_; }

 private:
  bool load_sentence() {
    while (true) {
      const auto at = in_.tellg();
      if (at < 0 || static_cast<std::uint64_t>(at) >= end_) return false;
      if (!std::getline(in_, line_)) return false;
      if (!filter_.apply(line_, rng_, seq_)) continue;
      ++sentences_;
      pos_ = 0;
      pending_.clear();
      if (!seq_.empty()) return true;
    }
  }

  // Produces the next sample for the current position; false when the
  // position yields none (no valid offset).
  bool emit(CollocationSample& s) {
    const std::size_t m = opts_.window;
    const std::size_t t = pos_;
    const int lo = static_cast<int>(std::min(m, t));
    const int hi = static_cast<int>(std::min(m, seq_.size() - 1 - t));
    if (lo + hi == 0) {
      ++pos_;
      return false;
    }
    int offset;
    if (opts_.all_offsets) {
      if (pending_.empty()) {
        for (int o = -lo; o <= hi; ++o) {
          if (o != 0) pending_.push_back(o);
        }
        std::reverse(pending_.begin(), pending_.end());
      }
      offset = pending_.back();
      pending_.pop_back();
      if (pending_.empty()) ++pos_;
    } else {
      const auto r = static_cast<int>(uniform_index(rng_, static_cast<std::uint64_t>(lo + hi)));
      offset = r < lo ? r - lo : r - lo + 1;
      ++pos_;
    }
    fill_window(seq_, t, m, s.target_window);
    fill_window(seq_, static_cast<std::size_t>(static_cast<int>(t) + offset), m, s.colloc_window);
    s.offset = offset;
    return true;
  }

  std::ifstream in_;
  SentenceFilter filter_;
  StreamOptions opts_;
  Rng rng_;
  std::uint64_t end_;
  std::string line_;
  std::vector<WordId> seq_;
  std::vector<int> pending_;
  std::size_t pos_ = 0;
  std::uint64_t sentences_ = 0;
};

// Collects the full stream; convenient for tests and small corpora.
inline std::vector<CollocationSample> stream_samples(const std::string& path, const Vocabulary& vocab,
                                                     const StreamOptions& opts, std::uint64_t seed) {
  SampleStream stream(path, vocab, opts, seed);
  std::vector<CollocationSample> out;
  CollocationSample s;
  while (stream.next(s)) out.push_back(s);
  return out;
}

// Byte offsets splitting a file into `shards` ranges of roughly equal size.
inline std::vector<std::uint64_t> shard_boundaries(const std::string& path, std::size_t shards) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw IoError("cannot open corpus '" + path + "'");
  const auto size = static_cast<std::uint64_t>(in.tellg());
  std::vector<std::uint64_t> b(shards + 1);
  for (std::size_t i = 0; i <= shards; ++i) b[i] = size * i / shards;
  return b;
}

}  // namespace muse
