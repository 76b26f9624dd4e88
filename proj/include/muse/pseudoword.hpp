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

#include <cctype>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "muse/common.hpp"
#include "muse/vocabulary.hpp"

namespace muse {

struct MergePair {
  std::string first;
  std::string second;
  std::string pseudoword;
};

struct MergeReport {
  // Rewritten occurrences per source word, keyed by the source word.
  std::map<std::string, std::uint64_t> rewritten;
  std::uint64_t total_rewritten = 0;
  std::uint64_t total_tokens = 0;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failure on '" + path + "'");
  return std::move(ss).str();
}

// Rewrites every occurrence of each pair's words to its pseudoword, leaving
// all other bytes untouched. Each rewritten occurrence gets one
// `position<TAB>original_word` label line; position is the 0-based index of
// the token among all whitespace-separated tokens of the file.
inline MergeReport make_pseudoword_corpus(const std::string& corpus_path,
                                          const std::vector<MergePair>& pairs,
                                          const std::string& out_path,
                                          const std::string& labels_path) {
  std::unordered_map<std::string, const MergePair*> rewrite;
  std::set<std::string> pseudo;
  for (const auto& p : pairs) {
    if (p.first == p.second) throw ConfigError("merge pair needs two distinct words: " + p.first);
    if (p.pseudoword.empty() || p.first.empty() || p.second.empty()) {
      throw ConfigError("merge pair words must be non-empty");
    }
    for (const auto* w : {&p.first, &p.second}) {
      if (!rewrite.emplace(*w, &p).second) throw ConfigError("word merged twice: " + *w);
    }
    if (!pseudo.insert(p.pseudoword).second) {
      throw ConfigError("pseudoword used twice: " + p.pseudoword);
    }
  }
  for (const auto& p : pseudo) {
    if (rewrite.count(p)) throw ConfigError("pseudoword collides with a merged word: " + p);
  }

  const std::string text = read_file(corpus_path);
  std::string out;
  out.reserve(text.size());
  std::ostringstream labels;
  MergeReport report;
  for (const auto& p : pairs) {
    report.rewritten[p.first] = 0;
    report.rewritten[p.second] = 0;
  }

  std::size_t i = 0;
  while (i < text.size()) {
    if (std::isspace(static_cast<unsigned char>(text[i]))) {
      out.push_back(text[i++]);
      continue;
    }
    const std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    const std::string token = text.substr(start, i - start);
    if (pseudo.count(token)) {
      throw ConfigError("pseudoword '" + token + "' already occurs in the corpus");
    }
    auto it = rewrite.find(token);
    if (it != rewrite.end()) {
      out += it->second->pseudoword;
      labels << report.total_tokens << '\t' << token << '\n';
      ++report.rewritten[token];
      ++report.total_rewritten;
    } else {
      out += token;
    }
    ++report.total_tokens;
  }

  std::ofstream o(out_path, std::ios::binary);
  if (!o) throw IoError("cannot write '" + out_path + "'");
  o << out;
  std::ofstream l(labels_path, std::ios::binary);
  if (!l) throw IoError("cannot write '" + labels_path + "'");
  l << labels.str();
  if (!o || !l) throw IoError("write failure producing pseudoword corpus");
  return report;
}

struct PseudowordLabel {
  std::uint64_t position = 0;
  std::string original;
};

inline std::vector<PseudowordLabel> load_pseudoword_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open labels '" + path + "'");
  std::vector<PseudowordLabel> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw FormatError("labels: expected position<TAB>word");
    out.push_back({std::stoull(line.substr(0, tab)), line.substr(tab + 1)});
  }
  return out;
}

// One labelled pseudoword occurrence inside a held-out sentence.
struct LabelledOccurrence {
  std::vector<std::string> sentence;
  std::size_t index = 0;
  std::string pseudoword;
  std::string original;
};

struct PseudowordSplit {
  std::vector<LabelledOccurrence> held_out;
  std::uint64_t train_lines = 0;
  std::uint64_t held_out_lines = 0;
};

// Splits a labelled pseudoword corpus by line: every `stride`-th line
// (starting at line 0) is held out, the rest is written to train_path.
inline PseudowordSplit split_pseudoword_corpus(const std::string& corpus_path,
                                               const std::string& labels_path,
                                               const std::string& train_path,
                                               std::size_t stride = 10) {
  if (stride < 2) throw ConfigError("held-out stride must be >= 2");
  const auto labels = load_pseudoword_labels(labels_path);
  std::unordered_map<std::uint64_t, std::string> by_pos;
  for (const auto& l : labels) by_pos.emplace(l.position, l.original);

  std::ifstream in(corpus_path);
  if (!in) throw IoError("cannot open corpus '" + corpus_path + "'");
  std::ofstream train(train_path, std::ios::binary);
  if (!train) throw IoError("cannot write '" + train_path + "'");

  PseudowordSplit split;
  std::string line;
  std::vector<std::string_view> toks;
  std::uint64_t position = 0;
  for (std::uint64_t lineno = 0; std::getline(in, line); ++lineno) {
    split_tokens(line, toks);
    if (lineno % stride == 0) {
      ++split.held_out_lines;
      std::vector<std::string> sentence(toks.begin(), toks.end());
      for (std::size_t i = 0; i < toks.size(); ++i) {
        auto it = by_pos.find(position + i);
        if (it != by_pos.end()) {
          split.held_out.push_back({sentence, i, sentence[i], it->second});
        }
      }
    } else {
      ++split.train_lines;
      train << line << '\n';
    }
    position += toks.size();
  }
  return split;
}

}  // namespace muse
