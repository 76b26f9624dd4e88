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
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "muse/common.hpp"
#include "muse/corpus.hpp"
#include "muse/params.hpp"
#include "muse/selection.hpp"
#include "muse/vocabulary.hpp"

namespace muse {

// A word occurrence inside a tokenized context.
struct MarkedContext {
  std::string word;
  std::vector<std::string> tokens;
  std::size_t index = 0;
};

struct ScwsItem {
  MarkedContext first;
  MarkedContext second;
  double human_score = 0.0;
};

namespace detail {

inline std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(s);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  return out;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline void replace_all(std::string& s, const std::string& from, const std::string& to) {
  for (std::size_t p = s.find(from); p != std::string::npos; p = s.find(from, p + to.size())) {
    s.replace(p, from.size(), to);
  }
}

}  // namespace detail

// Strips <b>...</b> markup from a context and records the marked token.
inline MarkedContext parse_marked_context(std::string text, std::string word) {
  ascii_lower(text);
  ascii_lower(word);
  detail::replace_all(text, "<b>", " \x01 ");
  detail::replace_all(text, "</b>", " \x02 ");
  std::vector<std::string_view> toks;
  split_tokens(text, toks);
  MarkedContext c;
  c.word = word;
  bool marked = false;
  bool found = false;
  for (auto t : toks) {
    if (t == "\x01") {
      marked = true;
      continue;
    }
    if (t == "\x02") {
      marked = false;
      continue;
    }
    if (marked && !found) {
      c.index = c.tokens.size();
      found = true;
    }
    c.tokens.emplace_back(t);
  }
  if (!found) throw FormatError("context has no <b>...</b> target marker");
  return c;
}

// SCWS TSV: id, word1, POS1, word2, POS2, context1, context2, mean rating,
// then individual ratings (ignored).
inline ScwsItem parse_scws_line(const std::string& line) {
  auto f = detail::split_on(line, '\t');
  if (f.size() < 8) throw FormatError("SCWS line has " + std::to_string(f.size()) + " fields, expected >= 8");
  ScwsItem item;
  item.first = parse_marked_context(f[5], detail::trim(f[1]));
  item.second = parse_marked_context(f[6], detail::trim(f[3]));
  const std::string rating = detail::trim(f[7]);
  const auto [end, ec] = std::from_chars(rating.data(), rating.data() + rating.size(), item.human_score);
  if (ec != std::errc() || end != rating.data() + rating.size() || !std::isfinite(item.human_score)) {
    throw FormatError("SCWS line has a non-numeric rating '" + rating + "'");
  }
  return item;
}

inline std::vector<ScwsItem> load_scws(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open SCWS file '" + path + "'");
  std::vector<ScwsItem> items;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    try {
      items.push_back(parse_scws_line(line));
    } catch (const FormatError& e) {
      throw FormatError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return items;
}

// Window of radius m around the marked word after dropping OOV context
// tokens; nullopt when the marked word itself is out of vocabulary.
inline std::optional<ContextWindow> context_window(const MarkedContext& c, const Vocabulary& vocab, std::size_t m) {
  const WordId target = vocab.find(c.word);
  if (target == Vocabulary::kNone) return std::nullopt;
  std::vector<WordId> seq;
  std::size_t at = 0;
  for (std::size_t i = 0; i < c.tokens.size(); ++i) {
    if (i == c.index) {
      at = seq.size();
      seq.push_back(target);
      continue;
    }
    const WordId id = vocab.find(c.tokens[i]);
    if (id != Vocabulary::kNone) seq.push_back(id);
  }
  return make_window(seq, at, m);
}

template <typename Real>
std::optional<double> max_sim_c(const ScwsItem& item, const BasicModelParams<Real>& params, const Vocabulary& vocab,
                                std::size_t m) {
  const auto wi = context_window(item.first, vocab, m);
  const auto wj = context_window(item.second, vocab, m);
  if (!wi || !wj) return std::nullopt;
  const auto si = score_senses(*wi, params);
  const auto sj = score_senses(*wj, params);
  const SenseRef zi{wi->target, static_cast<std::uint32_t>(argmax_index(si.policy))};
  const SenseRef zj{wj->target, static_cast<std::uint32_t>(argmax_index(sj.policy))};
  return cosine<Real>(params.input_row(zi), params.input_row(zj));
}

template <typename Real>
std::optional<double> avg_sim_c(const ScwsItem& item, const BasicModelParams<Real>& params, const Vocabulary& vocab,
                                std::size_t m) {
  const auto wi = context_window(item.first, vocab, m);
  const auto wj = context_window(item.second, vocab, m);
  if (!wi || !wj) return std::nullopt;
  const auto si = score_senses(*wi, params);
  const auto sj = score_senses(*wj, params);
  double sum = 0.0;
  for (std::uint32_t k = 0; k < params.senses; ++k) {
    for (std::uint32_t l = 0; l < params.senses; ++l) {
      sum += si.policy[k] * sj.policy[l] *
             cosine<Real>(params.input_row({wi->target, k}), params.input_row({wj->target, l}));
    }
  }
  return sum;
}

// Ranks starting at 1; tied values share their average rank.
inline std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = (double(i) + double(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

inline std::optional<double> pearson(std::span<const double> a, std::span<const double> b) {
  const double n = double(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return std::nullopt;
  return sab / std::sqrt(saa * sbb);
}

// Tie-corrected Spearman rho; nullopt when either side has zero variance.
inline std::optional<double> spearman(std::span<const double> model, std::span<const double> human) {
  if (model.size() != human.size()) throw ConfigError("spearman: sequences differ in length");
  if (model.empty()) throw ConfigError("spearman: empty sequences");
  const auto ra = average_ranks(model);
  const auto rb = average_ranks(human);
  return pearson(ra, rb);
}

struct ScwsReport {
  std::optional<double> max_sim_c;
  std::optional<double> avg_sim_c;
  std::size_t scored = 0;
  std::size_t skipped = 0;
};

template <typename Real>
ScwsReport evaluate_scws(const std::vector<ScwsItem>& items, const BasicModelParams<Real>& params,
                         const Vocabulary& vocab, std::size_t m) {
  std::vector<double> maxs, avgs, human;
  ScwsReport r;
  for (const auto& item : items) {
    const auto a = max_sim_c(item, params, vocab, m);
    if (!a) {
      ++r.skipped;
      continue;
    }
    maxs.push_back(*a);
    avgs.push_back(*avg_sim_c(item, params, vocab, m));
    human.push_back(item.human_score);
  }
  r.scored = human.size();
  if (r.scored > 0) {
    r.max_sim_c = spearman(maxs, human);
    r.avg_sim_c = spearman(avgs, human);
  }
  return r;
}

struct SynonymQuestion {
  std::string question;
  std::vector<std::string> candidates;
  std::size_t answer = 0;
};

// `question | candA candB candC candD | answer_letter`
inline SynonymQuestion parse_synonym_line(const std::string& line) {
  auto f = detail::split_on(line, '|');
  if (f.size() != 3) throw FormatError("synonym line needs 3 '|'-separated fields");
  SynonymQuestion q;
  q.question = detail::trim(f[0]);
  ascii_lower(q.question);
  std::vector<std::string_view> toks;
  std::string cands = f[1];
  ascii_lower(cands);
  split_tokens(cands, toks);
  if (toks.size() != 4) throw FormatError("synonym question needs exactly 4 candidates");
  q.candidates.assign(toks.begin(), toks.end());
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = i + 1; j < 4; ++j) {
      if (q.candidates[i] == q.candidates[j]) throw FormatError("synonym candidates must be distinct");
    }
  }
  const std::string ans = detail::trim(f[2]);
  if (ans.size() != 1) throw FormatError("answer must be a single letter a-d");
  const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(ans[0])));
  if (c < 'a' || c > 'd') throw FormatError("answer must be a single letter a-d");
  q.answer = static_cast<std::size_t>(c - 'a');
  return q;
}

inline std::vector<SynonymQuestion> load_synonyms(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open synonym file '" + path + "'");
  std::vector<SynonymQuestion> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    try {
      out.push_back(parse_synonym_line(line));
    } catch (const FormatError& e) {
      throw FormatError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

// Largest cosine over all sense pairs of two words.
template <typename Real>
double max_sense_cosine(WordId a, WordId b, const BasicModelParams<Real>& params) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::uint32_t k = 0; k < params.senses; ++k) {
    for (std::uint32_t l = 0; l < params.senses; ++l) {
      best = std::max(best, cosine<Real>(params.input_row({a, k}), params.input_row({b, l})));
    }
  }
  return best;
}

// Chosen candidate index, or nullopt when the question word is OOV or no
// candidate is in vocabulary.
template <typename Real>
std::optional<std::size_t> answer_synonym(const SynonymQuestion& q, const BasicModelParams<Real>& params,
                                          const Vocabulary& vocab) {
  const WordId qw = vocab.find(q.question);
  if (qw == Vocabulary::kNone) return std::nullopt;
  std::optional<std::size_t> best;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < q.candidates.size(); ++i) {
    const WordId cw = vocab.find(q.candidates[i]);
    if (cw == Vocabulary::kNone) continue;
    const double s = max_sense_cosine(qw, cw, params);
    if (!best || s > best_score) {
      best = i;
      best_score = s;
    }
  }
  return best;
}

struct SynonymReport {
  std::size_t correct = 0;
  std::size_t answered = 0;
  std::size_t skipped = 0;
  double accuracy() const { return answered ? double(correct) / double(answered) : 0.0; }
};

template <typename Real>
SynonymReport evaluate_synonyms(const std::vector<SynonymQuestion>& qs, const BasicModelParams<Real>& params,
                                const Vocabulary& vocab) {
  SynonymReport r;
  for (const auto& q : qs) {
    const auto a = answer_synonym(q, params, vocab);
    if (!a) {
      ++r.skipped;
      continue;
    }
    ++r.answered;
    if (*a == q.answer) ++r.correct;
  }
  return r;
}

enum class KnnMetric { Cosine, Collocation };

inline KnnMetric parse_knn_metric(const std::string& s) {
  if (s == "cosine") return KnnMetric::Cosine;
  if (s == "collocation") return KnnMetric::Collocation;
  throw ConfigError("unknown k-NN metric '" + s + "'");
}

struct Neighbor {
  SenseRef sense;
  double score = 0.0;
};

// Nearest senses to `query`, excluding every sense of the query word.
// Collocation ranks by U[query] . V[z] (the sigmoid is monotone, so the raw
// dot product is reported); cosine ranks by cos(U[query], U[z]). Ties go to
// the lower flat index.
template <typename Real>
std::vector<Neighbor> knn_senses(SenseRef query, const BasicModelParams<Real>& params, std::size_t k,
                                 KnnMetric metric) {
  if (k < 1) throw ConfigError("k must be >= 1");
  const auto u = params.input_row(query);
  const std::size_t n = params.senses;
  std::vector<std::pair<double, std::size_t>> all;
  all.reserve(params.sense_count());
  for (std::size_t z = 0; z < params.sense_count(); ++z) {
    if (z / n == query.word) continue;
    const double s = metric == KnnMetric::Collocation ? double(dot<Real>(u, params.output.row(z)))
                                                      : cosine<Real>(u, params.input.row(z));
    all.emplace_back(s, z);
  }
  const std::size_t take = std::min(k, all.size());
  auto better = [](const auto& a, const auto& b) { return a.first != b.first ? a.first > b.first : a.second < b.second; };
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take), all.end(), better);
  std::vector<Neighbor> out;
  for (std::size_t i = 0; i < take; ++i) out.push_back({SenseRef::from_flat(all[i].second, n), all[i].first});
  return out;
}

}  // namespace muse
