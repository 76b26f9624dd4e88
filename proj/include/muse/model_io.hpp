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

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "muse/config.hpp"
#include "muse/params.hpp"
#include "muse/vocabulary.hpp"

namespace muse {

static_assert(std::endian::native == std::endian::little, "model container assumes a little-endian host");

inline constexpr char kModelMagic[5] = {'M', 'U', 'S', 'E', '1'};

struct LoadedModel {
  ModelParams params;
  Vocabulary vocab;
  TrainingConfig config;
};

namespace detail {

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}
  void bytes(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }
  void u32(std::uint32_t v) { bytes(&v, sizeof v); }
  void u64(std::uint64_t v) { bytes(&v, sizeof v); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  void floats(const std::vector<float>& v) { bytes(v.data(), v.size() * sizeof(float)); }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  Reader(std::istream& in, std::string path) : in_(in), path_(std::move(path)) {}
  void bytes(void* p, std::size_t n, const char* section) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      throw FormatError(path_ + ": truncated model file, missing " + section + " section");
    }
  }
  std::uint32_t u32(const char* section) {
    std::uint32_t v;
    bytes(&v, sizeof v, section);
    return v;
  }
  std::uint64_t u64(const char* section) {
    std::uint64_t v;
    bytes(&v, sizeof v, section);
    return v;
  }
  std::string str(const char* section) {
    const auto n = u32(section);
    std::string s(n, '\0');
    bytes(s.data(), n, section);
    return s;
  }
  void floats(std::vector<float>& v, const char* section) { bytes(v.data(), v.size() * sizeof(float), section); }

 private:
  std::istream& in_;
  std::string path_;
};

}  // namespace detail

// Layout: magic "MUSE1"; u32 vocab_size, d, n; per word a u32-length-prefixed
// UTF-8 string and a u64 count; P, Q, U, V as contiguous f32 blocks; a
// u32-length-prefixed JSON config echo. All integers little-endian.
inline void save_model(const ModelParams& params, const Vocabulary& vocab, const TrainingConfig& config,
                       const std::string& path) {
  if (vocab.size() != params.vocab_size) throw ConfigError("save_model: vocabulary/params size mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write model '" + path + "'");
  detail::Writer w(out);
  w.bytes(kModelMagic, sizeof kModelMagic);
  w.u32(static_cast<std::uint32_t>(params.vocab_size));
  w.u32(static_cast<std::uint32_t>(params.dim));
  w.u32(static_cast<std::uint32_t>(params.senses));
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    w.str(vocab.words()[i]);
    w.u64(vocab.counts()[i]);
  }
  w.floats(params.context.data());
  w.floats(params.selector.data());
  w.floats(params.input.data());
  w.floats(params.output.data());
  w.str(to_json(config).dump());
  out.flush();
  if (!out) throw IoError("write failure on '" + path + "'");
}

inline LoadedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model '" + path + "'");
  detail::Reader r(in, path);
  char magic[sizeof kModelMagic];
  r.bytes(magic, sizeof magic, "magic");
  if (std::memcmp(magic, kModelMagic, sizeof magic) != 0) throw FormatError(path + ": not a MUSE1 model file");
  const auto vocab_size = r.u32("header");
  const auto d = r.u32("header");
  const auto n = r.u32("header");
  if (d == 0 || n == 0) throw FormatError(path + ": zero dimension in header");
  std::vector<std::string> words;
  std::vector<std::uint64_t> counts;
  words.reserve(vocab_size);
  counts.reserve(vocab_size);
  for (std::uint32_t i = 0; i < vocab_size; ++i) {
    words.push_back(r.str("vocabulary"));
    counts.push_back(r.u64("vocabulary"));
  }
  LoadedModel m;
  m.params = ModelParams(vocab_size, d, n);
  r.floats(m.params.context.data(), "P (context)");
  r.floats(m.params.selector.data(), "Q (selector)");
  r.floats(m.params.input.data(), "U (input sense)");
  r.floats(m.params.output.data(), "V (output sense)");
  const std::string echo = r.str("config");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(echo);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": bad config echo: " + e.what());
  }
  m.config = config_from_json(j);
  const std::uint64_t min_count = m.config.min_count;
  m.vocab = Vocabulary(std::move(words), std::move(counts), min_count);
  return m;
}

enum class Table { U, V, P };

inline Table parse_table(const std::string& s) {
  if (s == "U" || s == "u") return Table::U;
  if (s == "V" || s == "v") return Table::V;
  if (s == "P" || s == "p") return Table::P;
  throw ConfigError("unknown table '" + s + "' (expected U, V or P)");
}

inline std::string sense_label(const Vocabulary& vocab, SenseRef z) {
  return vocab.word(z.word) + "#" + std::to_string(z.sense);
}

// word2vec text format: header `rows dims`, then `label v1 ... vd`. Sense
// rows are labelled word#k; P rows carry the bare word.
inline void export_text(const ModelParams& params, const Vocabulary& vocab, Table which, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  const Matrix<float>& m = which == Table::U ? params.input : which == Table::V ? params.output : params.context;
  out << m.rows() << ' ' << m.cols() << '\n';
  char buf[32];
  for (std::size_t r = 0; r < m.rows(); ++r) {
    if (which == Table::P) {
      out << vocab.word(static_cast<WordId>(r));
    } else {
      out << sense_label(vocab, SenseRef::from_flat(r, params.senses));
    }
    for (float x : m.row(r)) {
      std::snprintf(buf, sizeof buf, " %.9g", double(x));
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw IoError("write failure on '" + path + "'");
}

struct TextEmbeddings {
  std::vector<std::string> labels;
  Matrix<float> vectors;
};

inline TextEmbeddings import_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::size_t rows = 0, cols = 0;
  if (!(in >> rows >> cols)) throw FormatError(path + ": bad header");
  TextEmbeddings t;
  t.vectors = Matrix<float>(rows, cols);
  t.labels.reserve(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    std::string label;
    if (!(in >> label)) throw FormatError(path + ": missing row " + std::to_string(r));
    t.labels.push_back(label);
    for (auto& x : t.vectors.row(r)) {
      if (!(in >> x)) throw FormatError(path + ": short row " + std::to_string(r));
    }
  }
  return t;
}

}  // namespace muse
