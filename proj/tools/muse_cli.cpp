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


// muse: train, evaluate and inspect multi-sense embeddings.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "muse/muse.hpp"

namespace {

using namespace muse;

constexpr int kUsageError = 1;
constexpr int kRuntimeError = 2;

std::string format_rho(const std::optional<double>& rho) {
  if (!rho) return "undefined";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", *rho * 100.0);
  return buf;
}

nlohmann::json rho_json(const std::optional<double>& rho) {
  return rho ? nlohmann::json(*rho * 100.0) : nlohmann::json(nullptr);
}

void echo_config(const TrainingConfig& c) { std::cerr << "config " << to_json(c).dump() << '\n'; }

struct TrainArgs {
  std::string corpus;
  std::string out;
  std::string vocab_out;
  std::string config_from;
  std::string learner = "qlearning";
  std::string strategy = "boltzmann";
  std::string reward;
  std::string reward_direction = "target-colloc";
  std::string batch_reduction = "mean";
  TrainingConfig config;
};

void add_train(CLI::App& app, TrainArgs& a) {
  auto* c = app.add_subcommand("train", "Jointly train sense selection and sense representations");
  c->add_option("--corpus", a.corpus, "Corpus: one whitespace-tokenized sentence per line")->required()->check(CLI::ExistingFile);
  c->add_option("--out", a.out, "Output model file")->required();
  c->add_option("--vocab-out", a.vocab_out, "Also write the vocabulary (word<TAB>count)");
  c->add_option("--config-from", a.config_from, "Start from the config echo of a saved model; explicit flags override")
      ->check(CLI::ExistingFile);
  auto& k = a.config;
  c->add_option("--dim", k.dim, "Embedding dimension")->capture_default_str();
  c->add_option("--senses", k.senses, "Senses per word")->capture_default_str();
  c->add_option("--window", k.window, "Context window radius m")->capture_default_str();
  c->add_option("--lr", k.lr0, "Initial learning rate")->capture_default_str();
  c->add_option("--negatives", k.negatives, "Negative senses per sample")->capture_default_str();
  c->add_option("--unigram-power", k.unigram_power, "Smoothing power of the negative distribution")->capture_default_str();
  c->add_option("--epsilon", k.epsilon, "Exploration rate of egreedy")->capture_default_str();
  c->add_option("--batch-size", k.batch_size, "Mini-batch size")->capture_default_str();
  c->add_option("--batch-reduction", a.batch_reduction, "Selector gradient reduction per batch")
      ->check(CLI::IsMember({"mean", "row-mean", "sum"}))->capture_default_str();
  c->add_option("--learner", a.learner, "Selector learner")->check(CLI::IsMember({"policy", "qlearning"}))->capture_default_str();
  c->add_option("--strategy", a.strategy, "Sense selection strategy")
      ->check(CLI::IsMember({"greedy", "egreedy", "boltzmann"}))->capture_default_str();
  c->add_option("--reward", a.reward, "Q-learning target: approx (sampled likelihood) or bernoulli")
      ->check(CLI::IsMember({"approx", "bernoulli"}));
  c->add_option("--reward-direction", a.reward_direction, "Orientation of the Bernoulli reward")
      ->check(CLI::IsMember({"target-colloc", "colloc-target"}))->capture_default_str();
  c->add_option("--epochs", k.epochs, "Passes over the corpus")->capture_default_str();
  c->add_option("--subsample", k.subsample_t, "Subsampling threshold t (0 disables)")->capture_default_str();
  c->add_option("--min-count", k.min_count, "Vocabulary frequency cutoff")->capture_default_str();
  c->add_option("--min-sentence-tokens", k.min_sentence_tokens, "Skip shorter sentences (0 disables)")->capture_default_str();
  c->add_flag("--lowercase", k.lowercase, "Lowercase the corpus while reading");
  c->add_flag("--all-offsets", k.all_offsets, "Train on every offset in the window instead of one sampled offset");
  c->add_option("--seed", k.seed, "Random seed")->capture_default_str();
  c->add_option("--threads", k.threads, "Worker threads (more than one requires --relaxed)")->capture_default_str();
  c->add_flag("--relaxed", k.relaxed, "Lock-free parallel updates; not bit-reproducible");
  c->add_option("--progress-every", k.progress_every, "Progress line every N samples (0 = off)")->capture_default_str();
  c->add_option("--checkpoint-every", k.checkpoint_every, "Write <out>.ckpt every N samples (0 = off)")->capture_default_str();
}

int run_train(CLI::App& sub, TrainArgs& a) {
  TrainingConfig cfg = a.config;
  if (!a.config_from.empty()) {
    // Start from the echo, then re-apply every flag given explicitly.
    TrainingConfig echo = load_model(a.config_from).config;
    auto given = [&](const char* name) { return sub.count(name) > 0; };
    if (given("--dim")) echo.dim = cfg.dim;
    if (given("--senses")) echo.senses = cfg.senses;
    if (given("--window")) echo.window = cfg.window;
    if (given("--lr")) echo.lr0 = cfg.lr0;
    if (given("--negatives")) echo.negatives = cfg.negatives;
    if (given("--unigram-power")) echo.unigram_power = cfg.unigram_power;
    if (given("--epsilon")) echo.epsilon = cfg.epsilon;
    if (given("--batch-size")) echo.batch_size = cfg.batch_size;
    if (given("--batch-reduction")) echo.batch_reduction = parse_batch_reduction(a.batch_reduction);
    if (given("--learner")) echo.learner = parse_learner(a.learner);
    if (given("--strategy")) echo.strategy = parse_strategy(a.strategy);
    if (given("--reward")) echo.reward = parse_reward(a.reward);
    if (given("--reward-direction")) echo.reward_direction = parse_reward_direction(a.reward_direction);
    if (given("--epochs")) echo.epochs = cfg.epochs;
    if (given("--subsample")) echo.subsample_t = cfg.subsample_t;
    if (given("--min-count")) echo.min_count = cfg.min_count;
    if (given("--min-sentence-tokens")) echo.min_sentence_tokens = cfg.min_sentence_tokens;
    if (given("--lowercase")) echo.lowercase = cfg.lowercase;
    if (given("--all-offsets")) echo.all_offsets = cfg.all_offsets;
    if (given("--seed")) echo.seed = cfg.seed;
    if (given("--threads")) echo.threads = cfg.threads;
    if (given("--relaxed")) echo.relaxed = cfg.relaxed;
    if (given("--progress-every")) echo.progress_every = cfg.progress_every;
    if (given("--checkpoint-every")) echo.checkpoint_every = cfg.checkpoint_every;
    cfg = echo;
  } else {
    cfg.batch_reduction = parse_batch_reduction(a.batch_reduction);
    cfg.learner = parse_learner(a.learner);
    cfg.strategy = parse_strategy(a.strategy);
    cfg.reward_direction = parse_reward_direction(a.reward_direction);
    if (!a.reward.empty()) {
      cfg.reward = parse_reward(a.reward);
    } else {
      cfg.reward = cfg.learner == Learner::PolicyGradient ? RewardKind::ApproxLogLik : RewardKind::BernoulliLik;
    }
  }
  if (!(cfg.subsample_t > 0.0)) cfg.subsample_t = std::numeric_limits<double>::infinity();
  // Policy gradient samples on-policy; Boltzmann is the same sampling process.
  if (cfg.learner == Learner::PolicyGradient && cfg.strategy == StrategyKind::Boltzmann) {
    cfg.strategy = StrategyKind::PolicySample;
  }
  cfg.validate();
  echo_config(cfg);

  const CorpusOptions copts{cfg.min_sentence_tokens, cfg.lowercase};
  const Vocabulary vocab = build_vocabulary(a.corpus, cfg.min_count, copts);
  if (!a.vocab_out.empty()) save_vocabulary(vocab, a.vocab_out);
  std::cerr << "vocabulary " << vocab.size() << " words, " << vocab.total_tokens() << " tokens\n";

  ModelParams params = init_params<float>(vocab.size(), cfg.dim, cfg.senses, cfg.seed);
  Trainer trainer(vocab, params, cfg);
  if (cfg.checkpoint_every > 0) {
    std::uint64_t next = cfg.checkpoint_every;
    trainer.set_batch_callback([&](const TrainStats& s) {
      if (s.samples_seen >= next) {
        save_model(params, vocab, cfg, a.out + ".ckpt");
        next = (s.samples_seen / cfg.checkpoint_every + 1) * cfg.checkpoint_every;
      }
    });
  }
  TrainStats stats;
  try {
    stats = trainer.train(a.corpus);
  } catch (const TrainingFailure& e) {
    const std::string dump = a.out + ".nan-dump";
    save_model(params, vocab, cfg, dump);
    std::cerr << "error: " << e.what() << " (parameters dumped to " << dump << ")\n";
    return kRuntimeError;
  }
  save_model(params, vocab, cfg, a.out);
  std::cerr << "samples=" << stats.samples_seen << " reward=" << stats.mean_reward()
            << " entropy=" << stats.mean_entropy() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"muse: multi-sense embeddings with reinforcement-learned sense selection"};
  app.require_subcommand(1);

  TrainArgs train;
  add_train(app, train);

  std::string model, scws, input, output, labels, word, metric = "collocation";
  std::vector<std::string> synonym_files, merges;
  std::size_t window = 0, k = 8;
  std::uint32_t sense = 0;

  auto* eval_scws = app.add_subcommand("eval-scws", "Contextual word similarity (MaxSimC / AvgSimC Spearman)");
  eval_scws->add_option("--model", model, "Model file")->required()->check(CLI::ExistingFile);
  eval_scws->add_option("--scws", scws, "SCWS TSV file")->required()->check(CLI::ExistingFile);
  eval_scws->add_option("--window", window, "Context radius (default: training window)");

  auto* eval_syn = app.add_subcommand("eval-synonym", "Synonym selection accuracy");
  eval_syn->add_option("--model", model, "Model file")->required()->check(CLI::ExistingFile);
  eval_syn->add_option("--synonyms", synonym_files, "Question files (question | a b c d | letter)")
      ->required()->check(CLI::ExistingFile);

  auto* knn = app.add_subcommand("knn", "Nearest senses of one sense");
  knn->add_option("--model", model, "Model file")->required()->check(CLI::ExistingFile);
  knn->add_option("--word", word, "Query word")->required();
  knn->add_option("--sense", sense, "Query sense index")->capture_default_str();
  knn->add_option("--k", k, "Neighbours to list")->capture_default_str();
  knn->add_option("--metric", metric, "collocation (U.V) or cosine (U,U)")
      ->check(CLI::IsMember({"collocation", "cosine"}))->capture_default_str();

  auto* decode = app.add_subcommand("decode", "Greedy sense tags for every token of a text");
  decode->add_option("--model", model, "Model file")->required()->check(CLI::ExistingFile);
  decode->add_option("--input", input, "Text, one sentence per line")->required()->check(CLI::ExistingFile);
  decode->add_option("--window", window, "Context radius (default: training window)");

  auto* pseudo = app.add_subcommand("make-pseudoword-corpus", "Merge word pairs into pseudowords with labels");
  pseudo->add_option("--corpus", input, "Source corpus")->required()->check(CLI::ExistingFile);
  pseudo->add_option("--out", output, "Rewritten corpus")->required();
  pseudo->add_option("--labels", labels, "Label sidecar (default: <out>.labels)");
  pseudo->add_option("--merge", merges, "wordA,wordB,pseudoword (repeatable)");

  std::size_t diag_senses = 3, diag_steps = 200, diag_dim = 10;
  double diag_lr = 0.005, diag_gap = 3.0;
  std::string diag_learner = "policy", diag_strategy = "greedy";
  std::vector<double> diag_rewards;
  std::uint64_t diag_seed = 1;
  auto* diag = app.add_subcommand("diagnose-appendix-a",
                                  "Selector updates on one context with frozen rewards (policy-gradient pathology)");
  diag->add_option("--learner", diag_learner, "policy or qlearning")
      ->check(CLI::IsMember({"policy", "qlearning"}))->capture_default_str();
  diag->add_option("--strategy", diag_strategy, "Selection strategy")
      ->check(CLI::IsMember({"greedy", "egreedy", "boltzmann", "policy"}))->capture_default_str();
  diag->add_option("--senses", diag_senses, "Senses")->capture_default_str();
  diag->add_option("--dim", diag_dim, "Dimension of the toy model")->capture_default_str();
  diag->add_option("--steps", diag_steps, "Updates")->capture_default_str();
  diag->add_option("--lr", diag_lr, "Learning rate")->capture_default_str();
  diag->add_option("--initial-gap", diag_gap, "Initial logit lead of sense 0")->capture_default_str();
  diag->add_option("--rewards", diag_rewards,
                   "Frozen reward per sense (default: -1 each for policy, 0.9 then 0.1 for qlearning)")
      ->delimiter(',');
  diag->add_option("--seed", diag_seed, "Random seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsageError;
  }

  try {
    if (app.got_subcommand("train")) {
      return run_train(*app.get_subcommand("train"), train);
    }
    if (app.got_subcommand("eval-scws")) {
      const auto m = load_model(model);
      echo_config(m.config);
      const std::size_t radius = window ? window : m.config.window;
      const auto report = evaluate_scws(load_scws(scws), m.params, m.vocab, radius);
      std::cout << "MaxSimC=" << format_rho(report.max_sim_c) << " AvgSimC=" << format_rho(report.avg_sim_c)
                << " skipped=" << report.skipped << '\n';
      std::cout << nlohmann::json{{"task", "scws"},
                                  {"max_sim_c", rho_json(report.max_sim_c)},
                                  {"avg_sim_c", rho_json(report.avg_sim_c)},
                                  {"scored", report.scored},
                                  {"skipped", report.skipped}}
                       .dump()
                << '\n';
      return 0;
    }
    if (app.got_subcommand("eval-synonym")) {
      const auto m = load_model(model);
      echo_config(m.config);
      for (const auto& file : synonym_files) {
        const auto r = evaluate_synonyms(load_synonyms(file), m.params, m.vocab);
        char acc[32];
        std::snprintf(acc, sizeof acc, "%.2f", r.accuracy() * 100.0);
        std::cout << "dataset=" << file << " accuracy=" << acc << " answered=" << r.answered
                  << " skipped=" << r.skipped << '\n';
        std::cout << nlohmann::json{{"task", "synonym"},
                                    {"dataset", file},
                                    {"accuracy", r.accuracy() * 100.0},
                                    {"answered", r.answered},
                                    {"skipped", r.skipped}}
                         .dump()
                  << '\n';
      }
      return 0;
    }
    if (app.got_subcommand("knn")) {
      const auto m = load_model(model);
      echo_config(m.config);
      const WordId w = m.vocab.find(word);
      if (w == Vocabulary::kNone) throw ConfigError("word '" + word + "' is not in the vocabulary");
      if (sense >= m.params.senses) throw ConfigError("sense index out of range");
      const SenseRef q{w, sense};
      std::cout << "query=" << sense_label(m.vocab, q) << " metric=" << metric << '\n';
      const auto hits = knn_senses(q, m.params, k, parse_knn_metric(metric));
      for (std::size_t i = 0; i < hits.size(); ++i) {
        char score[32];
        std::snprintf(score, sizeof score, "%.6f", hits[i].score);
        std::cout << i + 1 << '\t' << sense_label(m.vocab, hits[i].sense) << '\t' << score << '\n';
      }
      return 0;
    }
    if (app.got_subcommand("decode")) {
      const auto m = load_model(model);
      echo_config(m.config);
      const std::size_t radius = window ? window : m.config.window;
      std::ifstream in(input);
      if (!in) throw IoError("cannot open '" + input + "'");
      std::string line;
      std::vector<std::string_view> toks;
      std::vector<WordId> ids;
      while (std::getline(in, line)) {
        if (m.config.lowercase) ascii_lower(line);
        split_tokens(line, toks);
        ids.clear();
        for (auto t : toks) {
          const WordId id = m.vocab.find(t);
          if (id != Vocabulary::kNone) ids.push_back(id);
        }
        const auto senses = decode_sequence<float>(ids, m.params, radius);
        std::size_t next = 0;
        for (std::size_t i = 0; i < toks.size(); ++i) {
          if (i) std::cout << ' ';
          if (m.vocab.contains(toks[i])) {
            std::cout << sense_label(m.vocab, senses[next++]);
          } else {
            std::cout << toks[i];
          }
        }
        std::cout << '\n';
      }
      return 0;
    }
    if (app.got_subcommand("make-pseudoword-corpus")) {
      std::vector<MergePair> pairs;
      for (const auto& spec : merges) {
        std::vector<std::string> parts;
        std::stringstream ss(spec);
        std::string part;
        while (std::getline(ss, part, ',')) parts.push_back(part);
        if (parts.size() != 3) throw ConfigError("--merge expects wordA,wordB,pseudoword, got '" + spec + "'");
        pairs.push_back({parts[0], parts[1], parts[2]});
      }
      const std::string label_path = labels.empty() ? output + ".labels" : labels;
      const auto report = make_pseudoword_corpus(input, pairs, output, label_path);
      for (const auto& [w, c] : report.rewritten) std::cout << "rewritten " << w << ' ' << c << '\n';
      std::cout << "total_rewritten=" << report.total_rewritten << " tokens=" << report.total_tokens << '\n';
      return 0;
    }
    if (app.got_subcommand("diagnose-appendix-a")) {
      const Learner learner = parse_learner(diag_learner);
      if (diag_rewards.empty()) {
        diag_rewards.assign(diag_senses, learner == Learner::PolicyGradient ? -1.0 : 0.1);
        if (learner == Learner::QLearning) diag_rewards[0] = 0.9;
      }
      if (diag_rewards.size() != diag_senses) throw ConfigError("--rewards needs one value per sense");
      // Toy model: word 0 is the target, words 1..2 its context.
      auto params = init_params<double>(3, diag_dim, diag_senses, diag_seed);
      DiagnosticSetup setup;
      setup.window.target = 0;
      setup.window.left = {1};
      setup.window.right = {2};
      const auto c = encode_context(setup.window, params);
      double cc = 0;
      for (double x : c) cc += x * x;
      for (std::size_t d = 0; d < diag_dim; ++d) params.selector_row(0, 0)[d] = diag_gap * c[d] / cc;
      setup.frozen_rewards = diag_rewards;
      setup.learner = learner;
      setup.strategy = parse_strategy(diag_strategy) == StrategyKind::EpsilonGreedy
                           ? Strategy::epsilon_greedy(0.05)
                           : Strategy{parse_strategy(diag_strategy), 0.0};
      setup.lr = diag_lr;
      setup.steps = diag_steps;
      setup.seed = diag_seed;
      const auto t = run_appendix_a_diagnostic(params, setup);
      std::cout << "step\tmax_prob\tgreedy\tselected\tselected_prob\n";
      for (std::size_t s = 0; s <= diag_steps; ++s) {
        char buf[96];
        if (s < diag_steps) {
          std::snprintf(buf, sizeof buf, "%zu\t%.6f\t%u\t%u\t%.6f", s, t.max_probability[s], t.greedy_sense[s],
                        t.selected[s], t.selected_probability[s]);
        } else {
          std::snprintf(buf, sizeof buf, "%zu\t%.6f\t%u\t-\t-", s, t.max_probability[s], t.greedy_sense[s]);
        }
        std::cout << buf << '\n';
      }
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kUsageError;
}
