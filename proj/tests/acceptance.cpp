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


#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <iostream>
#include <set>

#include "muse/muse.hpp"
#include "oracles.hpp"

using namespace muse;

namespace {

using Clock = std::chrono::steady_clock;
using DParams = BasicModelParams<double>;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const Outcome& o, double secs, double limit = 0.0) {
  bool pass = o.pass;
  std::string detail = o.detail;
  if (limit > 0 && secs > limit) {
    pass = false;
    detail += " runtime over " + std::to_string(limit) + "s";
  }
  if (!pass) ++failures;
  std::printf("criterion %2d %s %s: %s (%.1fs)\n", id, pass ? "PASS" : "FAIL", name.c_str(), detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

DParams random_model(std::size_t vocab, std::size_t d, std::size_t n, std::uint64_t seed, double scale) {
  auto p = init_params<double>(vocab, d, n, seed);
  std::mt19937_64 gen(seed + 1);
  std::uniform_real_distribution<double> u(-scale, scale);
  for (auto& x : p.selector.data()) x = u(gen);
  for (auto& x : p.input.data()) x = u(gen);
  for (auto& x : p.output.data()) x = u(gen);
  return p;
}

ContextWindow random_window(std::mt19937_64& gen, std::size_t vocab) {
  ContextWindow w;
  w.target = WordId(gen() % vocab);
  const std::size_t l = gen() % 3, r = 1 + gen() % 3;
  for (std::size_t i = 0; i < l; ++i) w.left.push_back(WordId(gen() % vocab));
  for (std::size_t i = 0; i < r; ++i) w.right.push_back(WordId(gen() % vocab));
  return w;
}

std::vector<double*> selector_entries(DParams& p, const ContextWindow& w) {
  std::vector<double*> out;
  for (std::size_t k = 0; k < p.senses; ++k)
    for (auto& x : p.selector_row(w.target, k)) out.push_back(&x);
  std::set<WordId> ctx;
  w.for_each_context([&](WordId j) { ctx.insert(j); });
  for (WordId j : ctx)
    for (auto& x : p.context.row(j)) out.push_back(&x);
  return out;
}

// Largest relative error between lr-scaled update and finite differences.
template <typename Objective, typename Update>
double selector_fd_error(DParams& p, const ContextWindow& w, Objective f, Update step) {
  std::vector<double> fd;
  for (double* x : selector_entries(p, w)) fd.push_back(oracle::central_difference(f, *x));
  const auto before = p;
  const double lr = 1e-3;
  step(p, lr);
  auto after = p;
  p = before;
  const auto e0 = selector_entries(p, w);
  const auto e1 = selector_entries(after, w);
  double worst = 0.0;
  for (std::size_t i = 0; i < e0.size(); ++i) {
    const double s = (*e1[i] - *e0[i]) / lr;
    if (std::abs(s) < 1e-9 && std::abs(fd[i]) < 1e-9) continue;
    worst = std::max(worst, oracle::relative_error(s, fd[i]));
  }
  return worst;
}

Outcome gradient_correctness() {
  std::mt19937_64 gen(101);
  double sgns = 0.0, pg = 0.0, ql = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t vocab = 3 + gen() % 5, d = 2 + gen() % 6, n = 1 + gen() % 3, M = gen() % 4;
    auto p = random_model(vocab, d, n, gen(), 0.8);
    const SenseRef target = SenseRef::from_flat(gen() % (vocab * n), n);
    const SenseRef colloc = SenseRef::from_flat(gen() % (vocab * n), n);
    std::vector<std::size_t> negs;
    for (std::size_t i = 0; i < M; ++i) {
      std::size_t z;
      do z = gen() % (vocab * n);
      while (z == colloc.flat(n));
      negs.push_back(z);
    }
    auto f = [&] { return sgns_objective<double>(target, colloc, negs, p); };
    std::map<double*, double> grad;
    auto collect = [&](std::span<double> row) {
      for (auto& x : row) grad.emplace(&x, oracle::central_difference(f, x));
    };
    collect(p.input_row(target));
    collect(p.output_row(colloc));
    for (auto z : negs) collect(p.output.row(z));
    std::map<double*, double> before;
    for (auto& [ptr, g] : grad) before[ptr] = *ptr;
    const double lr = 1e-3;
    std::vector<double> scratch;
    sgns_update_with_negatives<double>(target, colloc, negs, p, lr, scratch);
    for (auto& [ptr, g] : grad) {
      const double s = (*ptr - before[ptr]) / lr;
      if (std::abs(g) < 1e-7 && std::abs(s) < 1e-7) continue;
      sgns = std::max(sgns, oracle::relative_error(s, g));
    }
  }
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t vocab = 2 + gen() % 5, d = 2 + gen() % 5, n = 2 + gen() % 3;
    auto p = random_model(vocab, d, n, gen(), 0.5);
    const auto w = random_window(gen, vocab);
    const std::uint32_t k = std::uint32_t(gen() % n);
    pg = std::max(pg, selector_fd_error(
                          p, w, [&] { return std::log(score_senses(w, p).policy[k]); },
                          [&](DParams& q, double lr) { policy_gradient_update<double>({w.target, k}, 1.0, w, q, lr); }));
  }
  std::uniform_real_distribution<double> u01(0.01, 0.99);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t vocab = 2 + gen() % 5, d = 2 + gen() % 5, n = 1 + gen() % 3;
    auto p = random_model(vocab, d, n, gen(), 0.5);
    const auto w = random_window(gen, vocab);
    const std::uint32_t k = std::uint32_t(gen() % n);
    const double t = u01(gen);
    ql = std::max(ql, selector_fd_error(
                          p, w,
                          [&] {
                            const double q = score_senses(w, p).qvalues[k];
                            return t * std::log(q) + (1 - t) * std::log(1 - q);
                          },
                          [&](DParams& q, double lr) { qlearning_update<double>({w.target, k}, t, w, q, lr); }));
  }
  const double worst = std::max({sgns, pg, ql});
  return {worst < 1e-4, "max relative error sgns=" + fmt("%.2e", sgns) + " log-policy=" + fmt("%.2e", pg) +
                            " cross-entropy=" + fmt("%.2e", ql) + " (tol 1e-4, 100 configs each)"};
}

Outcome ordering_equivalence() {
  std::mt19937_64 gen(202);
  std::size_t violations = 0, pairs = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + gen() % 3, vocab = 1 + gen() % (10 / n);
    const auto p = random_model(vocab, 4, n, gen(), 1.0);
    const std::size_t total = vocab * n;
    const auto t = SenseRef::from_flat(gen() % total, n);
    for (std::size_t a = 0; a < total; ++a) {
      for (std::size_t b = a + 1; b < total; ++b) {
        const auto za = SenseRef::from_flat(a, n), zb = SenseRef::from_flat(b, n);
        const double de = reward_exact<double>(t, za, p) - reward_exact<double>(t, zb, p);
        const double db = reward_bernoulli<double>(t, za, p) - reward_bernoulli<double>(t, zb, p);
        ++pairs;
        if ((de > 0) - (de < 0) != (db > 0) - (db < 0)) ++violations;
      }
    }
  }
  return {violations == 0, std::to_string(violations) + " violations over " + std::to_string(pairs) + " pairs"};
}

Outcome appendix_a() {
  auto p = init_params<double>(3, 4, 3, 7);
  const ContextWindow w{0, {1}, {2}};
  const auto c = encode_context(w, p);
  const double cc = oracle::dotv(c, c);
  for (std::size_t i = 0; i < 4; ++i) p.selector_row(0, 0)[i] = 3.0 * c[i] / cc;
  std::vector<oracle::Vec> q, rows;
  for (std::size_t k = 0; k < 3; ++k) q.emplace_back(p.selector_row(0, k).begin(), p.selector_row(0, k).end());
  for (WordId j : {1u, 2u}) rows.emplace_back(p.context.row(j).begin(), p.context.row(j).end());
  DiagnosticSetup setup;
  setup.window = w;
  setup.frozen_rewards = {-1, -1, -1};
  setup.lr = 0.01;
  const auto pg = run_appendix_a_diagnostic(p, setup);
  const auto expected = oracle::reinforce_recursion(q, rows, setup.frozen_rewards, setup.lr, setup.steps);
  double dev = 0.0;
  bool monotone = pg.max_probability.size() == 201;
  for (std::size_t s = 0; s < pg.max_probability.size(); ++s) {
    dev = std::max(dev, std::abs(pg.max_probability[s] - expected[s]));
    if (s > 0 && pg.max_probability[s] > pg.max_probability[s - 1] + 1e-12) monotone = false;
  }
  const bool drops = pg.max_probability.back() < pg.max_probability.front();

  auto r = init_params<double>(3, 4, 3, 7);
  DiagnosticSetup qs;
  qs.window = w;
  qs.frozen_rewards = {0.9, 0.1, 0.1};
  qs.learner = Learner::QLearning;
  const auto ql = run_appendix_a_diagnostic(r, qs);
  std::set<std::uint32_t> argmaxes(ql.greedy_sense.begin(), ql.greedy_sense.end());
  const bool stable = argmaxes.size() == 1;
  return {monotone && drops && dev < 1e-3 && stable,
          "REINFORCE max pi " + fmt("%.4f", pg.max_probability.front()) + " -> " +
              fmt("%.4f", pg.max_probability.back()) + (monotone ? " non-increasing" : " NOT monotone") +
              ", oracle deviation " + fmt("%.1e", dev) + "; Q-learning argmax " +
              (stable ? "fixed at sense " + std::to_string(*argmaxes.begin()) : std::string("changed"))};
}

Outcome reinforce_unbiased() {
  std::mt19937_64 gen(303);
  std::uniform_real_distribution<double> ur(-3, 0);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    auto p = random_model(4, 4, 3, gen(), 0.5);
    const auto w = random_window(gen, 4);
    const std::vector<double> r{ur(gen), ur(gen), ur(gen)};
    const auto pi = score_senses(w, p).policy;
    const auto entries = selector_entries(p, w);
    std::vector<double> expected(entries.size(), 0.0);
    const double lr = 1e-3;
    for (std::uint32_t k = 0; k < 3; ++k) {
      auto q = p;
      policy_gradient_update<double>({w.target, k}, r[k], w, q, lr);
      const auto qe = selector_entries(q, w);
      for (std::size_t i = 0; i < entries.size(); ++i) expected[i] += pi[k] * (*qe[i] - *entries[i]) / lr;
    }
    auto objective = [&] {
      const auto s = score_senses(w, p).policy;
      return s[0] * r[0] + s[1] * r[1] + s[2] * r[2];
    };
    for (std::size_t i = 0; i < entries.size(); ++i)
      worst = std::max(worst, std::abs(expected[i] - oracle::central_difference(objective, *entries[i], 1e-5)));
  }
  return {worst < 1e-6, "max |E[update] - grad| = " + fmt("%.2e", worst) + " (tol 1e-6, 20 toy models)"};
}

// Pseudoword benchmark.

struct EpochPoint {
  double train_seconds = 0.0;  // cumulative, evaluation excluded
  std::map<std::string, double> accuracy;
  std::map<std::string, double> baseline;
};

struct BenchRun {
  std::vector<EpochPoint> epochs;
  const EpochPoint& last() const { return epochs.back(); }
  double mean_accuracy() const {
    double s = 0;
    for (const auto& [w, a] : last().accuracy) s += a;
    return s / double(last().accuracy.size());
  }
};

constexpr double kThreshold = 0.80;

std::size_t pairs_over(const EpochPoint& e) {
  std::size_t k = 0;
  for (const auto& [w, a] : e.accuracy) k += a >= kThreshold;
  return k;
}

class Benchmark {
 public:
  Benchmark() {
    const std::vector<MergePair> pairs = {{"duke", "eyes", "duke_eyes"}, {"god", "head", "god_head"},
                                          {"blood", "son", "blood_son"}};
    const std::string corpus = std::string(MUSE_TEST_DATA_DIR) + "/desk_corpus.txt";
    const auto merged = oracle::temp_path("acc_pw.txt"), labels = oracle::temp_path("acc_pw.labels");
    train_ = oracle::temp_path("acc_pw_train.txt");
    make_pseudoword_corpus(corpus, pairs, merged, labels);
    held_out_ = split_pseudoword_corpus(merged, labels, train_, 10).held_out;
  }

  const BenchRun& run(StrategyKind strategy, RewardKind reward, std::uint64_t seed) {
    const auto key = std::make_tuple(strategy, reward, seed);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    TrainingConfig cfg;
    cfg.dim = 50;
    cfg.epochs = 5;
    cfg.strategy = strategy;
    cfg.reward = reward;
    cfg.seed = seed;
    cfg.validate();
    const auto vocab = build_vocabulary(train_, cfg.min_count, cfg.stream_options().corpus);
    auto params = init_params<float>(vocab.size(), cfg.dim, cfg.senses, seed);
    Trainer trainer(vocab, params, cfg);
    BenchRun out;
    double elapsed = 0.0;
    for (std::size_t e = 0; e < cfg.epochs; ++e) {
      const auto t0 = Clock::now();
      trainer.train_epoch(train_, e);
      elapsed += seconds_since(t0);
      EpochPoint pt;
      pt.train_seconds = elapsed;
      for (const auto& a : sense_selection_accuracy(held_out_, params, vocab, cfg.window)) {
        pt.accuracy[a.pseudoword] = a.accuracy();
        pt.baseline[a.pseudoword] = a.majority_baseline();
      }
      out.epochs.push_back(std::move(pt));
    }
    std::cerr << "  trained " << to_string(strategy) << "/" << to_string(reward) << " seed " << seed << " in "
              << fmt("%.1f", elapsed) << "s, mean accuracy " << fmt("%.3f", out.mean_accuracy()) << "\n";
    return cache_.emplace(key, std::move(out)).first->second;
  }

 private:
  std::string train_;
  std::vector<LabelledOccurrence> held_out_;
  std::map<std::tuple<StrategyKind, RewardKind, std::uint64_t>, BenchRun> cache_;
};

Outcome sense_discovery(Benchmark& bench) {
  const auto& r = bench.run(StrategyKind::Boltzmann, RewardKind::BernoulliLik, 1);
  std::string detail;
  for (const auto& [w, a] : r.last().accuracy)
    detail += w + "=" + fmt("%.3f", a) + " (majority " + fmt("%.3f", r.last().baseline.at(w)) + ") ";
  const auto k = pairs_over(r.last());
  return {k >= 2, detail + std::to_string(k) + "/3 pseudowords >= 0.80, need 2"};
}

Outcome exploration_ordering(Benchmark& bench) {
  double boltz = 0, greedy = 0, eps = 0;
  for (std::uint64_t s = 1; s <= 5; ++s) {
    boltz += bench.run(StrategyKind::Boltzmann, RewardKind::BernoulliLik, s).mean_accuracy() / 5;
    greedy += bench.run(StrategyKind::Greedy, RewardKind::BernoulliLik, s).mean_accuracy() / 5;
    eps += bench.run(StrategyKind::EpsilonGreedy, RewardKind::BernoulliLik, s).mean_accuracy() / 5;
  }
  return {boltz >= greedy - 0.02, "mean accuracy over 5 seeds: Boltzmann " + fmt("%.4f", boltz) + ", Greedy " +
                                      fmt("%.4f", greedy) + ", eps-Greedy " + fmt("%.4f", eps) +
                                      " (need Boltzmann >= Greedy - 0.02)"};
}

Outcome reward_efficiency(Benchmark& bench) {
  auto time_to_threshold = [](const BenchRun& r) -> std::optional<double> {
    for (const auto& e : r.epochs)
      if (pairs_over(e) >= 2) return e.train_seconds;
    return std::nullopt;
  };
  std::optional<double> hat = 0.0, bar = 0.0;
  double hat_time = 0, bar_time = 0, hat_acc = 0, bar_acc = 0;
  for (std::uint64_t s = 1; s <= 3; ++s) {
    const auto& h = bench.run(StrategyKind::Boltzmann, RewardKind::BernoulliLik, s);
    const auto& b = bench.run(StrategyKind::Boltzmann, RewardKind::ApproxLogLik, s);
    const auto th = time_to_threshold(h), tb = time_to_threshold(b);
    hat = hat && th ? std::optional(*hat + *th / 3) : std::nullopt;
    bar = bar && tb ? std::optional(*bar + *tb / 3) : std::nullopt;
    hat_time += h.last().train_seconds / 3;
    bar_time += b.last().train_seconds / 3;
    hat_acc += h.mean_accuracy() / 3;
    bar_acc += b.mean_accuracy() / 3;
  }
  auto show = [](const std::optional<double>& t) { return t ? fmt("%.1fs", *t) : std::string("not reached"); };
  const bool pass = hat && (!bar || *hat <= *bar);
  return {pass, "time to threshold: bernoulli " + show(hat) + ", approx " + show(bar) +
                    "; 5-epoch train time bernoulli " + fmt("%.1fs", hat_time) + " vs approx " +
                    fmt("%.1fs", bar_time) + " (ratio " + fmt("%.2f", bar_time / hat_time) +
                    "); final mean accuracy " + fmt("%.3f", hat_acc) + " vs " + fmt("%.3f", bar_acc)};
}

Outcome linear_decoding() {
  const auto p = init_params<float>(5000, 50, 3, 9);
  auto q = p;
  std::mt19937_64 gen(5);
  std::normal_distribution<float> nd(0, 0.1f);
  for (auto& x : q.selector.data()) x = nd(gen);
  std::vector<WordId> toks(400000);
  for (auto& t : toks) t = WordId(gen() % 5000);
  std::vector<double> times;
  volatile std::size_t sink = 0;
  for (std::size_t L : {100000u, 200000u, 400000u}) {
    double best = 1e30;
    for (int rep = 0; rep < 5; ++rep) {
      const auto t0 = Clock::now();
      const auto out = decode_sequence<float>(std::span<const WordId>(toks.data(), L), q, 5);
      best = std::min(best, seconds_since(t0));
      sink = sink + out.back().sense;
    }
    times.push_back(best);
  }
  const double r1 = times[1] / times[0], r2 = times[2] / times[1];
  const bool pass = r1 >= 1.6 && r1 <= 2.6 && r2 >= 1.6 && r2 <= 2.6;
  return {pass, "t(1e5)=" + fmt("%.3fs", times[0]) + " t(2e5)=" + fmt("%.3fs", times[1]) +
                    " t(4e5)=" + fmt("%.3fs", times[2]) + " ratios " + fmt("%.2f", r1) + ", " + fmt("%.2f", r2) +
                    " (band [1.6, 2.6])"};
}

Outcome metric_correctness() {
  const Vocabulary v({"bank", "river", "money", "water", "the"}, {50, 40, 30, 20, 10}, 1);
  auto item = [](const std::string& c1, const std::string& w1, const std::string& c2, const std::string& w2) {
    return ScwsItem{parse_marked_context(c1, w1), parse_marked_context(c2, w2), 5.0};
  };
  auto row = [](std::span<const double> r) { return oracle::Vec(r.begin(), r.end()); };
  double worst = 0.0;
  std::size_t mismatches = 0;
  auto check = [&](double got, double want) { worst = std::max(worst, std::abs(got - want)); };

  // Hand-steered MaxSimC.
  DParams h(5, 2, 2);
  h.context.row(3)[0] = 1.0;
  h.context.row(2)[1] = 1.0;
  h.selector_row(0, 0)[0] = 3.0;
  h.selector_row(0, 1)[1] = 3.0;
  h.selector_row(1, 0)[0] = 1.0;
  h.input.row(0)[0] = 1.0;
  h.input.row(1)[1] = 1.0;
  h.input.row(2)[0] = 1.0, h.input.row(2)[1] = 1.0;
  h.input.row(3)[0] = -1.0;
  check(*max_sim_c(item("water <b>bank</b>", "bank", "water <b>river</b>", "river"), h, v, 5), 1 / std::sqrt(2.0));
  check(*max_sim_c(item("money <b>bank</b>", "bank", "water <b>river</b>", "river"), h, v, 5), 1 / std::sqrt(2.0));

  // Uniform policies: AvgSimC is the mean of the four cosines.
  auto u = random_model(5, 3, 2, 3, 1.0);
  std::fill(u.selector.data().begin(), u.selector.data().end(), 0.0);
  double mean = 0;
  for (std::size_t k = 0; k < 2; ++k)
    for (std::size_t l = 0; l < 2; ++l) mean += oracle::cos(row(u.input.row(k)), row(u.input.row(2 + l))) / 4;
  check(*avg_sim_c(item("the <b>bank</b>", "bank", "the <b>river</b>", "river"), u, v, 5), mean);

  // Brute-force AvgSimC / MaxSimC on random toy models.
  std::mt19937_64 gen(404);
  const std::vector<std::string> words{"bank", "river", "money", "water", "the"};
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = random_model(5, 4, 1 + gen() % 4, gen(), 1.0);
    const auto w1 = words[gen() % 5], w2 = words[gen() % 5];
    const auto a = words[gen() % 5], b = words[gen() % 5];
    const auto it = item(a + " <b>" + w1 + "</b> " + b, w1, b + " <b>" + w2 + "</b>", w2);
    auto policy = [&](const std::vector<std::string>& ctx, const std::string& w) {
      oracle::Vec c(p.dim, 0.0);
      for (const auto& x : ctx)
        for (std::size_t i = 0; i < p.dim; ++i) c[i] += p.context.row(v.find(x))[i];
      oracle::Vec l(p.senses);
      for (std::uint32_t k = 0; k < p.senses; ++k) l[k] = oracle::dotv(row(p.selector_row(v.find(w), k)), c);
      return oracle::softmax(l);
    };
    const auto pi = policy({a, b}, w1), pj = policy({b}, w2);
    double avg = 0;
    for (std::uint32_t k = 0; k < p.senses; ++k)
      for (std::uint32_t l = 0; l < p.senses; ++l)
        avg += pi[k] * pj[l] * oracle::cos(row(p.input_row({v.find(w1), k})), row(p.input_row({v.find(w2), l})));
    check(*avg_sim_c(it, p, v, 5), avg);
    const std::uint32_t ki = std::uint32_t(std::max_element(pi.begin(), pi.end()) - pi.begin());
    const std::uint32_t kj = std::uint32_t(std::max_element(pj.begin(), pj.end()) - pj.begin());
    check(*max_sim_c(it, p, v, 5),
          oracle::cos(row(p.input_row({v.find(w1), ki})), row(p.input_row({v.find(w2), kj}))));

    // Synonym answer against exhaustive sense pairs.
    SynonymQuestion q{words[gen() % 5], {}, 0};
    for (const auto& w : words)
      if (w != q.question && q.candidates.size() < 4) q.candidates.push_back(w);
    std::size_t best = 0;
    double best_s = -1e9;
    for (std::size_t c = 0; c < 4; ++c) {
      double s = -1e9;
      for (std::uint32_t k = 0; k < p.senses; ++k)
        for (std::uint32_t l = 0; l < p.senses; ++l)
          s = std::max(s, oracle::cos(row(p.input_row({v.find(q.question), k})),
                                      row(p.input_row({v.find(q.candidates[c]), l}))));
      if (s > best_s) best_s = s, best = c;
    }
    mismatches += *answer_synonym(q, p, v) != best;
  }

  // Spearman: hand example and naive oracle.
  const std::vector<double> x{1, 2, 3, 4}, y{1, 3, 2, 4};
  check(*spearman(x, y), 0.8);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> s(3 + gen() % 20), r(s.size());
    for (auto& e : s) e = double(gen() % 6);
    for (auto& e : r) e = double(gen() % 6);
    const auto got = spearman(s, r);
    if (got) check(*got, oracle::naive_spearman(s, r));
  }
  return {worst <= 1e-6 && mismatches == 0, "max deviation " + fmt("%.1e", worst) + ", synonym mismatches " +
                                                std::to_string(mismatches) + " (tol 1e-6)"};
}

int run_cli(const std::string& args, const std::string& out) {
  const std::string cmd = std::string("'") + MUSE_CLI_PATH + "' " + args + " >'" + out + "' 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism() {
  const auto corpus = oracle::temp_path("acc_det_corpus.txt");
  {
    std::ifstream in(std::string(MUSE_TEST_DATA_DIR) + "/desk_corpus.txt");
    std::ofstream out(corpus, std::ios::binary);
    std::string line;
    for (int i = 0; i < 20000 && std::getline(in, line); ++i) out << line << '\n';
  }
  const auto scws = oracle::temp_path("acc_det_scws.tsv");
  oracle::write_text(scws,
                     "1\tking\tn\tlord\tn\tthe <b>king</b> is dead\tmy good <b>lord</b> of york\t8.0\t8\t8\n"
                     "2\tlove\tn\theart\tn\tmy <b>love</b> for thee\twith all my <b>heart</b>\t7.0\t7\t7\n"
                     "3\tking\tn\theart\tn\tlong live the <b>king</b>\tbreak my <b>heart</b>\t3.0\t3\t3\n"
                     "4\tlord\tn\tlove\tn\tthe <b>lord</b> chamberlain\tin <b>love</b> with her\t2.5\t2\t3\n");
  const auto input = oracle::temp_path("acc_det_input.txt");
  oracle::write_text(input, "the king is dead long live the king\nmy lord i love thee with all my heart\n");
  std::vector<std::string> outputs;
  for (int run = 0; run < 2; ++run) {
    const auto tag = std::to_string(run);
    const auto model = oracle::temp_path("acc_det_model" + tag + ".bin");
    std::string all;
    const int rc = run_cli("train --corpus '" + corpus + "' --out '" + model +
                               "' --dim 20 --epochs 1 --batch-size 256 --seed 5",
                           oracle::temp_path("acc_det_train" + tag));
    const int re = run_cli("eval-scws --model '" + model + "' --scws '" + scws + "'",
                           oracle::temp_path("acc_det_eval" + tag));
    const int rk = run_cli("knn --model '" + model + "' --word king", oracle::temp_path("acc_det_knn" + tag));
    const int rd = run_cli("decode --model '" + model + "' --input '" + input + "'",
                           oracle::temp_path("acc_det_decode" + tag));
    if (rc || re || rk || rd) return {false, "CLI pipeline failed on run " + tag};
    for (const auto* part : {"model", "eval", "knn", "decode"}) {
      const auto path = std::string(part) == "model" ? model : oracle::temp_path(std::string("acc_det_") + part + tag);
      all += oracle::read_text(path) + '\x1f';
    }
    outputs.push_back(std::move(all));
  }
  const bool same = outputs[0] == outputs[1];
  return {same, std::string(same ? "identical" : "different") + " model, SCWS report, knn and decode output across two "
                                                                "seeded runs (" +
                    std::to_string(outputs[0].size()) + " bytes)"};
}

}  // namespace

int main() {
  auto timed = [](int id, const std::string& name, auto fn, double limit = 0.0) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    report(id, name, o, seconds_since(t0), limit);
  };
  timed(1, "gradient-correctness", gradient_correctness, 10.0);
  timed(2, "ordering-equivalence", ordering_equivalence, 5.0);
  timed(3, "appendix-a-pathology", appendix_a, 5.0);
  timed(4, "reinforce-unbiasedness", reinforce_unbiased, 1.0);
  std::optional<Benchmark> bench;
  timed(5, "sense-discovery", [&] {
    bench.emplace();
    return sense_discovery(*bench);
  }, 900.0);
  timed(6, "exploration-ordering", [&] { return exploration_ordering(*bench); });
  timed(7, "linear-decoding", linear_decoding);
  timed(8, "reward-efficiency", [&] { return reward_efficiency(*bench); });
  timed(9, "metric-correctness", metric_correctness, 1.0);
  timed(10, "determinism", determinism);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures ? 1 : 0;
}
