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
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "muse/common.hpp"
#include "muse/config.hpp"
#include "muse/corpus.hpp"
#include "muse/params.hpp"
#include "muse/representation.hpp"
#include "muse/selection.hpp"
#include "muse/unigram_table.hpp"
#include "muse/vocabulary.hpp"

namespace muse {

// Sparse accumulator of selector ascent directions over rows of Q and P.
//
// A step with per-sense logit coefficients a_k on context vector c moves
//   Q[word, k]  by a_k * c
//   P[j]        by sum_k a_k * Q[word, k]   for every context word j
// with Q read before the step. Policy gradient uses a_k = r (1[k = z] - pi_k);
// Q-learning uses a_k = (p - q_z) 1[k = z], the negative cross-entropy
// gradient with respect to the selected logit.
template <typename Real>
class SelectorGradient {
 public:
  void add(WordId word, const ContextWindow& window, std::span<const double> coeff,
           const BasicModelParams<Real>& params) {
    const std::size_t d = params.dim;
    ctx_.resize(d);
    encode_context<Real>(window, params, ctx_);
    back_.assign(d, Real(0));
    bool any = false;
    for (std::size_t k = 0; k < coeff.size(); ++k) {
      if (coeff[k] == 0.0) continue;
      any = true;
      const auto a = static_cast<Real>(coeff[k]);
      axpy<Real>(a, std::span<const Real>(ctx_),
                 row(q_index_, q_rows_, q_pool_, q_hits_, std::size_t(word) * params.senses + k, d));
      axpy<Real>(a, params.selector_row(word, k), back_);
    }
    if (!any) return;
    window.for_each_context([&](WordId j) {
      axpy<Real>(Real(1), std::span<const Real>(back_), row(p_index_, p_rows_, p_pool_, p_hits_, j, d));
    });
  }

  // params += scale * accumulated direction, divided per row by the number
  // of contributions when per_row is set. Throws on a non-finite row.
  void apply(BasicModelParams<Real>& params, Real scale, bool per_row = false) {
    const std::size_t d = params.dim;
    for (std::size_t i = 0; i < q_rows_.size(); ++i) {
      auto dst = params.selector.row(q_rows_[i]);
      const Real s = per_row ? scale / static_cast<Real>(q_hits_[i]) : scale;
      axpy<Real>(s, std::span<const Real>(q_pool_.data() + i * d, d), dst);
      check_finite(dst, "selector");
    }
    for (std::size_t i = 0; i < p_rows_.size(); ++i) {
      auto dst = params.context.row(p_rows_[i]);
      const Real s = per_row ? scale / static_cast<Real>(p_hits_[i]) : scale;
      axpy<Real>(s, std::span<const Real>(p_pool_.data() + i * d, d), dst);
      check_finite(dst, "context");
    }
  }

  void clear() {
    q_index_.clear();
    p_index_.clear();
    q_rows_.clear();
    p_rows_.clear();
    q_pool_.clear();
    p_pool_.clear();
    q_hits_.clear();
    p_hits_.clear();
  }

  bool empty() const { return q_rows_.empty() && p_rows_.empty(); }

 private:
  static std::span<Real> row(std::unordered_map<std::size_t, std::size_t>& index, std::vector<std::size_t>& rows,
                             std::vector<Real>& pool, std::vector<std::uint32_t>& hits, std::size_t r, std::size_t d) {
    auto [it, inserted] = index.emplace(r, rows.size());
    if (inserted) {
      rows.push_back(r);
      hits.push_back(0);
      pool.resize(pool.size() + d, Real(0));
    }
    ++hits[it->second];
    return {pool.data() + it->second * d, d};
  }

  static void check_finite(std::span<const Real> r, const char* what) {
    for (Real x : r) {
      if (!std::isfinite(x)) throw TrainingFailure(std::string("non-finite value in ") + what + " parameters");
    }
  }

  std::unordered_map<std::size_t, std::size_t> q_index_, p_index_;
  std::vector<std::size_t> q_rows_, p_rows_;
  std::vector<Real> q_pool_, p_pool_;
  std::vector<std::uint32_t> q_hits_, p_hits_;
  std::vector<Real> ctx_, back_;
};

inline void policy_gradient_coefficients(const SelectionScores& s, std::size_t selected, double reward,
                                  std::vector<double>& coeff) {
  coeff.assign(s.senses(), 0.0);
  for (std::size_t k = 0; k < s.senses(); ++k) {
    coeff[k] = reward * ((k == selected ? 1.0 : 0.0) - s.policy[k]);
  }
}

inline void qlearning_coefficients(const SelectionScores& s, std::size_t selected, double target_prob,
                                   std::vector<double>& coeff) {
  coeff.assign(s.senses(), 0.0);
  coeff[selected] = target_prob - s.qvalues[selected];
}

// REINFORCE step: theta += lr * reward * d log pi(z | context) / d theta,
// over Q[word, *] and the P rows of the context words.
template <typename Real>
void policy_gradient_update(SenseRef z, double reward, const ContextWindow& window, BasicModelParams<Real>& params,
                            Real lr) {
  const auto s = score_senses(window, params);
  std::vector<double> coeff;
  policy_gradient_coefficients(s, z.sense, reward, coeff);
  SelectorGradient<Real> g;
  g.add(z.word, window, coeff, params);
  g.apply(params, lr);
}

// Cross-entropy descent between the constant target p and q = sigma(Q_z . c);
// only the selected sense's Q row (and the context P rows) move.
template <typename Real>
void qlearning_update(SenseRef z, double target_prob, const ContextWindow& window, BasicModelParams<Real>& params,
                      Real lr) {
  if (!(target_prob >= 0.0 && target_prob <= 1.0)) throw ConfigError("Q-learning target must lie in [0, 1]");
  const auto s = score_senses(window, params);
  std::vector<double> coeff;
  qlearning_coefficients(s, z.sense, target_prob, coeff);
  SelectorGradient<Real> g;
  g.add(z.word, window, coeff, params);
  g.apply(params, lr);
}

inline double entropy(std::span<const double> p) {
  double h = 0.0;
  for (double x : p) {
    if (x > 0.0) h -= x * std::log(x);
  }
  return h;
}

struct TrainStats {
  std::uint64_t samples_seen = 0;
  double reward_sum = 0.0;
  double entropy_sum = 0.0;
  double lr = 0.0;
  bool finite = true;

  double mean_reward() const { return samples_seen ? reward_sum / double(samples_seen) : 0.0; }
  double mean_entropy() const { return samples_seen ? entropy_sum / double(samples_seen) : 0.0; }

  void merge(const TrainStats& o) {
    samples_seen += o.samples_seen;
    reward_sum += o.reward_sum;
    entropy_sum += o.entropy_sum;
    lr = o.lr;
    finite = finite && o.finite;
  }
};

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Expected number of surviving tokens per pass, used to plan the
// learning-rate decay.
inline std::uint64_t expected_tokens_per_epoch(const Vocabulary& vocab, double subsample_t) {
  const bool enabled = subsample_t > 0.0 && std::isfinite(subsample_t);
  double total = 0.0;
  for (WordId i = 0; i < vocab.size(); ++i) {
    total += double(vocab.count(i)) * (enabled ? keep_probability(i, vocab, subsample_t) : 1.0);
  }
  return static_cast<std::uint64_t>(total);
}

// Joint trainer: each batch 1) selects senses for every sample with the
// batch-start parameters, 2) runs one negative-sampling step per sample on
// U and V, 3) applies one reduced selector update to P and Q carrying the
// reward of the target side only.
template <typename Real = float>
class BasicTrainer {
 public:
  using BatchCallback = std::function<void(const TrainStats&)>;

  BasicTrainer(const Vocabulary& vocab, BasicModelParams<Real>& params, TrainingConfig config)
      : vocab_(vocab), params_(params), config_(std::move(config)),
        table_(build_negative_table(vocab, config_.senses, config_.unigram_power)),
        strategy_(config_.selection_strategy()), rng_(mix_seed(config_.seed, 0x5e1ec7)) {
    config_.validate();
    if (params.vocab_size != vocab.size() || params.senses != config_.senses || params.dim != config_.dim) {
      throw ConfigError("trainer: parameter shapes disagree with vocabulary/config");
    }
    planned_ = std::max<std::uint64_t>(1, expected_tokens_per_epoch(vocab, config_.subsample_t) * config_.epochs);
  }

  const TrainingConfig& config() const { return config_; }
  const TrainStats& stats() const { return stats_; }
  const UnigramTable& table() const { return table_; }
  std::uint64_t planned_samples() const { return planned_; }
  void set_planned_samples(std::uint64_t n) { planned_ = std::max<std::uint64_t>(1, n); }
  void set_batch_callback(BatchCallback cb) { on_batch_ = std::move(cb); }

  Real lr_at(std::uint64_t seen) const {
    const double frac = std::max(config_.min_lr_fraction, 1.0 - double(seen) / double(planned_));
    return static_cast<Real>(config_.lr0 * frac);
  }

  // One sample with per-sample semantics (a batch of one).
  TrainStats train_step(const CollocationSample& sample) {
    Worker w(rng_);
    TrainStats delta;
    std::span<const CollocationSample> one(&sample, 1);
    process_batch(one, w, delta);
    stats_.merge(delta);
    return delta;
  }

  TrainStats train_epoch(const std::string& corpus_path, std::size_t epoch) {
    TrainStats epoch_stats;
    if (config_.threads <= 1) {
      SampleStream stream(corpus_path, vocab_, config_.stream_options(), mix_seed(config_.seed, 1000 + epoch));
      Worker w(rng_);
      run_stream(stream, w, epoch_stats);
    } else {
      const auto bounds = shard_boundaries(corpus_path, config_.threads);
      std::vector<TrainStats> per(config_.threads);
      std::vector<std::thread> pool;
      std::vector<std::exception_ptr> errors(config_.threads);
      for (std::size_t t = 0; t < config_.threads; ++t) {
        pool.emplace_back([&, t] {
          try {
            Rng rng(mix_seed(config_.seed, 2000 + epoch * 131 + t));
            SampleStream stream(corpus_path, vocab_, config_.stream_options(),
                                mix_seed(config_.seed, 3000 + epoch * 131 + t), bounds[t], bounds[t + 1]);
            Worker w(rng);
            run_stream(stream, w, per[t]);
          } catch (...) {
            errors[t] = std::current_exception();
          }
        });
      }
      for (auto& th : pool) th.join();
      for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
      for (const auto& s : per) epoch_stats.merge(s);
      stats_.lr = lr_at(seen_.load());
    }
    return epoch_stats;
  }

  TrainStats train(const std::string& corpus_path) {
    TrainStats total;
    for (std::size_t e = 0; e < config_.epochs; ++e) total.merge(train_epoch(corpus_path, e));
    if (!params_.all_finite()) throw TrainingFailure("non-finite parameters after training");
    return total;
  }

 private:
  struct Worker {
    explicit Worker(Rng& r) : rng(r) {}
    Rng& rng;
    std::vector<CollocationSample> batch;
    std::vector<SenseRef> targets, collocs;
    std::vector<double> rewards;
    SelectorGradient<Real> grad;
    SelectionScores scores;
    std::vector<double> coeff;
  };

  void run_stream(SampleStream& stream, Worker& w, TrainStats& out) {
    w.batch.resize(config_.batch_size);
    while (true) {
      std::size_t filled = 0;
      while (filled < config_.batch_size && stream.next(w.batch[filled])) ++filled;
      if (filled == 0) break;
      TrainStats delta;
      process_batch(std::span<const CollocationSample>(w.batch.data(), filled), w, delta);
      out.merge(delta);
      if (config_.threads <= 1) {
        stats_.merge(delta);
        if (on_batch_) on_batch_(stats_);
      }
      if (filled < config_.batch_size) break;
    }
  }

  void process_batch(std::span<const CollocationSample> batch, Worker& w, TrainStats& delta) {
    const std::size_t b = batch.size();
    w.targets.resize(b);
    w.collocs.resize(b);
    w.rewards.resize(b);

    // Phase 1: select senses with the batch-start selector.
    for (std::size_t i = 0; i < b; ++i) {
      const auto& s = batch[i];
      score_window(s.colloc_window, w);
      w.collocs[i] = select_sense(w.scores, strategy_, w.rng);
      score_window(s.target_window, w);
      w.targets[i] = select_sense(w.scores, strategy_, w.rng);
      delta.entropy_sum += entropy(w.scores.policy);
    }

    // Phase 2: representation updates, rewards read before each update.
    for (std::size_t i = 0; i < b; ++i) {
      const std::uint64_t seen = seen_.fetch_add(1, std::memory_order_relaxed);
      const Real lr = lr_at(seen);
      const SenseRef zt = w.targets[i];
      const SenseRef zc = w.collocs[i];
      double reward = 0.0;
      if (config_.learner == Learner::QLearning && config_.reward == RewardKind::BernoulliLik) {
        reward = config_.reward_direction == RewardDirection::TargetToColloc ? reward_bernoulli(zt, zc, params_)
                                                                             : reward_bernoulli(zc, zt, params_);
      }
      const double loglik = sgns_update<Real>(zt, zc, params_, table_, config_.negatives, lr, w.rng);
      if (config_.learner == Learner::PolicyGradient) {
        reward = loglik;
      } else if (config_.reward == RewardKind::ApproxLogLik) {
        reward = std::exp(loglik);
      }
      w.rewards[i] = reward;
      delta.reward_sum += reward;
      ++delta.samples_seen;
      maybe_report(seen + 1);
    }

    // Phase 3: one reduced selector step for the whole batch, target side only.
    w.grad.clear();
    for (std::size_t i = 0; i < b; ++i) {
      const auto& win = batch[i].target_window;
      score_window(win, w);
      if (config_.learner == Learner::PolicyGradient) {
        policy_gradient_coefficients(w.scores, w.targets[i].sense, w.rewards[i], w.coeff);
      } else {
        qlearning_coefficients(w.scores, w.targets[i].sense, w.rewards[i], w.coeff);
      }
      w.grad.add(win.target, win, w.coeff, params_);
    }
    const Real lr = lr_at(seen_.load(std::memory_order_relaxed));
    const Real scale = config_.batch_reduction == BatchReduction::Mean ? lr / static_cast<Real>(b) : lr;
    w.grad.apply(params_, scale, config_.batch_reduction == BatchReduction::RowMean);
    delta.lr = double(lr);
  }

  void score_window(const ContextWindow& win, Worker& w) {
    ctx_.resize(params_.dim);
    encode_context<Real>(win, params_, ctx_);
    score_from_context<Real>(win.target, std::span<const Real>(ctx_), params_, w.scores);
  }

  void maybe_report(std::uint64_t seen) {
    if (config_.progress_every == 0 || seen % config_.progress_every != 0) return;
    std::fprintf(stderr, "samples=%llu lr=%.6g reward=%.6g entropy=%.6g\n", static_cast<unsigned long long>(seen),
                 double(lr_at(seen)), stats_.mean_reward(), stats_.mean_entropy());
  }

  const Vocabulary& vocab_;
  BasicModelParams<Real>& params_;
  TrainingConfig config_;
  UnigramTable table_;
  Strategy strategy_;
  Rng rng_;
  std::uint64_t planned_ = 1;
  std::atomic<std::uint64_t> seen_{0};
  TrainStats stats_;
  BatchCallback on_batch_;
  static thread_local inline std::vector<Real> ctx_;
};

using Trainer = BasicTrainer<float>;

// Repeated selection and selector updates on one fixed context with frozen
// per-sense rewards and no representation learning.
struct DiagnosticSetup {
  ContextWindow window;
  std::vector<double> frozen_rewards;  // log-likelihoods (policy) or targets in (0,1) (Q-learning)
  Learner learner = Learner::PolicyGradient;
  Strategy strategy = Strategy::greedy();
  double lr = 0.025;
  std::size_t steps = 200;
  std::uint64_t seed = 1;
};

struct DiagnosticTrajectory {
  // Entry 0 is the initial state; entry s follows the s-th update.
  std::vector<double> max_probability;
  std::vector<std::uint32_t> greedy_sense;
  // Per update: the selected sense and its policy probability before the update.
  std::vector<std::uint32_t> selected;
  std::vector<double> selected_probability;
};

template <typename Real>
DiagnosticTrajectory run_appendix_a_diagnostic(BasicModelParams<Real>& params, const DiagnosticSetup& setup) {
  if (setup.frozen_rewards.size() != params.senses) {
    throw ConfigError("diagnostic needs one frozen reward per sense");
  }
  Rng rng(setup.seed);
  DiagnosticTrajectory t;
  auto record = [&](const SelectionScores& s) {
    t.max_probability.push_back(*std::max_element(s.policy.begin(), s.policy.end()));
    t.greedy_sense.push_back(static_cast<std::uint32_t>(argmax_index(s.logits)));
  };
  auto s = score_senses(setup.window, params);
  record(s);
  for (std::size_t step = 0; step < setup.steps; ++step) {
    const SenseRef z = select_sense(s, setup.strategy, rng);
    t.selected.push_back(z.sense);
    t.selected_probability.push_back(s.policy[z.sense]);
    const double r = setup.frozen_rewards[z.sense];
    if (setup.learner == Learner::PolicyGradient) {
      policy_gradient_update<Real>(z, r, setup.window, params, static_cast<Real>(setup.lr));
    } else {
      qlearning_update<Real>(z, r, setup.window, params, static_cast<Real>(setup.lr));
    }
    s = score_senses(setup.window, params);
    record(s);
  }
  return t;
}

}  // namespace muse
