#include "stackrl/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "stackrl/distributions.hpp"
#include "stackrl/errors.hpp"

namespace stackrl {

void GaeConfig::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gae.gamma must lie in [0, 1]");
  if (!(tau >= 0.0 && tau <= 1.0)) throw ConfigError("gae.tau must lie in [0, 1]");
}

void PpoConfig::validate() const {
  if (!(clip_epsilon > 0.0)) throw ConfigError("ppo.clip_epsilon must be positive");
  if (!(kl_threshold > 0.0)) throw ConfigError("ppo.kl_threshold must be positive");
  if (!(lr > 0.0)) throw ConfigError("ppo.lr must be positive");
  if (mini_epochs < 1) throw ConfigError("ppo.mini_epochs must be >= 1");
  if (minibatch_size < 1) throw ConfigError("ppo.minibatch_size must be >= 1");
  if (!(reward_scale > 0.0)) throw ConfigError("ppo.reward_scale must be positive");
}

GaeResult compute_gae(const Mat& rewards, const Mat& values, const Mask& dones,
                      const Vec& bootstrap_values, const GaeConfig& cfg) {
  const Eigen::Index t_len = rewards.rows();
  const Eigen::Index n = rewards.cols();
  if (values.rows() != t_len || values.cols() != n || dones.rows() != t_len ||
      dones.cols() != n || bootstrap_values.size() != n) {
    throw ConfigError("compute_gae: rewards, values, dones and bootstrap shapes disagree");
  }
  GaeResult out{Mat(t_len, n), Mat(t_len, n)};
  for (Eigen::Index col = 0; col < n; ++col) {
    double next_value = bootstrap_values(col);
    double next_adv = 0.0;
    for (Eigen::Index t = t_len - 1; t >= 0; --t) {
      const double live = dones(t, col) ? 0.0 : 1.0;
      const double delta = rewards(t, col) + cfg.gamma * next_value * live - values(t, col);
      const double adv = delta + cfg.gamma * cfg.tau * live * next_adv;
      out.advantages(t, col) = adv;
      out.returns(t, col) = adv + values(t, col);
      next_value = values(t, col);
      next_adv = adv;
    }
  }
  return out;
}

double ppo_objective(std::span<const double> logp_new, std::span<const double> logp_old,
                     std::span<const double> advantages, double clip_epsilon) {
  if (logp_new.size() != logp_old.size() || logp_new.size() != advantages.size()) {
    throw ConfigError("ppo_objective: input lengths differ");
  }
  if (logp_new.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < logp_new.size(); ++i) {
    const double ratio = std::exp(logp_new[i] - logp_old[i]);
    const double clipped = std::clamp(ratio, 1.0 - clip_epsilon, 1.0 + clip_epsilon);
    total += std::min(ratio * advantages[i], clipped * advantages[i]);
  }
  return total / static_cast<double>(logp_new.size());
}

double kl_estimate(const PolicyBatch& old_dist, const PolicyBatch& new_dist) {
  const Vec kl = kl_divergence(old_dist, new_dist);
  return kl.size() == 0 ? 0.0 : kl.mean();
}

double lr_update(const PpoConfig& cfg, double current_lr, double observed_kl) {
  if (cfg.lr_mode == LrMode::kFixed) return current_lr;
  double lr = current_lr;
  if (observed_kl > 2.0 * cfg.kl_threshold) {
    lr /= 1.5;
  } else if (observed_kl < 0.5 * cfg.kl_threshold) {
    lr *= 1.5;
  }
  return std::clamp(lr, kMinLearningRate, kMaxLearningRate);
}

void normalize_advantages(Vec& adv) {
  if (adv.size() < 2) return;
  const double mean = adv.mean();
  adv.array() -= mean;
  const double var = adv.squaredNorm() / static_cast<double>(adv.size());
  if (!(var > 0.0)) return;
  adv /= std::sqrt(var);
  // A second centring pass removes the rounding left by the first.
  adv.array() -= adv.mean();
}

LossSpec make_ppo_loss(const Mat& actions, const Vec& logp_old, const Vec& advantages,
                       const Vec& returns, const PpoConfig& cfg, const PolicyBatch* behaviour,
                       LossStats* stats) {
  return [&actions, &logp_old, &advantages, &returns, cfg, behaviour,
          stats](const PolicyBatch& out) -> HeadGradient {
    const Eigen::Index b = out.size();
    const double inv_b = 1.0 / static_cast<double>(b);
    const Vec lp = log_prob(out, actions);
    const Vec ent = entropy(out);

    HeadGradient g;
    g.d_dist = Mat::Zero(b, out.dist.cols());
    g.d_value = Vec(b);
    if (out.head == PolicyHead::kGaussian) g.d_log_sigma = RowVec::Zero(out.log_sigma.size());

    double surrogate = 0.0;
    double value_loss = 0.0;
    double clipped_count = 0.0;
    const RowVec sigma = out.head == PolicyHead::kGaussian ? RowVec(out.log_sigma.array().exp())
                                                           : RowVec();
    for (Eigen::Index i = 0; i < b; ++i) {
      const double adv = advantages(i);
      const double ratio = std::exp(lp(i) - logp_old(i));
      const double clipped = std::clamp(ratio, 1.0 - cfg.clip_epsilon, 1.0 + cfg.clip_epsilon);
      const bool unclipped = ratio * adv <= clipped * adv;
      surrogate += std::min(ratio * adv, clipped * adv);
      if (clipped != ratio) clipped_count += 1.0;
      // d loss / d logp_new for this row.
      const double d_lp = unclipped ? -adv * ratio * inv_b : 0.0;

      if (out.head == PolicyHead::kGaussian) {
        for (Eigen::Index j = 0; j < out.dist.cols(); ++j) {
          const double diff = actions(i, j) - out.dist(i, j);
          const double s2 = sigma(j) * sigma(j);
          g.d_dist(i, j) = d_lp * diff / s2;
          g.d_log_sigma(j) += d_lp * (diff * diff / s2 - 1.0);
        }
      } else {
        const RowVec p = softmax(out.dist.row(i));
        const auto a = static_cast<Eigen::Index>(actions(i, 0));
        for (Eigen::Index j = 0; j < p.size(); ++j) {
          const double onehot = j == a ? 1.0 : 0.0;
          g.d_dist(i, j) = d_lp * (onehot - p(j));
          if (cfg.entropy_coef != 0.0 && p(j) > 0.0) {
            // dH/dlogit_j = -p_j (log p_j + H)
            g.d_dist(i, j) += cfg.entropy_coef * inv_b * p(j) * (std::log(p(j)) + ent(i));
          }
        }
      }

      const double err = out.value(i) - returns(i);
      value_loss += 0.5 * err * err;
      g.d_value(i) = cfg.value_coef * err * inv_b;
    }
    if (out.head == PolicyHead::kGaussian && cfg.entropy_coef != 0.0) {
      // Gaussian entropy is sum_j log sigma_j + const for every row.
      g.d_log_sigma.array() -= cfg.entropy_coef;
    }

    const double mean_surrogate = surrogate * inv_b;
    const double mean_value_loss = value_loss * inv_b;
    const double mean_entropy = ent.mean();
    g.loss = -mean_surrogate + cfg.value_coef * mean_value_loss - cfg.entropy_coef * mean_entropy;

    if (stats) {
      stats->policy_loss = -mean_surrogate;
      stats->value_loss = mean_value_loss;
      stats->entropy = mean_entropy;
      stats->clip_fraction = clipped_count * inv_b;
      stats->kl = behaviour ? kl_estimate(*behaviour, out) : 0.0;
    }
    return g;
  };
}

IterationMetrics summarize_buffer(const HorizonBuffer& buffer, int num_subgoals) {
  IterationMetrics m;
  const double steps = static_cast<double>(buffer.size());
  m.mean_reward = buffer.raw_rewards.sum() / steps;
  for (std::size_t k = 0; k < kNumSignals; ++k) m.signal_means[k] = buffer.signal_sums[k] / steps;
  m.episodes = static_cast<int>(buffer.episodes.size());
  m.subgoal_rates.assign(static_cast<std::size_t>(std::max(num_subgoals, 0)), 0.0);
  if (m.episodes > 0) {
    double successes = 0.0;
    double length = 0.0;
    for (const auto& e : buffer.episodes) {
      successes += e.success ? 1.0 : 0.0;
      length += e.length;
      for (int k = 0; k < num_subgoals; ++k) {
        if (e.subgoals > k) m.subgoal_rates[static_cast<std::size_t>(k)] += 1.0;
      }
    }
    m.success_rate = successes / m.episodes;
    m.mean_episode_length = length / m.episodes;
    for (auto& r : m.subgoal_rates) r /= m.episodes;
  }
  return m;
}

IterationMetrics train_iteration(NetParams& params, AdamState& adam, const HorizonBuffer& buffer,
                                 const PpoConfig& cfg, const GaeConfig& gae, double& lr,
                                 CounterRng& shuffle_rng, int num_subgoals) {
  const int total = buffer.size();
  if (total < 1 || buffer.obs.rows() != total) {
    throw ConfigError("train_iteration: the horizon buffer is not fully populated");
  }
  if (total % cfg.minibatch_size != 0) {
    throw ConfigError("minibatch size " + std::to_string(cfg.minibatch_size) +
                      " does not divide the window of " + std::to_string(total) + " samples");
  }

  IterationMetrics metrics = summarize_buffer(buffer, num_subgoals);
  metrics.lr = lr;

  const GaeResult est =
      compute_gae(buffer.rewards, buffer.values, buffer.dones, buffer.bootstrap_values, gae);
  // T x N row-major storage is already t-major, matching the sample rows.
  Vec adv = Eigen::Map<const Vec>(est.advantages.data(), total);
  const Vec ret = Eigen::Map<const Vec>(est.returns.data(), total);
  const Vec logp_old = Eigen::Map<const Vec>(buffer.logp.data(), total);
  normalize_advantages(adv);

  const int mb = cfg.minibatch_size;
  const int num_batches = total / mb;
  std::vector<int> order(static_cast<std::size_t>(total));

  Mat mb_obs(mb, buffer.obs.cols());
  Mat mb_act(mb, buffer.actions.cols());
  Vec mb_logp(mb), mb_adv(mb), mb_ret(mb);
  std::vector<int> rows(static_cast<std::size_t>(mb));

  LossStats last_epoch{};
  for (int epoch = 0; epoch < cfg.mini_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[static_cast<std::size_t>(shuffle_rng.below(i))]);
    }
    LossStats epoch_sum{};
    for (int batch = 0; batch < num_batches; ++batch) {
      for (int k = 0; k < mb; ++k) {
        const int r = order[static_cast<std::size_t>(batch * mb + k)];
        rows[static_cast<std::size_t>(k)] = r;
        mb_obs.row(k) = buffer.obs.row(r);
        mb_act.row(k) = buffer.actions.row(r);
        mb_logp(k) = logp_old(r);
        mb_adv(k) = adv(r);
        mb_ret(k) = ret(r);
      }
      const PolicyBatch behaviour = buffer.behaviour(rows);
      LossStats stats;
      BackwardResult res = backward(
          params, mb_obs, make_ppo_loss(mb_act, mb_logp, mb_adv, mb_ret, cfg, &behaviour, &stats));
      if (!std::isfinite(res.loss)) {
        throw InvariantViolation("non-finite PPO loss in epoch " + std::to_string(epoch) +
                                 ", minibatch " + std::to_string(batch));
      }
      adam_step(params, adam, res.grads, lr);
      epoch_sum.policy_loss += stats.policy_loss;
      epoch_sum.value_loss += stats.value_loss;
      epoch_sum.entropy += stats.entropy;
      epoch_sum.kl += stats.kl;
      epoch_sum.clip_fraction += stats.clip_fraction;
    }
    last_epoch = epoch_sum;
  }
  if (!all_finite(params)) throw InvariantViolation("parameters became non-finite");

  const double inv = 1.0 / num_batches;
  metrics.policy_loss = last_epoch.policy_loss * inv;
  metrics.value_loss = last_epoch.value_loss * inv;
  metrics.entropy = last_epoch.entropy * inv;
  metrics.clip_fraction = last_epoch.clip_fraction * inv;
  metrics.kl = last_epoch.kl * inv;
  lr = lr_update(cfg, lr, metrics.kl);
  metrics.next_lr = lr;
  return metrics;
}

}  // namespace stackrl
