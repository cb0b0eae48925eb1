#include "stackrl/rollout.hpp"

#include <string>

#include "stackrl/distributions.hpp"
#include "stackrl/errors.hpp"

namespace stackrl {
namespace {

struct Sampled {
  PolicyBatch policy;
  Mat actions;
};

Sampled sample_batch(const NetParams& params, const Mat& obs, std::vector<CounterRng>& streams,
                     bool deterministic) {
  Sampled s;
  s.policy = forward(params, obs);
  const Eigen::Index n = obs.rows();
  const Eigen::Index cols = params.head == PolicyHead::kGaussian ? s.policy.dist.cols() : 1;
  s.actions = Mat(n, cols);
  for (Eigen::Index i = 0; i < n; ++i) {
    s.actions.row(i) = sample_action(s.policy, i, streams[static_cast<std::size_t>(i)], deterministic);
  }
  return s;
}

}  // namespace

std::vector<CounterRng> make_action_streams(std::uint64_t seed, int num_envs, Stream family) {
  std::vector<CounterRng> out;
  out.reserve(static_cast<std::size_t>(num_envs));
  for (int i = 0; i < num_envs; ++i) out.emplace_back(seed, family, static_cast<std::uint64_t>(i));
  return out;
}

Transition HorizonBuffer::transition(int t, int n) const {
  const int row = t * num_envs + n;
  Transition tr;
  tr.obs = obs.row(row);
  tr.action = actions.row(row);
  tr.reward = rewards(t, n);
  tr.done = dones(t, n);
  tr.done_reason = reasons[static_cast<std::size_t>(row)];
  tr.value = values(t, n);
  tr.logp = logp(t, n);
  return tr;
}

PolicyBatch HorizonBuffer::behaviour(const std::vector<int>& rows) const {
  PolicyBatch b;
  b.head = head;
  b.log_sigma = log_sigma;
  b.dist = Mat(static_cast<Eigen::Index>(rows.size()), dist.cols());
  b.value = Vec(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(rows[i]);
    b.dist.row(static_cast<Eigen::Index>(i)) = dist.row(r);
    b.value(static_cast<Eigen::Index>(i)) = values.data()[r];
  }
  return b;
}

HorizonBuffer collect_horizon(const NetParams& params, VecEnv& envs, int horizon,
                              const CollectOptions& opts, std::vector<CounterRng>& streams) {
  if (horizon < 1) throw ConfigError("horizon length must be >= 1");
  const int n = envs.size();
  if (static_cast<int>(streams.size()) != n) {
    throw ConfigError("need one action stream per environment");
  }
  HorizonBuffer buf;
  buf.horizon = horizon;
  buf.num_envs = n;
  buf.head = params.head;
  buf.log_sigma = params.log_sigma;
  const int rows = horizon * n;
  const int act_cols = params.head == PolicyHead::kGaussian ? static_cast<int>(params.log_sigma.size()) : 1;
  buf.obs = Mat(rows, envs.observation_size());
  buf.actions = Mat(rows, act_cols);
  buf.dist = Mat(rows, params.policy.weight.cols());
  buf.rewards = Mat(horizon, n);
  buf.raw_rewards = Mat(horizon, n);
  buf.dones = Mask::Constant(horizon, n, false);
  buf.reasons.assign(static_cast<std::size_t>(rows), DoneReason::kNone);
  buf.values = Mat(horizon, n);
  buf.logp = Mat(horizon, n);

  for (int t = 0; t < horizon; ++t) {
    const Mat obs = envs.observations();
    Sampled s = sample_batch(params, obs, streams, false);
    const Vec lp = log_prob(s.policy, s.actions);

    buf.obs.middleRows(t * n, n) = obs;
    buf.actions.middleRows(t * n, n) = s.actions;
    buf.dist.middleRows(t * n, n) = s.policy.dist;
    buf.values.row(t) = s.policy.value.transpose();
    buf.logp.row(t) = lp.transpose();

    VecStep step = envs.step(s.actions);

    std::vector<int> timeout_rows;
    for (int i = 0; i < n; ++i) {
      const StepOutcome& o = step.outcomes[static_cast<std::size_t>(i)];
      buf.raw_rewards(t, i) = o.reward;
      buf.rewards(t, i) = opts.reward_scale * o.reward;
      buf.dones(t, i) = o.done;
      buf.reasons[static_cast<std::size_t>(t * n + i)] = o.reason;
      for (std::size_t k = 0; k < kNumSignals; ++k) buf.signal_sums[k] += o.breakdown[k];
      if (o.done && o.reason == DoneReason::kTimeout && opts.bootstrap_on_timeout) {
        timeout_rows.push_back(i);
      }
      if (o.done) {
        const auto idx = static_cast<std::size_t>(i);
        buf.episodes.push_back(EpisodeRecord{i, step.episode_lengths[idx], o.success, o.subgoals,
                                             step.episode_returns[idx]});
      }
    }
    if (!timeout_rows.empty()) {
      Mat term(static_cast<Eigen::Index>(timeout_rows.size()), step.terminal_obs.cols());
      for (std::size_t k = 0; k < timeout_rows.size(); ++k) {
        term.row(static_cast<Eigen::Index>(k)) = step.terminal_obs.row(timeout_rows[k]);
      }
      const Vec v = forward(params, term).value;
      for (std::size_t k = 0; k < timeout_rows.size(); ++k) {
        buf.rewards(t, timeout_rows[k]) += opts.gamma * v(static_cast<Eigen::Index>(k));
      }
    }
  }
  buf.bootstrap_values = forward(params, envs.observations()).value;
  return buf;
}

EvalResult evaluate_policy(const NetParams& params, VecEnv& envs, int episodes, bool deterministic,
                           std::vector<CounterRng>& streams) {
  if (episodes < 1) throw ConfigError("evaluation needs at least one episode");
  if (static_cast<int>(streams.size()) != envs.size()) {
    throw ConfigError("need one action stream per environment");
  }
  EvalResult r;
  double successes = 0.0;
  double length_sum = 0.0;
  while (r.episodes < episodes) {
    Sampled s = sample_batch(params, envs.observations(), streams, deterministic);
    VecStep step = envs.step(s.actions);
    for (int i = 0; i < envs.size() && r.episodes < episodes; ++i) {
      const StepOutcome& o = step.outcomes[static_cast<std::size_t>(i)];
      if (!o.done) continue;
      r.episodes += 1;
      successes += o.reason == DoneReason::kGoal ? 1.0 : 0.0;
      length_sum += step.episode_lengths[static_cast<std::size_t>(i)];
    }
  }
  r.success_rate = successes / r.episodes;
  r.mean_episode_length = length_sum / r.episodes;
  return r;
}

}  // namespace stackrl
