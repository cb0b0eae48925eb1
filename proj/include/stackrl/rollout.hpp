#ifndef STACKRL_ROLLOUT_HPP_
#define STACKRL_ROLLOUT_HPP_

#include <cstdint>
#include <vector>

#include "stackrl/net.hpp"
#include "stackrl/rng.hpp"
#include "stackrl/vec_env.hpp"

namespace stackrl {

using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Transition {
  RowVec obs;
  RowVec action;
  double reward = 0.0;
  bool done = false;
  DoneReason done_reason = DoneReason::kNone;
  double value = 0.0;
  double logp = 0.0;
};

struct EpisodeRecord {
  int env = 0;
  int length = 0;
  bool success = false;
  int subgoals = 0;
  double raw_return = 0.0;
};

// T x N window of experience. Per-sample arrays are flattened t-major:
// row t * N + n holds environment n at step t.
struct HorizonBuffer {
  int horizon = 0;
  int num_envs = 0;
  PolicyHead head = PolicyHead::kGaussian;

  Mat obs;
  Mat actions;         // sampled (pre-clamp) actions or indices
  Mat dist;            // behaviour distribution parameters
  RowVec log_sigma;    // behaviour log_sigma
  Mat rewards;         // T x N, scaled, timeout bootstrap folded in
  Mat raw_rewards;     // T x N, as returned by the environments
  Mask dones;          // T x N
  std::vector<DoneReason> reasons;  // flattened like obs
  Mat values;          // T x N
  Mat logp;            // T x N
  Vec bootstrap_values;  // V(s_T) per environment

  std::vector<EpisodeRecord> episodes;  // finished inside the window, in (t, n) order
  RewardBreakdown signal_sums{};        // unscaled, summed over all T x N steps

  int size() const { return horizon * num_envs; }
  Transition transition(int t, int n) const;
  // Behaviour policy for the given flattened rows.
  PolicyBatch behaviour(const std::vector<int>& rows) const;
};

struct CollectOptions {
  double gamma = 0.99;
  bool bootstrap_on_timeout = true;
  double reward_scale = 1.0;
};

// One dedicated action-sampling stream per environment index.
std::vector<CounterRng> make_action_streams(std::uint64_t seed, int num_envs,
                                            Stream family = Stream::kAction);

// Steps every environment T times with asynchronous resets.
HorizonBuffer collect_horizon(const NetParams& params, VecEnv& envs, int horizon,
                              const CollectOptions& opts, std::vector<CounterRng>& streams);

struct EvalResult {
  double success_rate = 0.0;
  double mean_episode_length = 0.0;
  int episodes = 0;
};

// Runs until `episodes` complete episodes have finished (taken in (step, env)
// order). deterministic=true uses the distribution mode.
EvalResult evaluate_policy(const NetParams& params, VecEnv& envs, int episodes, bool deterministic,
                           std::vector<CounterRng>& streams);

}  // namespace stackrl

#endif  // STACKRL_ROLLOUT_HPP_
