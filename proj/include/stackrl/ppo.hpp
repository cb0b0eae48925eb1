#ifndef STACKRL_PPO_HPP_
#define STACKRL_PPO_HPP_

#include <span>

#include "stackrl/adam.hpp"
#include "stackrl/net.hpp"
#include "stackrl/rollout.hpp"

namespace stackrl {

struct GaeConfig {
  double gamma = 0.99;
  double tau = 0.95;

  void validate() const;
  friend bool operator==(const GaeConfig&, const GaeConfig&) = default;
};

enum class LrMode { kFixed, kKlAdaptive };

struct PpoConfig {
  double clip_epsilon = 0.2;
  double kl_threshold = 0.008;
  LrMode lr_mode = LrMode::kFixed;
  double lr = 5e-4;
  bool lr_reset_on_stage = false;
  int mini_epochs = 4;
  int minibatch_size = 1024;
  double value_coef = 0.5;
  double entropy_coef = 0.0;
  // Multiplies environment rewards before advantage estimation.
  double reward_scale = 1.0;

  void validate() const;
  friend bool operator==(const PpoConfig&, const PpoConfig&) = default;
};

inline constexpr double kMinLearningRate = 1e-6;
inline constexpr double kMaxLearningRate = 1e-2;

struct GaeResult {
  Mat advantages;  // T x N
  Mat returns;     // T x N
};

// Backward recursion per column; nothing propagates across a done flag.
GaeResult compute_gae(const Mat& rewards, const Mat& values, const Mask& dones,
                      const Vec& bootstrap_values, const GaeConfig& cfg);

// Mean of min(r A, clip(r, 1 - eps, 1 + eps) A) with r = exp(new - old).
// This is the quantity to maximize.
double ppo_objective(std::span<const double> logp_new, std::span<const double> logp_old,
                     std::span<const double> advantages, double clip_epsilon);

// Batch mean of the closed-form KL(old || new).
double kl_estimate(const PolicyBatch& old_dist, const PolicyBatch& new_dist);

double lr_update(const PpoConfig& cfg, double current_lr, double observed_kl);

// In place: zero mean, unit (population) standard deviation. No-op for a
// single sample or zero variance.
void normalize_advantages(Vec& adv);

struct LossStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double kl = 0.0;
  double clip_fraction = 0.0;
};

// -ppo_objective + value_coef * mean(0.5 (V - R)^2) - entropy_coef * mean(H),
// with analytic head gradients. `behaviour` (optional) is used only for the
// KL statistic. `stats` (optional) receives the per-call breakdown.
LossSpec make_ppo_loss(const Mat& actions, const Vec& logp_old, const Vec& advantages,
                       const Vec& returns, const PpoConfig& cfg,
                       const PolicyBatch* behaviour = nullptr, LossStats* stats = nullptr);

struct IterationMetrics {
  double mean_reward = 0.0;  // unscaled, per environment step
  RewardBreakdown signal_means{};
  int episodes = 0;
  double success_rate = 0.0;       // over episodes finished in the window
  double mean_episode_length = 0.0;
  std::vector<double> subgoal_rates;  // fraction of episodes with > k sub-goals
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double kl = 0.0;       // mean over the final epoch's minibatches
  double lr = 0.0;       // rate used for this iteration's updates
  double next_lr = 0.0;  // rate after lr_update
};

// Window statistics that do not depend on the update.
IterationMetrics summarize_buffer(const HorizonBuffer& buffer, int num_subgoals);

// One PPO update over a full buffer. `lr` is the current rate and is replaced
// by the lr_update result.
IterationMetrics train_iteration(NetParams& params, AdamState& adam, const HorizonBuffer& buffer,
                                 const PpoConfig& cfg, const GaeConfig& gae, double& lr,
                                 CounterRng& shuffle_rng, int num_subgoals = 1);

}  // namespace stackrl

#endif  // STACKRL_PPO_HPP_
