#ifndef STACKRL_VEC_ENV_HPP_
#define STACKRL_VEC_ENV_HPP_

#include <tbb/task_arena.h>

#include <cstdint>
#include <memory>
#include <vector>

#include "stackrl/environment.hpp"
#include "stackrl/net.hpp"

namespace stackrl {

struct VecStep {
  // Post-step observations; rows of finished environments already hold the
  // first observation of the next episode.
  Mat obs;
  // Last observation of the finished episode (valid where done is set).
  Mat terminal_obs;
  std::vector<StepOutcome> outcomes;
  // Episode length for rows that finished on this step, 0 otherwise.
  std::vector<int> episode_lengths;
  // Undiscounted return of rows that finished on this step.
  std::vector<double> episode_returns;
};

// N independent environments stepped in `shards` parallel partitions. Each
// instance owns its RNG stream, so results are identical for any shard count.
class VecEnv {
 public:
  VecEnv(const EnvConfig& cfg, int num_envs, std::uint64_t seed, int shards = 1);

  VecEnv(const VecEnv& other);
  VecEnv& operator=(const VecEnv& other);
  VecEnv(VecEnv&&) noexcept = default;
  VecEnv& operator=(VecEnv&&) noexcept = default;

  int size() const { return static_cast<int>(envs_.size()); }
  int observation_size() const { return obs_dim_; }
  int action_size() const { return envs_.front()->action_size(); }
  bool discrete() const { return envs_.front()->discrete(); }
  int shards() const { return shards_; }
  void set_shards(int shards);

  const Mat& observations() const { return obs_; }
  const EnvConfig& config() const { return cfg_; }

  // actions: N x action_dim (N x 1 holding the index for discrete envs).
  // Throws, naming the environment index, if any instance faults.
  VecStep step(const Mat& actions);

  // Applies a new configuration and starts a fresh episode everywhere.
  void reconfigure(const EnvConfig& cfg);
  void reset_all();

  Environment& env(int i) { return *envs_[static_cast<std::size_t>(i)]; }
  const Environment& env(int i) const { return *envs_[static_cast<std::size_t>(i)]; }

 private:
  template <class Fn>
  void for_each_shard(Fn&& fn);

  EnvConfig cfg_;
  std::vector<std::unique_ptr<Environment>> envs_;
  std::vector<int> episode_steps_;
  std::vector<double> episode_return_;
  Mat obs_;
  int obs_dim_ = 0;
  int shards_ = 1;
  std::shared_ptr<tbb::task_arena> arena_;
};

}  // namespace stackrl

#endif  // STACKRL_VEC_ENV_HPP_
