#ifndef STACKRL_TRAINER_HPP_
#define STACKRL_TRAINER_HPP_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "stackrl/checkpoint.hpp"
#include "stackrl/config.hpp"
#include "stackrl/curriculum.hpp"
#include "stackrl/ppo.hpp"
#include "stackrl/rollout.hpp"
#include "stackrl/vec_env.hpp"

namespace stackrl {

struct IterationRecord {
  int iteration = 0;
  std::int64_t global_steps = 0;  // after this iteration
  int stage_index = 0;            // stage the window was collected in
  IterationMetrics metrics;
  double accuracy = 0.0;  // tracker ratio after recording this window
  bool accuracy_full = false;
  bool advanced = false;
  bool solved = false;
  double kl_threshold = 0.0;
  double wall_ms = 0.0;
};

// One metrics line. Holds no timing, so same-seed runs produce identical bytes.
std::string metrics_line(const IterationRecord& r);
std::string timing_line(const IterationRecord& r);

struct TrainSummary {
  int iterations = 0;
  std::int64_t global_steps = 0;
  int final_stage = 0;
  double final_accuracy = 0.0;
  double mean_episode_length = 0.0;
  bool solved = false;
  std::optional<std::int64_t> solved_at_steps;
  std::vector<std::int64_t> advance_steps;
};

NetShape network_shape(const RunConfig& cfg, int obs_dim, int action_dim, bool discrete);

// Collect/update loop with curriculum handling. With an output directory it
// writes config.toml, metrics.jsonl, timing.jsonl and checkpoints.
class Trainer {
 public:
  explicit Trainer(const RunConfig& cfg, std::filesystem::path output_dir = {});

  // One collect + update + curriculum step.
  IterationRecord iterate();

  // Iterates until the budget is spent, the run is solved (stop_on_solve),
  // or `stop` returns true.
  TrainSummary run(const std::function<bool(const IterationRecord&)>& stop = {});

  bool budget_left() const;
  bool solved() const { return solved_at_.has_value(); }

  const RunConfig& config() const { return cfg_; }
  const NetParams& params() const { return params_; }
  const AdamState& adam() const { return adam_; }
  int stage() const { return stage_; }
  double lr() const { return lr_; }
  std::int64_t global_steps() const { return global_steps_; }
  const AccuracyTracker& tracker() const { return tracker_; }
  const VecEnv& envs() const { return envs_; }
  const EnvConfig& env_config() const { return env_cfg_; }
  const TrainSummary& summary() const { return summary_; }

  Checkpoint checkpoint() const;
  void write_checkpoint(const std::filesystem::path& path) const;

 private:
  void record_eval_outcomes();

  RunConfig cfg_;
  std::filesystem::path out_dir_;
  EnvConfig env_cfg_;
  VecEnv envs_;
  std::optional<VecEnv> eval_envs_;
  NetParams params_;
  AdamState adam_;
  std::vector<CounterRng> action_streams_;
  CounterRng shuffle_rng_;
  AccuracyTracker tracker_;
  int stage_ = 0;
  double lr_ = 0.0;
  int iteration_ = 0;
  std::int64_t global_steps_ = 0;
  std::optional<std::int64_t> solved_at_;
  TrainSummary summary_;
  std::ofstream metrics_;
  std::ofstream timing_;
};

}  // namespace stackrl

#endif  // STACKRL_TRAINER_HPP_
