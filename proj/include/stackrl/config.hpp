#ifndef STACKRL_CONFIG_HPP_
#define STACKRL_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "stackrl/curriculum.hpp"
#include "stackrl/env_types.hpp"
#include "stackrl/ppo.hpp"

namespace stackrl {

struct RunConfig {
  std::uint64_t seed = 1;
  int num_envs = 256;
  // Parallel partitions for environment stepping; results do not depend on it.
  int shards = 1;
  std::int64_t total_steps = 5'000'000;
  std::string output_dir = "runs/default";
  // Iterations between checkpoints; 0 writes only the final one.
  int checkpoint_every = 0;
  // Stop once the final stage reaches the advance accuracy.
  bool stop_on_solve = true;
  int accuracy_window = kDefaultAccuracyWindow;
  // Feed the accuracy tracker from separate evaluation rollouts instead of
  // training episodes.
  bool eval_switching = false;
  int eval_episodes = 200;
  bool bootstrap_on_timeout = true;

  std::vector<int> hidden = {64, 64};
  EnvConfig env;
  PpoConfig ppo;
  GaeConfig gae;
  std::vector<CurriculumStage> stages = {CurriculumStage{0, 1, 100, 100}};

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// Cross-field checks: minibatch divisibility for every stage, stage object
// counts, network sizes. Throws ConfigError.
void validate(const RunConfig& cfg);

// Parses the TOML-style config text. `base_dir` resolves a relative maze wall
// file. Errors carry the offending line.
RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

// Fully resolved text; parse_run_config(write_run_config(c)) == c.
std::string write_run_config(const RunConfig& cfg);

std::string_view to_string(EnvKind v);
std::string_view to_string(PaddingMode v);
std::string_view to_string(RewardMode v);
std::string_view to_string(LrMode v);

// Shortest text that reads back to the same double.
std::string format_double(double v);

}  // namespace stackrl

#endif  // STACKRL_CONFIG_HPP_
