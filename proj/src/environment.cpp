#include "stackrl/environment.hpp"

#include <string>

#include "stackrl/errors.hpp"
#include "stackrl/maze.hpp"
#include "stackrl/stacker.hpp"

namespace stackrl {

void EnvConfig::validate() const {
  if (num_objects < 1 || num_objects > 3) throw ConfigError("env.num_objects must be in 1..3");
  if (active_objects < 1 || active_objects > num_objects) {
    throw ConfigError("stage needs " + std::to_string(active_objects) +
                      " objects but the environment has " + std::to_string(num_objects));
  }
  if (max_episode_length < 1) throw ConfigError("env.max_episode_length must be >= 1");
  if (!(grasp_epsilon > 0.0) || !(stack_epsilon > 0.0)) {
    throw ConfigError("env grasp/stack epsilons must be positive");
  }
  if (!(cube_height > 0.0)) throw ConfigError("env.cube_height must be positive");
  if (!(step_scale > 0.0)) throw ConfigError("env.step_scale must be positive");
  if (perturbation < 0.0) throw ConfigError("env.perturbation must be non-negative");
  if (!(workspace_height > cube_height)) {
    throw ConfigError("env.workspace_height must exceed cube_height");
  }
}

std::unique_ptr<Environment> make_environment(const EnvConfig& cfg, CounterRng rng) {
  cfg.validate();
  if (cfg.kind == EnvKind::kMaze) return std::make_unique<MazeEnv>(cfg, rng);
  return std::make_unique<StackerEnv>(cfg, rng);
}

}  // namespace stackrl
