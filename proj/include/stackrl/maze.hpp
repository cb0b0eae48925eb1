#ifndef STACKRL_MAZE_HPP_
#define STACKRL_MAZE_HPP_

#include <array>
#include <optional>
#include <string>

#include "stackrl/environment.hpp"

namespace stackrl {

// Reads a 10x10 grid of '#' (wall) and '.' (free). Throws ConfigError with
// the offending line on malformed input.
MazeGrid load_maze_grid(const std::string& path);
MazeGrid parse_maze_grid(const std::string& text);

// Breadth-first shortest path length, or nullopt when unreachable.
std::optional<int> shortest_path(const MazeGrid& grid, Cell from, Cell to);

MazeState maze_reset(const MazeGrid& grid);

struct MazeStep {
  MazeState state;
  std::array<double, 4> obs{};
  double reward = 0.0;
  bool done = false;
  DoneReason reason = DoneReason::kNone;
};

// Sparse reward: 1 on entering the goal cell, 0 otherwise. Moves into walls
// or borders leave the agent in place.
MazeStep maze_step(const MazeState& state, MazeAction action, int max_episode_length);

// (agent_x, agent_y, goal_x, goal_y) scaled to [-1, 1].
std::array<double, 4> maze_observation(const MazeState& state);

class MazeEnv final : public Environment {
 public:
  // The maze has a fixed start, so the reset stream is not consumed.
  MazeEnv(const EnvConfig& cfg, CounterRng rng);

  int observation_size() const override { return 4; }
  int action_size() const override { return kMazeActions; }
  bool discrete() const override { return true; }

  void reset() override;
  StepOutcome step(std::span<const double> action) override;
  void observe(std::span<double> out) const override;
  std::unique_ptr<Environment> clone() const override;
  void configure(const EnvConfig& cfg) override;

  const MazeState& state() const { return state_; }
  void set_state(const MazeState& s) { state_ = s; }

 private:
  MazeGrid grid_;
  int max_episode_length_;
  MazeState state_;
};

}  // namespace stackrl

#endif  // STACKRL_MAZE_HPP_
