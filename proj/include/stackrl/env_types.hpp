#ifndef STACKRL_ENV_TYPES_HPP_
#define STACKRL_ENV_TYPES_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "stackrl/reward.hpp"

namespace stackrl {

enum class EnvKind { kMaze, kStacker };
enum class PaddingMode { kZeros, kOnes, kPermutation };
enum class RewardMode { kShapedSet, kStaggered, kAbsolute };
enum class DoneReason : std::uint8_t { kNone = 0, kGoal = 1, kTimeout = 2 };

struct EnvConfig {
  EnvKind kind = EnvKind::kMaze;
  int num_objects = 1;
  // Objects that must be stacked for success; set by the curriculum stage.
  int active_objects = 1;
  int max_episode_length = 100;
  PaddingMode padding_mode = PaddingMode::kZeros;
  RewardMode reward_mode = RewardMode::kShapedSet;
  double grasp_epsilon = 0.05;
  double stack_epsilon = 0.05;
  double table_theta = 0.04;
  double cube_height = 0.08;
  double step_scale = 0.05;
  // Reset perturbation of the end-effector as a fraction of the axis range.
  double perturbation = 0.08;
  // Workspace ceiling; x and y span the table [-1, 1].
  double workspace_height = 0.5;
  // Optional 10x10 wall grid for the maze; empty means the open grid.
  std::string maze_wall_file;
  RewardTable rewards;

  // Throws ConfigError when a value is out of range.
  void validate() const;

  friend bool operator==(const EnvConfig&, const EnvConfig&) = default;
};

inline constexpr int kMazeSize = 10;
inline constexpr int kMazeActions = 4;

enum class MazeAction : int { kUp = 0, kDown = 1, kLeft = 2, kRight = 3 };

struct Cell {
  int x = 0;
  int y = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

struct MazeGrid {
  // walls[y][x]
  std::array<std::array<bool, kMazeSize>, kMazeSize> walls{};

  bool free(Cell c) const {
    return c.x >= 0 && c.y >= 0 && c.x < kMazeSize && c.y < kMazeSize && !walls[c.y][c.x];
  }
  friend bool operator==(const MazeGrid&, const MazeGrid&) = default;
};

struct MazeState {
  MazeGrid grid;
  Cell agent;
  Cell goal{kMazeSize - 1, kMazeSize - 1};
  int steps = 0;
};

struct StackState {
  Vec3 ee_pos = Vec3::Zero();
  Vec3 ee_vel = Vec3::Zero();
  double aperture = 1.0;  // 1 open, 0 closed
  int held = -1;          // object index or -1
  std::vector<Vec3> obj_pos;
  std::vector<Vec3> obj_vel;
  std::vector<char> obj_active;
  Vec3 goal_pos = Vec3::Zero();
  // permutation[k] is the object that belongs in stack slot k.
  std::vector<int> permutation;
  std::vector<char> bonus_claimed;
  int steps = 0;
  Quaternion ee_orientation;
};

struct StepOutcome {
  double reward = 0.0;
  bool done = false;
  DoneReason reason = DoneReason::kNone;
  bool success = false;
  // Sub-goals (stack slots) satisfied so far in this episode.
  int subgoals = 0;
  RewardBreakdown breakdown{};
};

}  // namespace stackrl

#endif  // STACKRL_ENV_TYPES_HPP_
