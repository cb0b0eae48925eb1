#include "stackrl/maze.hpp"

#include <deque>
#include <fstream>
#include <sstream>

#include "stackrl/errors.hpp"

namespace stackrl {
namespace {

double scale_coord(int c) { return 2.0 * c / (kMazeSize - 1) - 1.0; }

Cell moved(Cell c, MazeAction a) {
  switch (a) {
    case MazeAction::kUp: return {c.x, c.y - 1};
    case MazeAction::kDown: return {c.x, c.y + 1};
    case MazeAction::kLeft: return {c.x - 1, c.y};
    case MazeAction::kRight: return {c.x + 1, c.y};
  }
  return c;
}

}  // namespace

MazeGrid parse_maze_grid(const std::string& text) {
  MazeGrid grid;
  std::istringstream in(text);
  std::string line;
  int row = 0;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (row >= kMazeSize) throw ConfigError(line_no, "maze has more than 10 rows");
    if (line.size() != kMazeSize) {
      throw ConfigError(line_no, "maze row must have exactly 10 columns");
    }
    for (int x = 0; x < kMazeSize; ++x) {
      const char ch = line[static_cast<std::size_t>(x)];
      if (ch != '#' && ch != '.') {
        throw ConfigError(line_no, std::string("unexpected maze character '") + ch + "'");
      }
      grid.walls[static_cast<std::size_t>(row)][static_cast<std::size_t>(x)] = ch == '#';
    }
    ++row;
  }
  if (row != kMazeSize) throw ConfigError(line_no, "maze must have exactly 10 rows");
  const MazeState probe;
  if (!grid.free(probe.agent) || !grid.free(probe.goal)) {
    throw ConfigError("maze start (0,0) and goal (9,9) must be free cells");
  }
  if (!shortest_path(grid, probe.agent, probe.goal)) {
    throw ConfigError("maze goal is unreachable from the start");
  }
  return grid;
}

MazeGrid load_maze_grid(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open maze wall file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_maze_grid(ss.str());
}

std::optional<int> shortest_path(const MazeGrid& grid, Cell from, Cell to) {
  std::array<std::array<int, kMazeSize>, kMazeSize> dist;
  for (auto& r : dist) r.fill(-1);
  std::deque<Cell> queue{from};
  dist[static_cast<std::size_t>(from.y)][static_cast<std::size_t>(from.x)] = 0;
  while (!queue.empty()) {
    const Cell c = queue.front();
    queue.pop_front();
    if (c == to) return dist[static_cast<std::size_t>(c.y)][static_cast<std::size_t>(c.x)];
    for (int a = 0; a < kMazeActions; ++a) {
      const Cell n = moved(c, static_cast<MazeAction>(a));
      if (!grid.free(n)) continue;
      auto& d = dist[static_cast<std::size_t>(n.y)][static_cast<std::size_t>(n.x)];
      if (d >= 0) continue;
      d = dist[static_cast<std::size_t>(c.y)][static_cast<std::size_t>(c.x)] + 1;
      queue.push_back(n);
    }
  }
  return std::nullopt;
}

MazeState maze_reset(const MazeGrid& grid) {
  MazeState s;
  s.grid = grid;
  return s;
}

std::array<double, 4> maze_observation(const MazeState& state) {
  return {scale_coord(state.agent.x), scale_coord(state.agent.y), scale_coord(state.goal.x),
          scale_coord(state.goal.y)};
}

MazeStep maze_step(const MazeState& state, MazeAction action, int max_episode_length) {
  MazeStep out;
  out.state = state;
  const Cell next = moved(state.agent, action);
  if (state.grid.free(next)) out.state.agent = next;
  out.state.steps += 1;
  if (out.state.agent == out.state.goal) {
    out.reward = 1.0;
    out.done = true;
    out.reason = DoneReason::kGoal;
  } else if (out.state.steps >= max_episode_length) {
    out.done = true;
    out.reason = DoneReason::kTimeout;
  }
  out.obs = maze_observation(out.state);
  return out;
}

MazeEnv::MazeEnv(const EnvConfig& cfg, CounterRng /*rng*/)
    : grid_(cfg.maze_wall_file.empty() ? MazeGrid{} : load_maze_grid(cfg.maze_wall_file)),
      max_episode_length_(cfg.max_episode_length) {
  state_ = maze_reset(grid_);
}

void MazeEnv::reset() { state_ = maze_reset(grid_); }

StepOutcome MazeEnv::step(std::span<const double> action) {
  const int a = static_cast<int>(action[0]);
  if (a < 0 || a >= kMazeActions) {
    throw ConfigError("maze action " + std::to_string(a) + " out of range");
  }
  MazeStep r = maze_step(state_, static_cast<MazeAction>(a), max_episode_length_);
  state_ = r.state;
  StepOutcome out;
  out.reward = r.reward;
  out.done = r.done;
  out.reason = r.reason;
  out.success = r.reason == DoneReason::kGoal;
  out.subgoals = out.success ? 1 : 0;
  out.breakdown[static_cast<std::size_t>(Signal::kGoalAchieved)] = r.reward;
  return out;
}

void MazeEnv::observe(std::span<double> out) const {
  const auto obs = maze_observation(state_);
  std::copy(obs.begin(), obs.end(), out.begin());
}

std::unique_ptr<Environment> MazeEnv::clone() const { return std::make_unique<MazeEnv>(*this); }

void MazeEnv::configure(const EnvConfig& cfg) { max_episode_length_ = cfg.max_episode_length; }

}  // namespace stackrl
