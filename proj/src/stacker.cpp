#include "stackrl/stacker.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stackrl/compose.hpp"
#include "stackrl/errors.hpp"

namespace stackrl {
namespace {

constexpr double kSpawnExtent = 0.9;   // objects and goal stay inside the table edge
constexpr double kMinSeparation = 0.2; // per-axis (Chebyshev) gap between spawns
constexpr int kPlacementTries = 100;

double chebyshev_xy(const Vec3& a, const Vec3& b) {
  return std::max(std::abs(a.x() - b.x()), std::abs(a.y() - b.y()));
}

// Places `count` points with pairwise separation; restarts from scratch when
// a single point exhausts its tries.
std::vector<Vec3> place_points(int count, double z, CounterRng& rng) {
  for (;;) {
    std::vector<Vec3> pts;
    bool ok = true;
    for (int i = 0; i < count && ok; ++i) {
      ok = false;
      for (int attempt = 0; attempt < kPlacementTries; ++attempt) {
        const Vec3 p(rng.uniform(-kSpawnExtent, kSpawnExtent),
                     rng.uniform(-kSpawnExtent, kSpawnExtent), z);
        const bool clear = std::all_of(pts.begin(), pts.end(), [&](const Vec3& q) {
          return chebyshev_xy(p, q) >= kMinSeparation;
        });
        if (clear) {
          pts.push_back(p);
          ok = true;
          break;
        }
      }
    }
    if (ok) return pts;
  }
}

Vec3 clamp_workspace(const Vec3& p, const EnvConfig& cfg) {
  return {std::clamp(p.x(), -1.0, 1.0), std::clamp(p.y(), -1.0, 1.0),
          std::clamp(p.z(), 0.0, cfg.workspace_height)};
}

double scale_z(double z, const EnvConfig& cfg) { return 2.0 * z / cfg.workspace_height - 1.0; }

double support_height(const StackState& s, const EnvConfig& cfg, int dropped) {
  const Vec3& p = s.obj_pos[static_cast<std::size_t>(dropped)];
  double z = 0.5 * cfg.cube_height;
  for (std::size_t i = 0; i < s.obj_pos.size(); ++i) {
    if (static_cast<int>(i) == dropped || !s.obj_active[i] || static_cast<int>(i) == s.held) {
      continue;
    }
    const Vec3& q = s.obj_pos[i];
    if (std::abs(q.x() - p.x()) <= cfg.stack_epsilon &&
        std::abs(q.y() - p.y()) <= cfg.stack_epsilon) {
      z = std::max(z, q.z() + cfg.cube_height);
    }
  }
  return z;
}

}  // namespace

Vec3 stacker_home(const EnvConfig& cfg) { return {0.0, 0.0, 0.5 * cfg.workspace_height}; }

int stacker_observation_size(const EnvConfig& cfg) { return 3 + 3 + 1 + 7 * cfg.num_objects + 3 + 1; }

bool object_present(const EnvConfig& cfg, int index) {
  return cfg.padding_mode == PaddingMode::kPermutation || index < cfg.active_objects;
}

StackState stack_reset(const EnvConfig& cfg, CounterRng& rng) {
  const auto n = static_cast<std::size_t>(cfg.num_objects);
  StackState s;
  const Vec3 home = stacker_home(cfg);
  const Vec3 range(2.0, 2.0, cfg.workspace_height);
  for (int axis = 0; axis < 3; ++axis) {
    s.ee_pos(axis) = home(axis) + cfg.perturbation * range(axis) * rng.uniform(-1.0, 1.0);
  }
  s.ee_pos = clamp_workspace(s.ee_pos, cfg);

  s.obj_pos.assign(n, Vec3::Zero());
  s.obj_vel.assign(n, Vec3::Zero());
  s.obj_active.assign(n, 0);
  int present = 0;
  for (std::size_t i = 0; i < n; ++i) {
    s.obj_active[i] = object_present(cfg, static_cast<int>(i)) ? 1 : 0;
    present += s.obj_active[i];
  }
  // The goal is placed alongside the objects so nothing spawns on it.
  const auto pts = place_points(present + 1, 0.5 * cfg.cube_height, rng);
  std::size_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (s.obj_active[i]) s.obj_pos[i] = pts[next++];
  }
  s.goal_pos = pts[next];

  s.permutation.resize(n);
  std::iota(s.permutation.begin(), s.permutation.end(), 0);
  if (cfg.padding_mode == PaddingMode::kPermutation) {
    for (std::size_t i = n; i > 1; --i) {
      const auto j = static_cast<std::size_t>(rng.below(i));
      std::swap(s.permutation[i - 1], s.permutation[j]);
    }
  }
  s.bonus_claimed.assign(n, 0);
  return s;
}

StackStep stack_step(const StackState& state, std::span<const double> action, const EnvConfig& cfg) {
  if (action.size() != kStackerActions) throw ConfigError("stacker expects a 4-vector action");
  if (state.steps >= cfg.max_episode_length) {
    throw InvariantViolation("stack_step called on a finished episode");
  }
  std::array<double, kStackerActions> a{};
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::clamp(action[i], -1.0, 1.0);

  StackStep out;
  StackState& s = out.state;
  s = state;

  const Vec3 prev = s.ee_pos;
  s.ee_pos = clamp_workspace(prev + cfg.step_scale * Vec3(a[0], a[1], a[2]), cfg);
  s.ee_vel = (s.ee_pos - prev) / cfg.step_scale;
  for (auto& v : s.obj_vel) v.setZero();
  if (s.held >= 0) {
    s.obj_pos[static_cast<std::size_t>(s.held)] = s.ee_pos;
    s.obj_vel[static_cast<std::size_t>(s.held)] = s.ee_vel;
  }

  const double aperture = a[3] >= 0.0 ? 1.0 : 0.0;
  if (s.held >= 0 && aperture > 0.0) {
    const int dropped = s.held;
    s.held = -1;
    auto& p = s.obj_pos[static_cast<std::size_t>(dropped)];
    p.z() = support_height(s, cfg, dropped);
    s.obj_vel[static_cast<std::size_t>(dropped)].setZero();
  } else if (s.held < 0 && aperture <= 0.0) {
    int best = -1;
    double best_d = 0.0;
    for (std::size_t i = 0; i < s.obj_pos.size(); ++i) {
      if (!s.obj_active[i] || r_grasp(s.ee_pos, s.obj_pos[i], cfg.grasp_epsilon) == 0.0) continue;
      const double d = r_dense(s.ee_pos, s.obj_pos[i]);
      if (best < 0 || d < best_d) {
        best = static_cast<int>(i);
        best_d = d;
      }
    }
    if (best >= 0) {
      s.held = best;
      s.obj_pos[static_cast<std::size_t>(best)] = s.ee_pos;
    }
  }
  s.aperture = aperture;
  s.steps += 1;

  const RewardResult r = compose(s, a, cfg);
  for (std::size_t k = 0; k < r.newly_claimed.size(); ++k) {
    if (r.newly_claimed[k]) s.bonus_claimed[k] = 1;
  }

  StepOutcome& o = out.outcome;
  o.reward = r.total;
  o.breakdown = r.breakdown;
  o.success = r.success;
  o.subgoals = static_cast<int>(std::count(s.bonus_claimed.begin(), s.bonus_claimed.end(), 1));
  if (r.success) {
    o.done = true;
    o.reason = DoneReason::kGoal;
  } else if (s.steps >= cfg.max_episode_length) {
    o.done = true;
    o.reason = DoneReason::kTimeout;
  }
  return out;
}

std::vector<double> assemble_observation(const StackState& s, const EnvConfig& cfg) {
  std::vector<double> obs;
  obs.reserve(static_cast<std::size_t>(stacker_observation_size(cfg)));
  obs.insert(obs.end(), {s.ee_pos.x(), s.ee_pos.y(), scale_z(s.ee_pos.z(), cfg)});
  obs.insert(obs.end(), {s.ee_vel.x(), s.ee_vel.y(), s.ee_vel.z()});
  obs.push_back(s.aperture);

  const double pad = cfg.padding_mode == PaddingMode::kOnes ? 1.0 : 0.0;
  for (int k = 0; k < cfg.num_objects; ++k) {
    const auto obj = static_cast<std::size_t>(s.permutation[static_cast<std::size_t>(k)]);
    if (!s.obj_active[obj]) {
      obs.insert(obs.end(), 7, pad);
      continue;
    }
    const Vec3& p = s.obj_pos[obj];
    const Vec3& v = s.obj_vel[obj];
    obs.insert(obs.end(), {p.x(), p.y(), scale_z(p.z(), cfg), v.x(), v.y(), v.z(),
                           s.held == static_cast<int>(obj) ? 1.0 : 0.0});
  }
  obs.insert(obs.end(), {s.goal_pos.x(), s.goal_pos.y(), scale_z(s.goal_pos.z(), cfg)});
  double object_id = 0.0;
  if (cfg.reward_mode == RewardMode::kStaggered) {
    object_id = std::max(0, current_target(s, cfg));
  }
  obs.push_back(object_id);
  return obs;
}

StackerEnv::StackerEnv(const EnvConfig& cfg, CounterRng rng) : cfg_(cfg), rng_(rng) {
  state_ = stack_reset(cfg_, rng_);
}

void StackerEnv::reset() { state_ = stack_reset(cfg_, rng_); }

StepOutcome StackerEnv::step(std::span<const double> action) {
  StackStep r = stack_step(state_, action, cfg_);
  state_ = std::move(r.state);
  return r.outcome;
}

void StackerEnv::observe(std::span<double> out) const {
  const auto obs = assemble_observation(state_, cfg_);
  std::copy(obs.begin(), obs.end(), out.begin());
}

std::unique_ptr<Environment> StackerEnv::clone() const { return std::make_unique<StackerEnv>(*this); }

void StackerEnv::configure(const EnvConfig& cfg) { cfg_ = cfg; }

}  // namespace stackrl
