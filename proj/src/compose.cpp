#include "stackrl/compose.hpp"

#include <algorithm>

#include "stackrl/errors.hpp"

namespace stackrl {
namespace {

Vec3 home_position(const EnvConfig& cfg) { return {0.0, 0.0, 0.5 * cfg.workspace_height}; }

}  // namespace

Vec3 slot_position(const StackState& s, const EnvConfig& cfg, int k) {
  return {s.goal_pos.x(), s.goal_pos.y(), (k + 0.5) * cfg.cube_height};
}

int target_count(const StackState& s, const EnvConfig& cfg) {
  return std::min<int>(cfg.active_objects, static_cast<int>(s.permutation.size()));
}

bool slot_filled(const StackState& s, const EnvConfig& cfg, int k) {
  const int obj = s.permutation[static_cast<std::size_t>(k)];
  if (!s.obj_active[static_cast<std::size_t>(obj)] || s.held == obj) return false;
  return r_sparse(s.obj_pos[static_cast<std::size_t>(obj)], slot_position(s, cfg, k),
                  cfg.stack_epsilon) > 0.0;
}

int current_target(const StackState& s, const EnvConfig& cfg) {
  const int n = target_count(s, cfg);
  for (int k = 0; k < n; ++k) {
    if (!slot_filled(s, cfg, k)) return k;
  }
  return -1;
}

bool stack_success(const StackState& s, const EnvConfig& cfg) {
  return s.held < 0 && current_target(s, cfg) < 0;
}

RewardResult compose(const StackState& s, std::span<const double> action, const EnvConfig& cfg) {
  const int n_targets = target_count(s, cfg);
  const int target = current_target(s, cfg);
  const int target_obj = target >= 0 ? s.permutation[static_cast<std::size_t>(target)] : -1;

  std::array<double, kNumSignals> raw{};
  auto set = [&raw](Signal sig, double v) { raw[static_cast<std::size_t>(sig)] = v; };

  RewardResult out;
  out.newly_claimed.assign(s.permutation.size(), 0);
  out.success = stack_success(s, cfg);
  set(Signal::kGoalAchieved, out.success ? 1.0 : 0.0);

  double on_target = 0.0;
  double bonus = 0.0;
  for (int k = 0; k < n_targets; ++k) {
    if (!slot_filled(s, cfg, k)) continue;
    on_target += 1.0;
    if (!s.bonus_claimed[static_cast<std::size_t>(k)]) {
      bonus += 1.0;
      out.newly_claimed[static_cast<std::size_t>(k)] = 1;
    }
  }
  set(Signal::kBoxOnTarget, on_target);
  set(Signal::kSubgoalBonus, bonus);

  std::vector<Vec3> active;
  for (std::size_t i = 0; i < s.obj_pos.size(); ++i) {
    if (s.obj_active[i]) active.push_back(s.obj_pos[i]);
  }

  switch (cfg.reward_mode) {
    case RewardMode::kShapedSet: {
      double d = 0.0;
      for (int k = 0; k < n_targets; ++k) {
        const int obj = s.permutation[static_cast<std::size_t>(k)];
        d += r_dense(s.obj_pos[static_cast<std::size_t>(obj)], slot_position(s, cfg, k));
      }
      set(Signal::kBoxToGoal, d);
      break;
    }
    case RewardMode::kStaggered:
      if (target >= 0) {
        set(Signal::kBoxToGoal, r_dense(s.obj_pos[static_cast<std::size_t>(target_obj)],
                                        slot_position(s, cfg, target)));
      }
      break;
    case RewardMode::kAbsolute:
      if (active.empty()) throw ConfigError("absolute reward needs at least one active object");
      set(Signal::kBoxToGoal, r_abs(s.goal_pos, active));
      break;
  }

  if (cfg.reward_mode == RewardMode::kAbsolute) {
    set(Signal::kEeToBox, r_abs(s.ee_pos, active));
    double near_any = 0.0;
    for (const auto& p : active) near_any = std::max(near_any, r_grasp(s.ee_pos, p, cfg.grasp_epsilon));
    set(Signal::kGrasp, near_any);
  } else if (target_obj >= 0) {
    const Vec3& obj = s.obj_pos[static_cast<std::size_t>(target_obj)];
    set(Signal::kEeToBox, s.held == target_obj ? 0.0 : r_dense(s.ee_pos, obj));
    set(Signal::kGrasp, r_grasp(s.ee_pos, obj, cfg.grasp_epsilon));
  }

  const Vec3 home = home_position(cfg);
  set(Signal::kActionPenalty,
      r_action(action, std::span<const double>(s.ee_pos.data(), 3),
               std::span<const double>(home.data(), 3)));
  set(Signal::kTableTouch, r_table(s.ee_pos.z(), cfg.table_theta));
  set(Signal::kOrientation, r_orientation(Quaternion::identity(), s.ee_orientation));

  for (std::size_t i = 0; i < kNumSignals; ++i) {
    out.breakdown[i] = cfg.rewards.lambda[i] * raw[i];
  }
  out.total = breakdown_total(out.breakdown);
  return out;
}

}  // namespace stackrl
