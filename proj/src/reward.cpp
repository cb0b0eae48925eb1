#include "stackrl/reward.hpp"

#include <cmath>
#include <string>

#include "stackrl/errors.hpp"

namespace stackrl {
namespace {

constexpr std::array<std::string_view, kNumSignals> kSignalNames = {
    "goal_achieved", "box_on_target",  "subgoal_bonus", "box_to_goal", "ee_to_box",
    "action_penalty", "table_touch", "orientation",   "grasp",
};

void require_unit(const Quaternion& q) {
  if (std::abs(q.norm() - 1.0) > 1e-6) {
    throw InvariantViolation("orientation quaternion is not unit norm (|q| = " +
                             std::to_string(q.norm()) + ")");
  }
}

}  // namespace

std::string_view signal_name(Signal s) { return kSignalNames[static_cast<std::size_t>(s)]; }

std::optional<Signal> signal_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kNumSignals; ++i) {
    if (kSignalNames[i] == name) return static_cast<Signal>(i);
  }
  return std::nullopt;
}

double r_dense(const Vec3& a, const Vec3& b) { return (a - b).squaredNorm(); }

double r_sparse(std::span<const double> s, std::span<const double> goal, double epsilon) {
  if (s.size() != goal.size()) throw ConfigError("r_sparse: state and goal sizes differ");
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!(goal[i] - epsilon <= s[i] && s[i] <= goal[i] + epsilon)) return 0.0;
  }
  return 1.0;
}

double r_sparse(double s, double goal, double epsilon) {
  return r_sparse(std::span<const double>(&s, 1), std::span<const double>(&goal, 1), epsilon);
}

double r_sparse(const Vec3& s, const Vec3& goal, double epsilon) {
  return r_sparse(std::span<const double>(s.data(), 3), std::span<const double>(goal.data(), 3),
                  epsilon);
}

double r_action(std::span<const double> actions, std::span<const double> joints,
                std::span<const double> joints_home) {
  if (joints.size() != joints_home.size()) {
    throw ConfigError("r_action: joints and home differ in length");
  }
  double s = 0.0;
  for (double a : actions) s += a * a;
  for (std::size_t i = 0; i < joints.size(); ++i) {
    const double d = joints[i] - joints_home[i];
    s += d * d;
  }
  return s;
}

double r_table(double ee_z, double theta) { return ee_z <= theta ? 1.0 : 0.0; }

double r_abs(const Vec3& s, std::span<const Vec3> objects) {
  if (objects.empty()) throw ConfigError("r_abs: the object set is empty");
  double total = 0.0;
  for (const auto& o : objects) total += (s - o).cwiseAbs().sum();
  return total / static_cast<double>(objects.size());
}

double r_grasp(const Vec3& ee, const Vec3& obj, double epsilon) {
  return r_sparse(ee, obj, epsilon);
}

double Quaternion::norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

Quaternion quat_conjugate(const Quaternion& q) { return {q.w, -q.x, -q.y, -q.z}; }

Quaternion quat_mult(const Quaternion& a, const Quaternion& b) {
  return {
      a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
      a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
      a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
      a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
  };
}

double r_orientation(const Quaternion& desired, const Quaternion& ee) {
  require_unit(desired);
  require_unit(ee);
  const Quaternion err = quat_mult(desired, quat_conjugate(ee));
  return std::sqrt(err.x * err.x + err.y * err.y + err.z * err.z);
}

}  // namespace stackrl
