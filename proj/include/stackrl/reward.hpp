#ifndef STACKRL_REWARD_HPP_
#define STACKRL_REWARD_HPP_

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

namespace stackrl {

using Vec3 = Eigen::Vector3d;

// Reward signals in the fixed order used by breakdowns, metrics and config.
enum class Signal : std::size_t {
  kGoalAchieved,
  kBoxOnTarget,
  kSubgoalBonus,
  kBoxToGoal,
  kEeToBox,
  kActionPenalty,
  kTableTouch,
  kOrientation,
  kGrasp,
};
inline constexpr std::size_t kNumSignals = 9;

std::string_view signal_name(Signal s);
std::optional<Signal> signal_from_name(std::string_view name);

// lambda weight per signal.
struct RewardTable {
  std::array<double, kNumSignals> lambda = {150.0, 1.0, 150.0, -5.0, -5.0, -0.01, -5.0, -0.1, 2.0};

  double& operator[](Signal s) { return lambda[static_cast<std::size_t>(s)]; }
  double operator[](Signal s) const { return lambda[static_cast<std::size_t>(s)]; }

  friend bool operator==(const RewardTable&, const RewardTable&) = default;
};

// Weighted contribution lambda_i * R_i per signal.
using RewardBreakdown = std::array<double, kNumSignals>;

inline double breakdown_total(const RewardBreakdown& b) {
  double s = 0.0;
  for (double x : b) s += x;
  return s;
}

// Sum of squared per-axis differences.
double r_dense(const Vec3& a, const Vec3& b);

// 1 iff goal - eps <= s <= goal + eps componentwise (inclusive).
double r_sparse(std::span<const double> s, std::span<const double> goal, double epsilon);
double r_sparse(double s, double goal, double epsilon);
double r_sparse(const Vec3& s, const Vec3& goal, double epsilon);

// sum_i a_i^2 + sum_j (theta_j - theta0_j)^2
double r_action(std::span<const double> actions, std::span<const double> joints,
                std::span<const double> joints_home);

// 1 iff ee_z <= theta.
double r_table(double ee_z, double theta);

// Mean L1 distance from s to each object. Throws ConfigError on an empty set.
double r_abs(const Vec3& s, std::span<const Vec3> objects);

// 1 iff |ee_i - obj_i| <= eps on every axis.
double r_grasp(const Vec3& ee, const Vec3& obj, double epsilon);

struct Quaternion {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  static Quaternion identity() { return {}; }
  double norm() const;

  friend bool operator==(const Quaternion&, const Quaternion&) = default;
};

Quaternion quat_conjugate(const Quaternion& q);
Quaternion quat_mult(const Quaternion& a, const Quaternion& b);

// Norm of the vector part of desired * conj(ee): zero at perfect alignment,
// sin(angle / 2) otherwise. Throws InvariantViolation for non-unit inputs.
double r_orientation(const Quaternion& desired, const Quaternion& ee);

}  // namespace stackrl

#endif  // STACKRL_REWARD_HPP_
