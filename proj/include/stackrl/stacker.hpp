#ifndef STACKRL_STACKER_HPP_
#define STACKRL_STACKER_HPP_

#include <vector>

#include "stackrl/environment.hpp"

namespace stackrl {

// Kinematic point-gripper stacking task on the table [-1, 1]^2 x [0, H].
// Actions are (dx, dy, dz, gripper) in [-1, 1]^4.

inline constexpr int kStackerActions = 4;

Vec3 stacker_home(const EnvConfig& cfg);

// 3 + 3 + 1 + 7 * num_objects + 3 + 1
int stacker_observation_size(const EnvConfig& cfg);

// Objects present on the table for this configuration. Permutation mode keeps
// every object present; the other modes introduce them with the stage.
bool object_present(const EnvConfig& cfg, int index);

StackState stack_reset(const EnvConfig& cfg, CounterRng& rng);

struct StackStep {
  StackState state;
  StepOutcome outcome;
};

// Advances one control step. The returned state already has this step's
// one-time bonuses marked as claimed.
StackStep stack_step(const StackState& state, std::span<const double> action, const EnvConfig& cfg);

std::vector<double> assemble_observation(const StackState& state, const EnvConfig& cfg);

class StackerEnv final : public Environment {
 public:
  StackerEnv(const EnvConfig& cfg, CounterRng rng);

  int observation_size() const override { return stacker_observation_size(cfg_); }
  int action_size() const override { return kStackerActions; }
  bool discrete() const override { return false; }

  void reset() override;
  StepOutcome step(std::span<const double> action) override;
  void observe(std::span<double> out) const override;
  std::unique_ptr<Environment> clone() const override;
  void configure(const EnvConfig& cfg) override;

  const StackState& state() const { return state_; }
  void set_state(const StackState& s) { state_ = s; }
  const EnvConfig& config() const { return cfg_; }

 private:
  EnvConfig cfg_;
  StackState state_;
  CounterRng rng_;
};

}  // namespace stackrl

#endif  // STACKRL_STACKER_HPP_
