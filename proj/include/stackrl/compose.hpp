#ifndef STACKRL_COMPOSE_HPP_
#define STACKRL_COMPOSE_HPP_

#include <span>
#include <vector>

#include "stackrl/env_types.hpp"
#include "stackrl/reward.hpp"

namespace stackrl {

// Centre of stack slot k: above the goal, (k + 1/2) cube heights up.
Vec3 slot_position(const StackState& s, const EnvConfig& cfg, int k);

// Number of slots that must be filled at the current stage.
int target_count(const StackState& s, const EnvConfig& cfg);

// Object permutation[k] is released and within stack_epsilon of slot k.
bool slot_filled(const StackState& s, const EnvConfig& cfg, int k);

// First unfilled target slot, or -1 when every target slot is filled.
int current_target(const StackState& s, const EnvConfig& cfg);

// Every target slot filled and nothing held.
bool stack_success(const StackState& s, const EnvConfig& cfg);

struct RewardResult {
  double total = 0.0;
  RewardBreakdown breakdown{};
  // Slots whose one-time bonus is paid on this step.
  std::vector<char> newly_claimed;
  bool success = false;
};

// r_t = sum_i lambda_i R_i for a post-step state. Reads (never writes) the
// episode's bonus flags from `s`; the caller records `newly_claimed`.
RewardResult compose(const StackState& s, std::span<const double> action, const EnvConfig& cfg);

}  // namespace stackrl

#endif  // STACKRL_COMPOSE_HPP_
