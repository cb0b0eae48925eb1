#ifndef STACKRL_ADAM_HPP_
#define STACKRL_ADAM_HPP_

#include <cstdint>

#include "stackrl/net.hpp"

namespace stackrl {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  NetParams first_moment;
  NetParams second_moment;
  std::int64_t step_count = 0;

  static AdamState zeros_like(const NetParams& params) {
    return {NetParams::zeros_like(params), NetParams::zeros_like(params), 0};
  }
};

// Bias-corrected adaptive-moment step, in place. Throws InvariantViolation
// (naming the offending array) if any gradient is non-finite, and ConfigError
// if lr <= 0 or shapes differ.
void adam_step(NetParams& params, AdamState& state, const NetParams& grads, double lr,
               const AdamConfig& cfg = {});

}  // namespace stackrl

#endif  // STACKRL_ADAM_HPP_
