#ifndef STACKRL_ENVIRONMENT_HPP_
#define STACKRL_ENVIRONMENT_HPP_

#include <memory>
#include <span>

#include "stackrl/env_types.hpp"
#include "stackrl/rng.hpp"

namespace stackrl {

// One environment instance. Owns its reset RNG stream, so a clone replays the
// exact same future.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual int observation_size() const = 0;
  // Continuous: action dimension. Discrete: number of actions.
  virtual int action_size() const = 0;
  virtual bool discrete() const = 0;

  virtual void reset() = 0;
  // Discrete environments read the action index from action[0].
  virtual StepOutcome step(std::span<const double> action) = 0;
  virtual void observe(std::span<double> out) const = 0;

  virtual std::unique_ptr<Environment> clone() const = 0;
  virtual void configure(const EnvConfig& cfg) = 0;
};

std::unique_ptr<Environment> make_environment(const EnvConfig& cfg, CounterRng rng);

}  // namespace stackrl

#endif  // STACKRL_ENVIRONMENT_HPP_
