#include "stackrl/adam.hpp"

#include <cmath>
#include <string>

#include "stackrl/errors.hpp"

namespace stackrl {

void adam_step(NetParams& params, AdamState& state, const NetParams& grads, double lr,
               const AdamConfig& cfg) {
  if (!(lr > 0.0)) throw ConfigError("adam: learning rate must be positive");
  auto p = params.arrays();
  auto m = state.first_moment.arrays();
  auto v = state.second_moment.arrays();
  const auto g = grads.arrays();
  if (p.size() != g.size() || p.size() != m.size() || p.size() != v.size()) {
    throw ConfigError("adam: parameter, gradient and moment layouts differ");
  }
  for (std::size_t a = 0; a < g.size(); ++a) {
    if (g[a].size() != p[a].size() || m[a].size() != p[a].size()) {
      throw ConfigError("adam: array " + std::to_string(a) + " has mismatched length");
    }
    for (double x : g[a]) {
      if (!std::isfinite(x)) {
        throw InvariantViolation("adam: non-finite gradient in parameter array " +
                                 std::to_string(a));
      }
    }
  }

  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t a = 0; a < g.size(); ++a) {
    for (std::size_t i = 0; i < g[a].size(); ++i) {
      const double gi = g[a][i];
      m[a][i] = cfg.beta1 * m[a][i] + (1.0 - cfg.beta1) * gi;
      v[a][i] = cfg.beta2 * v[a][i] + (1.0 - cfg.beta2) * gi * gi;
      const double m_hat = m[a][i] / c1;
      const double v_hat = v[a][i] / c2;
      p[a][i] -= lr * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
  }
}

}  // namespace stackrl
