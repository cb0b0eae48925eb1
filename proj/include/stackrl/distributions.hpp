#ifndef STACKRL_DISTRIBUTIONS_HPP_
#define STACKRL_DISTRIBUTIONS_HPP_

#include <span>

#include "stackrl/net.hpp"
#include "stackrl/rng.hpp"

namespace stackrl {

// Diagonal Gaussian log-density. Throws InvariantViolation if any sigma <= 0.
double gaussian_log_prob(std::span<const double> mean, std::span<const double> sigma,
                         std::span<const double> action);

// log softmax(logits)[action]; action must index into logits.
double categorical_log_prob(std::span<const double> logits, int action);

// Per-row log-probabilities. Gaussian actions are B x action_dim, categorical
// actions are B x 1 holding the index.
Vec log_prob(const PolicyBatch& batch, const Mat& actions);

// Per-row differential/discrete entropy.
Vec entropy(const PolicyBatch& batch);

// Closed-form KL(old || new) per row.
Vec kl_divergence(const PolicyBatch& old_batch, const PolicyBatch& new_batch);

// Draws one action per row. Categorical rows produce the index in column 0.
// `deterministic` returns the mean / argmax.
RowVec sample_action(const PolicyBatch& batch, Eigen::Index row, CounterRng& rng,
                     bool deterministic);

// Softmax of one logit row, computed with the max-shift.
RowVec softmax(const RowVec& logits);

}  // namespace stackrl

#endif  // STACKRL_DISTRIBUTIONS_HPP_
