#ifndef STACKRL_NET_HPP_
#define STACKRL_NET_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace stackrl {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;
using RowVec = Eigen::RowVectorXd;

enum class PolicyHead { kGaussian, kCategorical };

struct NetShape {
  int obs_dim = 0;
  std::vector<int> hidden;
  // Continuous: action dimension. Categorical: number of discrete actions.
  int action_dim = 0;
  PolicyHead head = PolicyHead::kGaussian;

  friend bool operator==(const NetShape&, const NetShape&) = default;
};

// Affine map; weight is fan_in x fan_out so a batch row multiplies on the left.
struct DenseLayer {
  Mat weight;
  RowVec bias;
};

// Shared actor-critic trunk with two affine heads. The same type also holds
// gradients and optimizer moments.
struct NetParams {
  PolicyHead head = PolicyHead::kGaussian;
  std::vector<DenseLayer> layers;
  DenseLayer policy;
  DenseLayer value;
  RowVec log_sigma;  // empty for the categorical head

  static NetParams zeros(const NetShape& shape);
  static NetParams zeros_like(const NetParams& other) { return zeros(other.shape()); }

  NetShape shape() const;
  std::size_t num_parameters() const;

  // Every array in declared order: layer weights/biases, policy head, value
  // head, log_sigma. Checkpoints, Adam and finite differences all rely on it.
  std::vector<std::span<double>> arrays();
  std::vector<std::span<const double>> arrays() const;
};

// Throws ConfigError when shapes do not chain.
void validate(const NetParams& params);
bool all_finite(const NetParams& params);

// Scaled-uniform init: variance gain^2 / fan_in, gains sqrt(2) hidden, 0.01
// policy, 1.0 value. Biases and log_sigma start at zero.
NetParams init_params(const NetShape& shape, std::uint64_t seed);

inline double elu(double x) { return x > 0.0 ? x : std::expm1(x); }

struct PolicyOutput {
  PolicyHead head = PolicyHead::kGaussian;
  RowVec dist;   // mean or logits
  RowVec sigma;  // empty for categorical
  double value = 0.0;
};

struct PolicyBatch {
  PolicyHead head = PolicyHead::kGaussian;
  Mat dist;          // B x k: means or logits
  RowVec log_sigma;  // shared across the batch
  Vec value;         // B

  Eigen::Index size() const { return dist.rows(); }
  PolicyOutput row(Eigen::Index i) const;
};

PolicyBatch forward(const NetParams& params, const Mat& obs);

// Derivatives of a scalar loss with respect to the head outputs.
struct HeadGradient {
  double loss = 0.0;
  Mat d_dist;
  Vec d_value;
  RowVec d_log_sigma;
};

using LossSpec = std::function<HeadGradient(const PolicyBatch&)>;

struct BackwardResult {
  double loss = 0.0;
  NetParams grads;
};

// Reverse-mode gradients of the loss described by `loss` with respect to
// every parameter.
BackwardResult backward(const NetParams& params, const Mat& obs, const LossSpec& loss);

}  // namespace stackrl

#endif  // STACKRL_NET_HPP_
