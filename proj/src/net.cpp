#include "stackrl/net.hpp"

#include <cmath>
#include <string>

#include "stackrl/errors.hpp"
#include "stackrl/rng.hpp"

namespace stackrl {
namespace {

DenseLayer zero_layer(int fan_in, int fan_out) {
  return DenseLayer{Mat::Zero(fan_in, fan_out), RowVec::Zero(fan_out)};
}

void fill_uniform(Mat& weight, double gain, CounterRng& rng) {
  const double bound = gain * std::sqrt(3.0 / static_cast<double>(weight.rows()));
  for (Eigen::Index i = 0; i < weight.size(); ++i) {
    weight.data()[i] = rng.uniform(-bound, bound);
  }
}

struct Activations {
  std::vector<Mat> pre;   // z_k
  std::vector<Mat> post;  // h_k, post[0] = obs
};

Mat elu_of(const Mat& z) {
  return (z.array() > 0.0).select(z.array(), z.array().exp() - 1.0).matrix();
}

PolicyBatch forward_impl(const NetParams& params, const Mat& obs, Activations* cache) {
  const auto shape = params.shape();
  if (obs.cols() != shape.obs_dim) {
    throw ConfigError("observation width " + std::to_string(obs.cols()) +
                      " does not match network input " + std::to_string(shape.obs_dim));
  }
  if (obs.rows() < 1) throw ConfigError("forward needs a batch of at least one row");

  Mat h = obs;
  if (cache) cache->post.push_back(h);
  for (const auto& layer : params.layers) {
    Mat z = h * layer.weight;
    z.rowwise() += layer.bias;
    h = elu_of(z);
    if (cache) {
      cache->pre.push_back(std::move(z));
      cache->post.push_back(h);
    }
  }

  PolicyBatch out;
  out.head = params.head;
  out.dist = h * params.policy.weight;
  out.dist.rowwise() += params.policy.bias;
  Mat v = h * params.value.weight;
  out.value = v.col(0).array() + params.value.bias(0);
  out.log_sigma = params.log_sigma;
  return out;
}

}  // namespace

NetParams NetParams::zeros(const NetShape& shape) {
  NetParams p;
  p.head = shape.head;
  int fan_in = shape.obs_dim;
  for (int width : shape.hidden) {
    p.layers.push_back(zero_layer(fan_in, width));
    fan_in = width;
  }
  p.policy = zero_layer(fan_in, shape.action_dim);
  p.value = zero_layer(fan_in, 1);
  if (shape.head == PolicyHead::kGaussian) p.log_sigma = RowVec::Zero(shape.action_dim);
  return p;
}

NetShape NetParams::shape() const {
  NetShape s;
  s.head = head;
  s.obs_dim = static_cast<int>(layers.empty() ? policy.weight.rows() : layers.front().weight.rows());
  for (const auto& layer : layers) s.hidden.push_back(static_cast<int>(layer.weight.cols()));
  s.action_dim = static_cast<int>(policy.weight.cols());
  return s;
}

std::size_t NetParams::num_parameters() const {
  std::size_t n = 0;
  for (auto a : arrays()) n += a.size();
  return n;
}

std::vector<std::span<double>> NetParams::arrays() {
  std::vector<std::span<double>> out;
  auto push = [&out](auto& m) { out.emplace_back(m.data(), static_cast<std::size_t>(m.size())); };
  for (auto& layer : layers) {
    push(layer.weight);
    push(layer.bias);
  }
  push(policy.weight);
  push(policy.bias);
  push(value.weight);
  push(value.bias);
  if (head == PolicyHead::kGaussian) push(log_sigma);
  return out;
}

std::vector<std::span<const double>> NetParams::arrays() const {
  auto spans = const_cast<NetParams*>(this)->arrays();
  return {spans.begin(), spans.end()};
}

void validate(const NetParams& params) {
  Eigen::Index fan_in = params.layers.empty() ? params.policy.weight.rows()
                                              : params.layers.front().weight.rows();
  auto check_layer = [&](const DenseLayer& layer, const char* name) {
    if (layer.weight.rows() != fan_in) {
      throw ConfigError(std::string(name) + " expects input width " +
                        std::to_string(layer.weight.rows()) + " but receives " +
                        std::to_string(fan_in));
    }
    if (layer.bias.size() != layer.weight.cols()) {
      throw ConfigError(std::string(name) + " bias length does not match its output width");
    }
  };
  for (const auto& layer : params.layers) {
    check_layer(layer, "hidden layer");
    fan_in = layer.weight.cols();
  }
  check_layer(params.policy, "policy head");
  check_layer(params.value, "value head");
  if (params.value.weight.cols() != 1) throw ConfigError("value head must produce one scalar");
  if (params.head == PolicyHead::kGaussian &&
      params.log_sigma.size() != params.policy.weight.cols()) {
    throw ConfigError("log_sigma length must equal the action dimension");
  }
  if (params.head == PolicyHead::kCategorical && params.log_sigma.size() != 0) {
    throw ConfigError("categorical head carries no log_sigma");
  }
}

bool all_finite(const NetParams& params) {
  for (auto a : params.arrays()) {
    for (double x : a) {
      if (!std::isfinite(x)) return false;
    }
  }
  return true;
}

NetParams init_params(const NetShape& shape, std::uint64_t seed) {
  if (shape.obs_dim < 1 || shape.action_dim < 1) {
    throw ConfigError("network needs positive observation and action dimensions");
  }
  for (int w : shape.hidden) {
    if (w < 1) throw ConfigError("hidden layer widths must be positive");
  }
  NetParams p = NetParams::zeros(shape);
  CounterRng rng(seed, Stream::kInit);
  for (auto& layer : p.layers) fill_uniform(layer.weight, std::sqrt(2.0), rng);
  fill_uniform(p.policy.weight, 0.01, rng);
  fill_uniform(p.value.weight, 1.0, rng);
  return p;
}

PolicyOutput PolicyBatch::row(Eigen::Index i) const {
  PolicyOutput out;
  out.head = head;
  out.dist = dist.row(i);
  if (head == PolicyHead::kGaussian) out.sigma = log_sigma.array().exp();
  out.value = value(i);
  return out;
}

PolicyBatch forward(const NetParams& params, const Mat& obs) {
  return forward_impl(params, obs, nullptr);
}

BackwardResult backward(const NetParams& params, const Mat& obs, const LossSpec& loss) {
  Activations cache;
  const PolicyBatch out = forward_impl(params, obs, &cache);
  HeadGradient g = loss(out);
  if (g.d_dist.rows() != out.dist.rows() || g.d_dist.cols() != out.dist.cols() ||
      g.d_value.size() != out.value.size()) {
    throw ConfigError("loss gradient shape does not match the network outputs");
  }

  BackwardResult result;
  result.loss = g.loss;
  NetParams& grads = result.grads;
  grads = NetParams::zeros(params.shape());

  const Mat& top = cache.post.back();
  grads.policy.weight.noalias() = top.transpose() * g.d_dist;
  grads.policy.bias = g.d_dist.colwise().sum();
  grads.value.weight.noalias() = top.transpose() * g.d_value;
  grads.value.bias(0) = g.d_value.sum();
  if (params.head == PolicyHead::kGaussian) {
    grads.log_sigma = g.d_log_sigma.size() == 0 ? RowVec::Zero(params.log_sigma.size())
                                                 : g.d_log_sigma;
  }

  Mat d_h = g.d_dist * params.policy.weight.transpose();
  d_h.noalias() += g.d_value * params.value.weight.transpose();

  for (std::size_t k = params.layers.size(); k-- > 0;) {
    const Mat& z = cache.pre[k];
    // ELU'(z) = 1 for z > 0, e^z = h + 1 otherwise.
    Mat d_z = (z.array() > 0.0)
                  .select(d_h.array(), d_h.array() * (cache.post[k + 1].array() + 1.0))
                  .matrix();
    grads.layers[k].weight.noalias() = cache.post[k].transpose() * d_z;
    grads.layers[k].bias = d_z.colwise().sum();
    if (k > 0) d_h.noalias() = d_z * params.layers[k].weight.transpose();
  }
  return result;
}

}  // namespace stackrl
