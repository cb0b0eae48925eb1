#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <cstring>
#include <numbers>

#include "stackrl/adam.hpp"
#include "stackrl/distributions.hpp"
#include "stackrl/errors.hpp"
#include "stackrl/net.hpp"
#include "stackrl/ppo.hpp"
#include "test_util.hpp"

namespace stackrl {
namespace {

using testing::random_matrix;
using testing::random_params;

// Straight-line loops, no Eigen expressions.
PolicyBatch loop_forward(const NetParams& p, const Mat& obs) {
  PolicyBatch out;
  out.head = p.head;
  out.log_sigma = p.log_sigma;
  out.dist = Mat(obs.rows(), p.policy.weight.cols());
  out.value = Vec(obs.rows());
  for (Eigen::Index b = 0; b < obs.rows(); ++b) {
    std::vector<double> h(obs.row(b).data(), obs.row(b).data() + obs.cols());
    for (const auto& layer : p.layers) {
      std::vector<double> next(static_cast<std::size_t>(layer.weight.cols()));
      for (Eigen::Index j = 0; j < layer.weight.cols(); ++j) {
        double z = layer.bias(j);
        for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) z += h[static_cast<std::size_t>(i)] * layer.weight(i, j);
        next[static_cast<std::size_t>(j)] = z > 0.0 ? z : std::exp(z) - 1.0;
      }
      h = next;
    }
    for (Eigen::Index j = 0; j < p.policy.weight.cols(); ++j) {
      double z = p.policy.bias(j);
      for (Eigen::Index i = 0; i < p.policy.weight.rows(); ++i) z += h[static_cast<std::size_t>(i)] * p.policy.weight(i, j);
      out.dist(b, j) = z;
    }
    double v = p.value.bias(0);
    for (Eigen::Index i = 0; i < p.value.weight.rows(); ++i) v += h[static_cast<std::size_t>(i)] * p.value.weight(i, 0);
    out.value(b) = v;
  }
  return out;
}

TEST(Forward, ZeroParamsGiveZeroMeanAndValue) {
  NetParams p = NetParams::zeros({5, {8, 8}, 3, PolicyHead::kGaussian});
  p.log_sigma << 0.1, -0.2, 0.3;
  CounterRng rng(1, Stream::kTest);
  const PolicyBatch out = forward(p, random_matrix(4, 5, rng));
  EXPECT_TRUE(out.dist.isZero(0.0));
  EXPECT_TRUE(out.value.isZero(0.0));
  const PolicyOutput row = out.row(2);
  EXPECT_DOUBLE_EQ(row.sigma(0), std::exp(0.1));
  EXPECT_DOUBLE_EQ(row.sigma(1), std::exp(-0.2));
  EXPECT_DOUBLE_EQ(row.sigma(2), std::exp(0.3));
}

TEST(Forward, EluOfIdentityLayer) {
  NetParams p = NetParams::zeros({1, {1}, 1, PolicyHead::kGaussian});
  p.layers[0].weight(0, 0) = 1.0;
  p.policy.weight(0, 0) = 1.0;  // mean exposes the hidden unit
  Mat obs(1, 1);
  obs << -1.0;
  EXPECT_NEAR(forward(p, obs).dist(0, 0), std::exp(-1.0) - 1.0, 1e-15);
  EXPECT_NEAR(forward(p, obs).dist(0, 0), -0.6321205588, 1e-10);
}

TEST(Forward, MatchesLoopOracle) {
  CounterRng rng(2, Stream::kTest);
  for (int trial = 0; trial < 10; ++trial) {
    const NetShape shape{3 + trial, {7, 5 + trial}, 1 + trial % 4,
                         trial % 2 ? PolicyHead::kCategorical : PolicyHead::kGaussian};
    const NetParams p = random_params(shape, 100 + static_cast<std::uint64_t>(trial));
    const Mat obs = random_matrix(6, shape.obs_dim, rng, 2.0);
    const PolicyBatch a = forward(p, obs);
    const PolicyBatch b = loop_forward(p, obs);
    EXPECT_LT((a.dist - b.dist).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((a.value - b.value).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Forward, IsPure) {
  const NetParams p = random_params({6, {16, 16}, 4, PolicyHead::kGaussian}, 3);
  CounterRng rng(3, Stream::kTest);
  const Mat obs = random_matrix(9, 6, rng);
  const PolicyBatch a = forward(p, obs);
  const PolicyBatch b = forward(p, obs);
  EXPECT_EQ(0, std::memcmp(a.dist.data(), b.dist.data(), sizeof(double) * a.dist.size()));
  EXPECT_EQ(0, std::memcmp(a.value.data(), b.value.data(), sizeof(double) * a.value.size()));
}

TEST(Forward, ShapeMismatchIsConfigError) {
  const NetParams p = random_params({6, {4}, 2, PolicyHead::kGaussian}, 4);
  EXPECT_THROW(forward(p, Mat::Zero(2, 5)), ConfigError);
  EXPECT_THROW(forward(p, Mat::Zero(0, 6)), ConfigError);
}

TEST(Elu, ContinuousAtZero) {
  EXPECT_LT(std::abs(elu(1e-9)), 2e-9);
  EXPECT_LT(std::abs(elu(-1e-9)), 2e-9);
}

TEST(Init, Shapes) {
  const NetParams p = init_params({10, {64, 32}, 4, PolicyHead::kGaussian}, 7);
  ASSERT_EQ(p.layers.size(), 2u);
  EXPECT_EQ(p.layers[0].weight.rows(), 10);
  EXPECT_EQ(p.layers[0].weight.cols(), 64);
  EXPECT_EQ(p.layers[1].weight.rows(), 64);
  EXPECT_EQ(p.policy.weight.cols(), 4);
  EXPECT_EQ(p.value.weight.cols(), 1);
  EXPECT_TRUE(p.log_sigma.isZero(0.0));
  EXPECT_EQ(p.num_parameters(), 10u * 64 + 64 + 64 * 32 + 32 + 32 * 4 + 4 + 32 + 1 + 4);
  // Uniform bound gain * sqrt(3 / fan_in).
  EXPECT_LE(p.layers[0].weight.cwiseAbs().maxCoeff(), std::sqrt(2.0) * std::sqrt(3.0 / 10));
  EXPECT_LE(p.policy.weight.cwiseAbs().maxCoeff(), 0.01 * std::sqrt(3.0 / 32));
  EXPECT_THROW(init_params({0, {4}, 2, PolicyHead::kGaussian}, 1), ConfigError);
}

TEST(LogProb, StandardNormalAtMode) {
  const double mu = 0.0, sigma = 1.0, a = 0.0;
  EXPECT_NEAR(gaussian_log_prob({&mu, 1}, {&sigma, 1}, {&a, 1}), -0.918938533204673, 1e-12);
}

TEST(LogProb, UniformCategorical) {
  const std::array<double, 2> logits{0.0, 0.0};
  EXPECT_NEAR(categorical_log_prob(logits, 0), std::log(0.5), 1e-15);
  EXPECT_NEAR(categorical_log_prob(logits, 0), -0.693147, 1e-6);
}

TEST(LogProb, DiagonalGaussianMatchesDensityFormula) {
  const std::array<double, 2> mu{1.0, -1.0}, sigma{0.5, 2.0}, a{0.0, 0.0};
  double density = 1.0;
  for (int i = 0; i < 2; ++i) {
    const double z = (a[i] - mu[i]) / sigma[i];
    density *= std::exp(-0.5 * z * z) / (sigma[i] * std::sqrt(2.0 * std::numbers::pi));
  }
  EXPECT_NEAR(gaussian_log_prob(mu, sigma, a), std::log(density), 1e-12);
}

TEST(LogProb, NonPositiveSigmaIsInvariantViolation) {
  const double mu = 0.0, sigma = 0.0, a = 0.0;
  EXPECT_THROW(gaussian_log_prob({&mu, 1}, {&sigma, 1}, {&a, 1}), InvariantViolation);
  const double neg = -1.0;
  EXPECT_THROW(gaussian_log_prob({&mu, 1}, {&neg, 1}, {&a, 1}), InvariantViolation);
}

TEST(LogProb, GaussianIntegratesToOne) {
  // Monte-Carlo over a uniform grid window [-10, 10] for mu 0.3, sigma 0.7.
  CounterRng rng(5, Stream::kTest);
  const double mu = 0.3, sigma = 0.7;
  const int n = 200000;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double a = rng.uniform(-10.0, 10.0);
    acc += std::exp(gaussian_log_prob({&mu, 1}, {&sigma, 1}, {&a, 1}));
  }
  EXPECT_NEAR(acc / n * 20.0, 1.0, 0.01);
}

TEST(Kl, ClosedFormCases) {
  PolicyBatch a;
  a.head = PolicyHead::kGaussian;
  a.dist = Mat::Zero(1, 1);
  a.log_sigma = RowVec::Zero(1);
  a.value = Vec::Zero(1);
  EXPECT_EQ(kl_estimate(a, a), 0.0);
  PolicyBatch b = a;
  b.dist(0, 0) = 1.0;
  EXPECT_NEAR(kl_estimate(a, b), 0.5, 1e-12);

  PolicyBatch c;
  c.head = PolicyHead::kCategorical;
  c.dist = Mat(1, 2);
  c.dist << std::log(0.5), std::log(0.5);
  c.value = Vec::Zero(1);
  PolicyBatch d = c;
  d.dist << std::log(0.75), std::log(0.25);
  EXPECT_NEAR(kl_estimate(c, d), 0.5 * std::log(2.0 / 3.0) + 0.5 * std::log(2.0), 1e-12);
  EXPECT_NEAR(kl_estimate(c, d), 0.143841, 1e-6);
}

TEST(Kl, GaussianDifferentSigmas) {
  // KL(N(m1,s1) || N(m2,s2)) = log(s2/s1) + (s1^2 + (m1-m2)^2) / (2 s2^2) - 1/2
  PolicyBatch a, b;
  a.head = b.head = PolicyHead::kGaussian;
  a.dist = Mat(1, 2);
  b.dist = Mat(1, 2);
  a.dist << 0.2, -0.4;
  b.dist << -0.1, 0.5;
  a.log_sigma = RowVec(2);
  b.log_sigma = RowVec(2);
  a.log_sigma << std::log(0.8), std::log(1.3);
  b.log_sigma << std::log(1.1), std::log(0.6);
  a.value = b.value = Vec::Zero(1);
  double expected = 0.0;
  for (int i = 0; i < 2; ++i) {
    const double s1 = std::exp(a.log_sigma(i)), s2 = std::exp(b.log_sigma(i));
    const double dm = a.dist(0, i) - b.dist(0, i);
    expected += std::log(s2 / s1) + (s1 * s1 + dm * dm) / (2 * s2 * s2) - 0.5;
  }
  EXPECT_NEAR(kl_estimate(a, b), expected, 1e-12);
}

TEST(Sampling, DeterministicUsesModeAndStreamsAreReproducible) {
  const NetParams p = random_params({3, {8}, 4, PolicyHead::kCategorical}, 11);
  CounterRng rng(11, Stream::kTest);
  const PolicyBatch out = forward(p, random_matrix(1, 3, rng));
  Eigen::Index argmax = 0;
  out.dist.row(0).maxCoeff(&argmax);
  CounterRng s1(1, Stream::kAction), s2(1, Stream::kAction);
  EXPECT_EQ(sample_action(out, 0, s1, true)(0), static_cast<double>(argmax));
  for (int i = 0; i < 50; ++i) {
    EXPECT_EQ(sample_action(out, 0, s1, false)(0), sample_action(out, 0, s2, false)(0));
  }
}

TEST(Sampling, CategoricalFrequenciesMatchSoftmax) {
  PolicyBatch b;
  b.head = PolicyHead::kCategorical;
  b.dist = Mat(1, 3);
  b.dist << 0.0, 1.0, -1.0;
  b.value = Vec::Zero(1);
  const RowVec p = softmax(b.dist.row(0));
  CounterRng rng(12, Stream::kTest);
  std::array<int, 3> counts{};
  const int n = 60000;
  for (int i = 0; i < n; ++i) counts[static_cast<std::size_t>(sample_action(b, 0, rng, false)(0))]++;
  for (int k = 0; k < 3; ++k) {
    const double se = std::sqrt(p(k) * (1 - p(k)) / n);
    EXPECT_NEAR(counts[static_cast<std::size_t>(k)] / double(n), p(k), 5 * se);
  }
}

// ---- backward ----

TEST(Backward, LinearValueGradientEqualsObservation) {
  NetParams p = random_params({4, {}, 2, PolicyHead::kGaussian}, 13);
  Mat obs(1, 4);
  obs << 0.5, -1.5, 2.0, 0.25;
  const BackwardResult r = backward(p, obs, [](const PolicyBatch& out) {
    HeadGradient g;
    g.loss = out.value(0);
    g.d_dist = Mat::Zero(out.dist.rows(), out.dist.cols());
    g.d_value = Vec::Ones(1);
    g.d_log_sigma = RowVec::Zero(out.log_sigma.size());
    return g;
  });
  for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(r.grads.value.weight(i, 0), obs(0, i));
  EXPECT_DOUBLE_EQ(r.grads.value.bias(0), 1.0);
  EXPECT_TRUE(r.grads.policy.weight.isZero(0.0));
}

struct PpoLossFixture {
  Mat obs, actions;
  Vec logp_old, adv, ret;
  PpoConfig cfg;
};

PpoLossFixture make_loss_fixture(const NetParams& p, std::uint64_t seed, int batch) {
  PpoLossFixture f;
  CounterRng rng(seed, Stream::kTest, 7);
  f.obs = random_matrix(batch, p.layers.empty() ? p.policy.weight.rows() : p.layers[0].weight.rows(), rng, 1.5);
  const PolicyBatch out = forward(p, f.obs);
  const bool cat = p.head == PolicyHead::kCategorical;
  f.actions = Mat(batch, cat ? 1 : out.dist.cols());
  for (int i = 0; i < batch; ++i) f.actions.row(i) = sample_action(out, i, rng, false);
  f.logp_old = log_prob(out, f.actions);
  for (int i = 0; i < batch; ++i) f.logp_old(i) += rng.uniform(-0.3, 0.3);
  f.adv = Vec(batch);
  f.ret = Vec(batch);
  for (int i = 0; i < batch; ++i) {
    f.adv(i) = rng.uniform(-2.0, 2.0);
    f.ret(i) = rng.uniform(-1.0, 1.0);
  }
  f.cfg.entropy_coef = 0.05;
  f.cfg.value_coef = 0.7;
  return f;
}

double loss_at(const NetParams& p, const PpoLossFixture& f) {
  return backward(p, f.obs, make_ppo_loss(f.actions, f.logp_old, f.adv, f.ret, f.cfg)).loss;
}

// 20 random nets x 10 coordinates, central differences with h = 1e-5.
TEST(Backward, FiniteDifferenceAgreement) {
  CounterRng pick(21, Stream::kTest);
  int checked = 0;
  for (int net = 0; net < 20; ++net) {
    const std::vector<int> hidden = net % 5 == 0 ? std::vector<int>{} : std::vector<int>{3 + net % 4, 2 + net % 3};
    const NetShape shape{2 + net % 5, hidden, 1 + net % 3,
                         net % 2 ? PolicyHead::kCategorical : PolicyHead::kGaussian};
    NetParams p = random_params(shape, 200 + static_cast<std::uint64_t>(net));
    const PpoLossFixture f = make_loss_fixture(p, 300 + static_cast<std::uint64_t>(net), 5);
    const BackwardResult r =
        backward(p, f.obs, make_ppo_loss(f.actions, f.logp_old, f.adv, f.ret, f.cfg));
    auto params = p.arrays();
    const auto grads = r.grads.arrays();
    for (int k = 0; k < 10; ++k) {
      const auto a = static_cast<std::size_t>(pick.below(params.size()));
      const auto i = static_cast<std::size_t>(pick.below(params[a].size()));
      const double saved = params[a][i];
      const double h = 1e-5;
      params[a][i] = saved + h;
      const double up = loss_at(p, f);
      params[a][i] = saved - h;
      const double down = loss_at(p, f);
      params[a][i] = saved;
      const double numeric = (up - down) / (2 * h);
      const double analytic = grads[a][i];
      EXPECT_LT(std::abs(analytic - numeric) / std::max(1.0, std::abs(numeric)), 1e-5)
          << "net " << net << " array " << a << " index " << i;
      ++checked;
    }
  }
  EXPECT_EQ(checked, 200);
}

TEST(Backward, ScalingLossScalesGradients) {
  const NetParams p = random_params({4, {6, 5}, 2, PolicyHead::kGaussian}, 31);
  PpoLossFixture f = make_loss_fixture(p, 32, 6);
  const BackwardResult base = backward(p, f.obs, make_ppo_loss(f.actions, f.logp_old, f.adv, f.ret, f.cfg));
  const double c = 4.0;  // power of two: scaling is exact
  const LossSpec inner = make_ppo_loss(f.actions, f.logp_old, f.adv, f.ret, f.cfg);
  const BackwardResult scaled = backward(p, f.obs, [&](const PolicyBatch& out) {
    HeadGradient g = inner(out);
    g.loss *= c;
    g.d_dist *= c;
    g.d_value *= c;
    g.d_log_sigma *= c;
    return g;
  });
  EXPECT_EQ(scaled.loss, c * base.loss);
  const auto a = base.grads.arrays();
  const auto b = scaled.grads.arrays();
  for (std::size_t k = 0; k < a.size(); ++k) {
    for (std::size_t i = 0; i < a[k].size(); ++i) EXPECT_EQ(b[k][i], c * a[k][i]);
  }
}

// ---- adam ----

TEST(Adam, ZeroGradientsLeaveParamsAndMomentsUnchanged) {
  NetParams p = random_params({3, {4}, 2, PolicyHead::kGaussian}, 41);
  const NetParams before = p;
  AdamState s = AdamState::zeros_like(p);
  adam_step(p, s, NetParams::zeros_like(p), 5e-4);
  EXPECT_EQ(s.step_count, 1);
  const auto a = p.arrays();
  const auto b = before.arrays();
  for (std::size_t k = 0; k < a.size(); ++k) {
    for (std::size_t i = 0; i < a[k].size(); ++i) EXPECT_EQ(a[k][i], b[k][i]);
  }
  for (auto arr : s.first_moment.arrays()) for (double v : arr) EXPECT_EQ(v, 0.0);
  for (auto arr : s.second_moment.arrays()) for (double v : arr) EXPECT_EQ(v, 0.0);
}

TEST(Adam, FirstStepHandCase) {
  // One scalar: g = 1 -> m_hat = v_hat = 1, update = lr / (1 + eps).
  NetParams p = NetParams::zeros({1, {}, 1, PolicyHead::kGaussian});
  AdamState s = AdamState::zeros_like(p);
  NetParams g = NetParams::zeros_like(p);
  g.value.bias(0) = 1.0;
  adam_step(p, s, g, 5e-4);
  EXPECT_NEAR(p.value.bias(0), -5e-4 / (1.0 + 1e-8), 1e-18);
  EXPECT_NEAR(s.first_moment.value.bias(0), 0.1, 1e-15);
  EXPECT_NEAR(s.second_moment.value.bias(0), 0.001, 1e-15);
  EXPECT_EQ(p.value.weight(0, 0), 0.0);
}

TEST(Adam, TwoStepsMatchHandRecursion) {
  NetParams p = NetParams::zeros({1, {}, 1, PolicyHead::kGaussian});
  AdamState s = AdamState::zeros_like(p);
  NetParams g = NetParams::zeros_like(p);
  double x = 0.0, m = 0.0, v = 0.0;
  const std::array<double, 2> gs{0.3, -1.7};
  for (int t = 1; t <= 2; ++t) {
    const double gt = gs[static_cast<std::size_t>(t - 1)];
    g.policy.bias(0) = gt;
    adam_step(p, s, g, 1e-3);
    m = 0.9 * m + 0.1 * gt;
    v = 0.999 * v + 0.001 * gt * gt;
    x -= 1e-3 * (m / (1 - std::pow(0.9, t))) / (std::sqrt(v / (1 - std::pow(0.999, t))) + 1e-8);
  }
  EXPECT_NEAR(p.policy.bias(0), x, 1e-15);
}

TEST(Adam, IsDeterministic) {
  NetParams p1 = random_params({3, {5}, 2, PolicyHead::kGaussian}, 42);
  NetParams p2 = p1;
  AdamState s1 = AdamState::zeros_like(p1), s2 = s1;
  NetParams g = random_params(p1.shape(), 43);
  adam_step(p1, s1, g, 1e-3);
  adam_step(p2, s2, g, 1e-3);
  const auto a = p1.arrays();
  const auto b = p2.arrays();
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(0, std::memcmp(a[k].data(), b[k].data(), a[k].size_bytes()));
}

TEST(Adam, RejectsBadInput) {
  NetParams p = random_params({3, {5}, 2, PolicyHead::kGaussian}, 44);
  AdamState s = AdamState::zeros_like(p);
  NetParams g = NetParams::zeros_like(p);
  EXPECT_THROW(adam_step(p, s, g, 0.0), ConfigError);
  g.layers[0].bias(1) = std::nan("");
  EXPECT_THROW(adam_step(p, s, g, 1e-3), InvariantViolation);
  NetParams other = NetParams::zeros({4, {5}, 2, PolicyHead::kGaussian});
  EXPECT_THROW(adam_step(p, s, other, 1e-3), ConfigError);
}

TEST(Adam, SecondMomentNonNegative) {
  NetParams p = random_params({3, {5}, 2, PolicyHead::kCategorical}, 45);
  AdamState s = AdamState::zeros_like(p);
  for (int k = 0; k < 5; ++k) {
    adam_step(p, s, random_params(p.shape(), 46 + static_cast<std::uint64_t>(k)), 1e-3);
    for (auto arr : s.second_moment.arrays()) for (double v : arr) EXPECT_GE(v, 0.0);
  }
  EXPECT_TRUE(all_finite(p));
}

}  // namespace
}  // namespace stackrl
