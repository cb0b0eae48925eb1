#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "stackrl/errors.hpp"
#include "stackrl/ppo.hpp"
#include "stackrl/trainer.hpp"
#include "test_util.hpp"

namespace stackrl {
namespace {

struct Trajectories {
  Mat rewards, values;
  Mask dones;
  Vec bootstrap;
};

Trajectories random_trajectories(int t_len, int n, CounterRng& rng, bool all_terminal_at_end) {
  Trajectories tr{Mat(t_len, n), Mat(t_len, n), Mask::Constant(t_len, n, false), Vec(n)};
  for (int t = 0; t < t_len; ++t) {
    for (int i = 0; i < n; ++i) {
      tr.rewards(t, i) = rng.uniform(-1.0, 1.0);
      tr.values(t, i) = rng.uniform(-2.0, 2.0);
      tr.dones(t, i) = rng.uniform() < 0.15;
    }
  }
  for (int i = 0; i < n; ++i) {
    tr.bootstrap(i) = rng.uniform(-2.0, 2.0);
    if (all_terminal_at_end) tr.dones(t_len - 1, i) = true;
  }
  return tr;
}

TEST(Gae, SingleTerminalStepIsZero) {
  const Mat r = Mat::Zero(1, 1), v = Mat::Zero(1, 1);
  const Mask d = Mask::Constant(1, 1, true);
  const GaeResult g = compute_gae(r, v, d, Vec::Zero(1), {0.99, 0.95});
  EXPECT_EQ(g.advantages(0, 0), 0.0);
  EXPECT_EQ(g.returns(0, 0), 0.0);
}

TEST(Gae, TwoStepHandUnrolled) {
  Mat r(2, 1), v(2, 1);
  r << 1.0, 1.0;
  v << 0.5, 0.5;
  Mask d = Mask::Constant(2, 1, false);
  d(1, 0) = true;
  const GaeResult g = compute_gae(r, v, d, Vec::Constant(1, 123.0), {0.99, 0.95});
  EXPECT_NEAR(g.advantages(1, 0), 0.5, 1e-15);
  EXPECT_NEAR(g.advantages(0, 0), 1.46525, 1e-12);
  EXPECT_NEAR(g.returns(0, 0), 1.46525 + 0.5, 1e-12);
}

// tau = 1 with every column ending in a terminal: A_t = sum_k gamma^k r_{t+k}
// within the episode, minus V_t.
TEST(Gae, TauOneMatchesDiscountedSumOracle) {
  CounterRng rng(1, Stream::kTest);
  for (int trial = 0; trial < 100; ++trial) {
    const int t_len = 1 + static_cast<int>(rng.below(64));
    const double gamma = rng.uniform(0.8, 1.0);
    const Trajectories tr = random_trajectories(t_len, 3, rng, true);
    const GaeResult g = compute_gae(tr.rewards, tr.values, tr.dones, tr.bootstrap, {gamma, 1.0});
    for (int i = 0; i < 3; ++i) {
      for (int t = 0; t < t_len; ++t) {
        double ret = 0.0, disc = 1.0;
        for (int k = t; k < t_len; ++k) {
          ret += disc * tr.rewards(k, i);
          if (tr.dones(k, i)) break;
          disc *= gamma;
        }
        EXPECT_NEAR(g.advantages(t, i), ret - tr.values(t, i), 1e-10);
      }
    }
  }
}

// General tau against sum_l (gamma tau)^l delta_{t+l} evaluated term by term.
TEST(Gae, GeneralTauMatchesNaiveOracle) {
  CounterRng rng(2, Stream::kTest);
  for (int trial = 0; trial < 100; ++trial) {
    const int t_len = 1 + static_cast<int>(rng.below(64));
    const double gamma = rng.uniform(0.8, 1.0), tau = rng.uniform(0.0, 1.0);
    const Trajectories tr = random_trajectories(t_len, 2, rng, false);
    const GaeResult g = compute_gae(tr.rewards, tr.values, tr.dones, tr.bootstrap, {gamma, tau});
    for (int i = 0; i < 2; ++i) {
      auto next_v = [&](int t) { return t + 1 < t_len ? tr.values(t + 1, i) : tr.bootstrap(i); };
      for (int t = 0; t < t_len; ++t) {
        double adv = 0.0, w = 1.0;
        for (int k = t; k < t_len; ++k) {
          const double live = tr.dones(k, i) ? 0.0 : 1.0;
          adv += w * (tr.rewards(k, i) + gamma * next_v(k) * live - tr.values(k, i));
          if (tr.dones(k, i)) break;
          w *= gamma * tau;
        }
        EXPECT_NEAR(g.advantages(t, i), adv, 1e-12);
        EXPECT_NEAR(g.returns(t, i), adv + tr.values(t, i), 1e-12);
      }
    }
  }
}

TEST(Gae, NothingCrossesADoneBoundary) {
  CounterRng rng(3, Stream::kTest);
  Trajectories tr = random_trajectories(20, 1, rng, false);
  tr.dones.setConstant(false);
  tr.dones(7, 0) = true;
  const GaeResult a = compute_gae(tr.rewards, tr.values, tr.dones, tr.bootstrap, {0.99, 0.95});
  for (int t = 8; t < 20; ++t) {
    tr.rewards(t, 0) += 10.0;
    tr.values(t, 0) -= 3.0;
  }
  tr.bootstrap(0) += 5.0;
  const GaeResult b = compute_gae(tr.rewards, tr.values, tr.dones, tr.bootstrap, {0.99, 0.95});
  for (int t = 0; t <= 7; ++t) EXPECT_EQ(a.advantages(t, 0), b.advantages(t, 0));
}

TEST(Gae, ShapeMismatchIsConfigError) {
  EXPECT_THROW(compute_gae(Mat::Zero(2, 2), Mat::Zero(2, 1), Mask::Constant(2, 2, false),
                           Vec::Zero(2), {}),
               ConfigError);
  EXPECT_THROW(compute_gae(Mat::Zero(2, 2), Mat::Zero(2, 2), Mask::Constant(2, 2, false),
                           Vec::Zero(3), {}),
               ConfigError);
}

TEST(Objective, HandCases) {
  const std::vector<double> same{0.3}, adv2{2.0};
  EXPECT_EQ(ppo_objective(same, same, adv2, 0.2), 2.0);

  const std::vector<double> up{std::log(1.5)}, zero{0.0}, one{1.0}, minus{-1.0}, down{std::log(0.5)};
  EXPECT_DOUBLE_EQ(ppo_objective(up, zero, one, 0.2), 1.2);
  EXPECT_DOUBLE_EQ(ppo_objective(down, zero, minus, 0.2), -0.8);
}

TEST(Objective, InvariantToCommonShift) {
  CounterRng rng(4, Stream::kTest);
  std::vector<double> n(50), o(50), a(50), n2(50), o2(50);
  for (int i = 0; i < 50; ++i) {
    n[i] = rng.uniform(-2, 0);
    o[i] = n[i] + rng.uniform(-0.5, 0.5);
    a[i] = rng.uniform(-2, 2);
    const double c = 3.75;
    n2[i] = n[i] + c;
    o2[i] = o[i] + c;
  }
  EXPECT_NEAR(ppo_objective(n, o, a, 0.2), ppo_objective(n2, o2, a, 0.2), 1e-12);
}

TEST(LrUpdate, Rules) {
  PpoConfig fixed;
  fixed.lr_mode = LrMode::kFixed;
  EXPECT_EQ(lr_update(fixed, 5e-4, 1.0), 5e-4);

  PpoConfig adaptive;
  adaptive.lr_mode = LrMode::kKlAdaptive;
  adaptive.kl_threshold = 0.008;
  EXPECT_DOUBLE_EQ(lr_update(adaptive, 5e-4, 0.02), 5e-4 / 1.5);
  EXPECT_NEAR(lr_update(adaptive, 5e-4, 0.02), 3.333e-4, 1e-7);
  EXPECT_DOUBLE_EQ(lr_update(adaptive, 5e-4, 0.001), 5e-4 * 1.5);
  EXPECT_EQ(lr_update(adaptive, 5e-4, 0.008), 5e-4);
  EXPECT_EQ(lr_update(adaptive, 1e-6, 1e6), 1e-6);
  EXPECT_EQ(lr_update(adaptive, 9e-3, 0.0), 1e-2);
}

TEST(Normalize, ZeroMeanUnitStd) {
  CounterRng rng(5, Stream::kTest);
  Vec a(1000);
  for (int i = 0; i < a.size(); ++i) a(i) = rng.uniform(-3.0, 11.0);
  normalize_advantages(a);
  EXPECT_LT(std::abs(a.mean()), 1e-10);
  EXPECT_NEAR(std::sqrt(a.squaredNorm() / a.size()), 1.0, 1e-10);

  Vec one = Vec::Constant(1, 4.0);
  normalize_advantages(one);
  EXPECT_EQ(one(0), 4.0);
  Vec flat = Vec::Constant(5, 2.0);
  normalize_advantages(flat);
  EXPECT_TRUE(flat.isZero(0.0));
}

RunConfig small_maze_config() {
  RunConfig c;
  c.seed = 9;
  c.num_envs = 8;
  c.hidden = {16};
  c.env.kind = EnvKind::kMaze;
  c.ppo.minibatch_size = 32;
  c.stages = {CurriculumStage{0, 1, 40, 16}};
  return c;
}

TEST(TrainIteration, ZeroAdvantageAndZeroValueLeaveParamsUnchanged) {
  const RunConfig c = small_maze_config();
  VecEnv envs(c.env, c.num_envs, c.seed);
  NetParams p = init_params({envs.observation_size(), c.hidden, 4, PolicyHead::kCategorical}, 3);
  p.value.weight.setZero();
  p.value.bias.setZero();
  auto streams = make_action_streams(c.seed, c.num_envs);
  HorizonBuffer buf = collect_horizon(p, envs, 16, {}, streams);
  buf.rewards.setZero();
  buf.values.setZero();
  buf.bootstrap_values.setZero();
  const NetParams before = p;
  AdamState adam = AdamState::zeros_like(p);
  double lr = c.ppo.lr;
  CounterRng shuffle(1, Stream::kShuffle);
  train_iteration(p, adam, buf, c.ppo, c.gae, lr, shuffle);
  const auto a = p.arrays();
  const auto b = before.arrays();
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(0, std::memcmp(a[k].data(), b[k].data(), a[k].size_bytes())) << "array " << k;
  }
  EXPECT_EQ(adam.step_count, c.ppo.mini_epochs * 16 * c.num_envs / c.ppo.minibatch_size);
}

TEST(TrainIteration, RejectsNonDividingMinibatch) {
  RunConfig c = small_maze_config();
  VecEnv envs(c.env, c.num_envs, c.seed);
  NetParams p = init_params({envs.observation_size(), c.hidden, 4, PolicyHead::kCategorical}, 3);
  auto streams = make_action_streams(c.seed, c.num_envs);
  const HorizonBuffer buf = collect_horizon(p, envs, 16, {}, streams);
  AdamState adam = AdamState::zeros_like(p);
  double lr = 1e-3;
  CounterRng shuffle(1, Stream::kShuffle);
  c.ppo.minibatch_size = 48;
  EXPECT_THROW(train_iteration(p, adam, buf, c.ppo, c.gae, lr, shuffle), ConfigError);
}

TEST(TrainIteration, SeededRunsAreBitwiseIdentical) {
  const RunConfig c = small_maze_config();
  Trainer a(c), b(c);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(metrics_line(a.iterate()), metrics_line(b.iterate()));
}

TEST(TrainIteration, FixedModeKeepsLrConstant) {
  RunConfig c = small_maze_config();
  c.ppo.lr = 3e-3;
  Trainer t(c);
  for (int i = 0; i < 5; ++i) {
    const IterationRecord r = t.iterate();
    EXPECT_EQ(r.metrics.lr, 3e-3);
    EXPECT_EQ(r.metrics.next_lr, 3e-3);
  }
}

TEST(TrainIteration, AdaptiveModeFollowsObservedKl) {
  RunConfig c = small_maze_config();
  c.ppo.lr_mode = LrMode::kKlAdaptive;
  Trainer t(c);
  for (int i = 0; i < 5; ++i) {
    const IterationRecord r = t.iterate();
    EXPECT_EQ(r.metrics.next_lr, lr_update(c.ppo, r.metrics.lr, r.metrics.kl));
  }
}

// Horizon 40 >= 2 x shortest path: later windows succeed more often than the
// first, median over three seeds.
TEST(TrainIteration, MazeSuccessRateIncreases) {
  std::vector<double> gains;
  for (std::uint64_t seed : {1, 2, 3}) {
    RunConfig c;
    c.seed = seed;
    c.num_envs = 64;
    c.env.kind = EnvKind::kMaze;
    c.ppo.minibatch_size = 640;
    c.stages = {CurriculumStage{0, 1, 40, 40}};
    Trainer t(c);
    const double first = t.iterate().metrics.success_rate;
    double last = first;
    for (int i = 1; i < 200; ++i) {
      last = t.iterate().metrics.success_rate;
      if (last > 0.99) break;
    }
    gains.push_back(last - first);
  }
  std::sort(gains.begin(), gains.end());
  EXPECT_GT(gains[1], 0.0);
}

}  // namespace
}  // namespace stackrl
