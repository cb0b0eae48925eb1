#include <gtest/gtest.h>

#include <filesystem>
#include <cmath>
#include <fstream>

#include "stackrl/config.hpp"
#include "stackrl/errors.hpp"

namespace stackrl {
namespace {

int error_line(const std::string& text) {
  try {
    parse_run_config(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

TEST(Config, EmptyTextGivesDefaults) {
  const RunConfig c = parse_run_config("");
  EXPECT_EQ(c, RunConfig{});
  EXPECT_EQ(c.num_envs, 256);
  EXPECT_EQ(c.hidden, (std::vector<int>{64, 64}));
  EXPECT_EQ(c.accuracy_window, 200);
}

TEST(Config, DefaultsRoundTrip) {
  const RunConfig c;
  EXPECT_EQ(parse_run_config(write_run_config(c)), c);
}

TEST(Config, FullRoundTrip) {
  const std::string text = R"(seed = 42
num_envs = 64
shards = 4
total_steps = 1000000
output_dir = "runs/x y"
checkpoint_every = 5
stop_on_solve = false
accuracy_window = 50
eval_switching = true
eval_episodes = 64
bootstrap_on_timeout = false

[network]
hidden = [32, 16, 8]

[env]
kind = "stacker"
num_objects = 3
padding_mode = "permutation"
reward_mode = "staggered"
grasp_epsilon = 0.07
step_scale = 0.04

[rewards]
grasp = 3.5
table_touch = -0.25

[ppo]
lr_mode = "kl_adaptive"
lr = 0.0003
kl_threshold = 0.01
minibatch_size = 640
mini_epochs = 3
entropy_coef = 0.001
reward_scale = 0.1

[gae]
gamma = 0.98
tau = 0.9

[[stage]]
objects = 1
ep_len = 100
horizon = 50

[[stage]]
objects = 3
ep_len = 150
horizon = 100
)";
  const RunConfig c = parse_run_config(text);
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.output_dir, "runs/x y");
  EXPECT_EQ(c.hidden, (std::vector<int>{32, 16, 8}));
  EXPECT_EQ(c.env.kind, EnvKind::kStacker);
  EXPECT_EQ(c.env.padding_mode, PaddingMode::kPermutation);
  EXPECT_EQ(c.env.reward_mode, RewardMode::kStaggered);
  EXPECT_EQ(c.env.rewards[Signal::kGrasp], 3.5);
  EXPECT_EQ(c.env.rewards[Signal::kTableTouch], -0.25);
  EXPECT_EQ(c.ppo.lr_mode, LrMode::kKlAdaptive);
  EXPECT_EQ(c.ppo.reward_scale, 0.1);
  EXPECT_EQ(c.gae.tau, 0.9);
  ASSERT_EQ(c.stages.size(), 2u);
  EXPECT_EQ(c.stages[1], (CurriculumStage{1, 3, 150, 100}));
  const std::string written = write_run_config(c);
  EXPECT_EQ(parse_run_config(written), c);
  EXPECT_EQ(write_run_config(parse_run_config(written)), written);
}

TEST(Config, DoublesRoundTripBitwise) {
  CounterRng rng(5, Stream::kTest);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.uniform(-1e3, 1e3) * std::pow(10.0, rng.uniform(-12, 12));
    RunConfig c;
    c.env.rewards[Signal::kGrasp] = v;
    ASSERT_EQ(parse_run_config(write_run_config(c)).env.rewards[Signal::kGrasp], v) << format_double(v);
  }
  EXPECT_EQ(format_double(2.0), "2.0");
  EXPECT_EQ(format_double(0.1), "0.1");
}

TEST(Config, UnknownKeyNamesLine) {
  EXPECT_EQ(error_line("seed = 1\n\n[ppo]\nlr = 0.001\nlearning_rate = 0.1\n"), 5);
  EXPECT_EQ(error_line("bogus = 1\n"), 1);
  EXPECT_EQ(error_line("[nope]\n"), 1);
  EXPECT_EQ(error_line("[rewards]\nbox_on_targett = 1.0\n"), 2);
}

TEST(Config, CorruptTextNamesLine) {
  EXPECT_EQ(error_line("seed = 1\nnum_envs 4\n"), 2);
  EXPECT_EQ(error_line("seed = \"abc\"\n"), 1);
  EXPECT_EQ(error_line("output_dir = \"unterminated\n"), 1);
  EXPECT_EQ(error_line("[network]\nhidden = [64, \n"), 2);
  EXPECT_EQ(error_line("seed = 1\nseed = 2\n"), 2);
  EXPECT_EQ(error_line("[env]\nkind = \"cartpole\"\n"), 2);
}

TEST(Config, RangeChecks) {
  EXPECT_THROW(parse_run_config("num_envs = 0\n"), ConfigError);
  EXPECT_THROW(parse_run_config("[ppo]\nclip_epsilon = -0.1\n"), ConfigError);
  EXPECT_THROW(parse_run_config("[gae]\ngamma = 1.5\n"), ConfigError);
  EXPECT_THROW(parse_run_config("[network]\nhidden = [0]\n"), ConfigError);
}

TEST(Config, MinibatchMustDivideEveryWindow) {
  // 256 x 100 = 25600 is divisible by 1024; 256 x 150 = 38400 is not.
  EXPECT_NO_THROW(parse_run_config("[[stage]]\nobjects = 1\nep_len = 100\nhorizon = 100\n"));
  const std::string bad = "[ppo]\nminibatch_size = 1024\n\n[[stage]]\nobjects = 1\nep_len = 150\nhorizon = 150\n";
  EXPECT_THROW(parse_run_config(bad), ConfigError);
  EXPECT_GT(error_line(bad), 0);
}

TEST(Config, StageObjectsBeyondEnvironment) {
  const std::string t = "[env]\nkind = \"stacker\"\nnum_objects = 2\n\n[[stage]]\nobjects = 3\nep_len = 100\nhorizon = 100\n";
  EXPECT_EQ(error_line(t), 5);
}

TEST(Config, RelativeWallFileResolvesAgainstConfigDir) {
  const auto dir = std::filesystem::temp_directory_path() / "stackrl_cfg_test";
  std::filesystem::create_directories(dir);
  std::string grid;
  for (int y = 0; y < 10; ++y) grid += "..........\n";
  std::ofstream(dir / "walls.txt") << grid;
  std::ofstream(dir / "run.toml") << "[env]\nmaze_wall_file = \"walls.txt\"\n";
  const RunConfig c = load_run_config(dir / "run.toml");
  EXPECT_EQ(std::filesystem::path(c.env.maze_wall_file), dir / "walls.txt");
  std::filesystem::remove_all(dir);
}

TEST(Config, MissingFileIsConfigError) {
  EXPECT_THROW(load_run_config("/nonexistent/stackrl.toml"), ConfigError);
}

}  // namespace
}  // namespace stackrl
