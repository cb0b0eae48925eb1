#include <CLI11.hpp>

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "stackrl/commands.hpp"
#include "stackrl/errors.hpp"

namespace {

std::vector<int> parse_horizons(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  for (std::string tok; std::getline(ss, tok, ',');) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      out.push_back(v);
    } catch (const std::exception&) {
      throw stackrl::ConfigError("--horizons: '" + tok + "' is not an integer");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stackrl: curriculum PPO trainer for the maze and stacker tasks"};
  app.require_subcommand(1);

  std::string config_path;
  std::string ckpt_path;
  int episodes = 100;
  std::string horizons = "10,20,40,60,100,150";
  int seeds = 3;

  auto* train = app.add_subcommand("train", "train from a config file");
  train->add_option("config", config_path, "run config (.toml)")->required();

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint with the mode action");
  eval->add_option("checkpoint", ckpt_path, "checkpoint file")->required();
  eval->add_option("--episodes", episodes, "episodes to evaluate");

  auto* sweep = app.add_subcommand("sweep-horizon", "steps-to-solve per horizon on the maze");
  sweep->add_option("config", config_path, "maze run config")->required();
  sweep->add_option("--horizons", horizons, "comma-separated horizon lengths");
  sweep->add_option("--seeds", seeds, "seeds per horizon");

  auto* inspect = app.add_subcommand("inspect", "print a checkpoint header");
  inspect->add_option("checkpoint", ckpt_path, "checkpoint file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*train) {
      stackrl::cmd_train(config_path, std::cout);
    } else if (*eval) {
      stackrl::cmd_eval(ckpt_path, episodes, std::cout);
    } else if (*sweep) {
      stackrl::cmd_sweep_horizon(config_path, parse_horizons(horizons), seeds, std::cout);
    } else if (*inspect) {
      stackrl::cmd_inspect(ckpt_path, std::cout);
    }
  } catch (const stackrl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
