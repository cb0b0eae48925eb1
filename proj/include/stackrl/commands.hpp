#ifndef STACKRL_COMMANDS_HPP_
#define STACKRL_COMMANDS_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "stackrl/config.hpp"
#include "stackrl/rollout.hpp"
#include "stackrl/trainer.hpp"

namespace stackrl {

inline constexpr const char* kOutputDirEnv = "STACKRL_OUTPUT_DIR";

// Output directory after applying the environment override.
std::filesystem::path resolve_output_dir(const RunConfig& cfg);

TrainSummary cmd_train(const std::filesystem::path& config_path, std::ostream& out);

// Deterministic (mode) evaluation of a checkpoint in the stage it was saved at.
EvalResult cmd_eval(const std::filesystem::path& checkpoint_path, int episodes, std::ostream& out);

struct SweepRow {
  int horizon = 0;
  std::uint64_t seed = 0;
  std::int64_t steps_to_solve = 0;  // budget used when unsolved
  bool solved = false;
  // Tracker accuracy when the run stopped.
  double final_accuracy = 0.0;
};

// One single-stage run per (horizon, seed) with episode length equal to the
// horizon. Seeds are cfg.seed, cfg.seed + 1, ...
std::vector<SweepRow> run_horizon_sweep(const RunConfig& cfg, const std::vector<int>& horizons,
                                        int seeds);
std::string sweep_csv(const std::vector<SweepRow>& rows);
std::vector<SweepRow> cmd_sweep_horizon(const std::filesystem::path& config_path,
                                        const std::vector<int>& horizons, int seeds,
                                        std::ostream& out);

// Prints the checkpoint header and array shapes without reading the payload.
void cmd_inspect(const std::filesystem::path& checkpoint_path, std::ostream& out);

}  // namespace stackrl

#endif  // STACKRL_COMMANDS_HPP_
