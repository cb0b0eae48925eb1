#include "stackrl/commands.hpp"

#include <cstdlib>
#include <ostream>
#include <sstream>

#include "stackrl/checkpoint.hpp"
#include "stackrl/errors.hpp"

namespace stackrl {
namespace {

constexpr std::uint64_t kEvalSeedSalt = 0x6576616c2d636b70ULL;

}  // namespace

std::filesystem::path resolve_output_dir(const RunConfig& cfg) {
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return cfg.output_dir;
}

TrainSummary cmd_train(const std::filesystem::path& config_path, std::ostream& out) {
  const RunConfig cfg = load_run_config(config_path);
  const std::filesystem::path dir = resolve_output_dir(cfg);
  Trainer trainer(cfg, dir);
  const TrainSummary s = trainer.run();
  out << "iterations " << s.iterations << ", steps " << s.global_steps << ", stage "
      << s.final_stage << "/" << cfg.stages.size() - 1 << "\n";
  out << "accuracy " << s.final_accuracy << ", mean episode length " << s.mean_episode_length
      << "\n";
  if (s.solved_at_steps) out << "solved at step " << *s.solved_at_steps << "\n";
  else out << "not solved within the budget\n";
  out << "outputs in " << dir.string() << "\n";
  return s;
}

EvalResult cmd_eval(const std::filesystem::path& checkpoint_path, int episodes, std::ostream& out) {
  if (episodes < 1) throw ConfigError("--episodes must be >= 1");
  const Checkpoint ckpt = load_checkpoint(checkpoint_path);
  const RunConfig cfg = parse_run_config(ckpt.config_text);
  if (ckpt.stage < 0 || ckpt.stage >= static_cast<int>(cfg.stages.size())) {
    throw RuntimeFault("checkpoint stage " + std::to_string(ckpt.stage) + " is outside its schedule");
  }
  const EnvConfig env = apply_stage(cfg.stages[static_cast<std::size_t>(ckpt.stage)], cfg.env,
                                    cfg.ppo, ckpt.lr).env;
  VecEnv envs(env, cfg.num_envs, cfg.seed ^ kEvalSeedSalt, cfg.shards);
  if (network_shape(cfg, envs.observation_size(), envs.action_size(), envs.discrete()) !=
      ckpt.params.shape()) {
    throw RuntimeFault("checkpoint network does not match its environment");
  }
  auto streams = make_action_streams(cfg.seed ^ kEvalSeedSalt, cfg.num_envs, Stream::kEval);
  const EvalResult r = evaluate_policy(ckpt.params, envs, episodes, true, streams);
  out << "success_rate " << r.success_rate << " over " << r.episodes
      << " episodes, mean episode length " << r.mean_episode_length << "\n";
  return r;
}

std::vector<SweepRow> run_horizon_sweep(const RunConfig& cfg, const std::vector<int>& horizons,
                                        int seeds) {
  if (horizons.empty()) throw ConfigError("--horizons needs at least one value");
  if (seeds < 1) throw ConfigError("--seeds must be >= 1");
  std::vector<SweepRow> rows;
  for (int h : horizons) {
    if (h < 1) throw ConfigError("horizon values must be >= 1");
    for (int k = 0; k < seeds; ++k) {
      RunConfig run = cfg;
      run.seed = cfg.seed + static_cast<std::uint64_t>(k);
      run.stages = {CurriculumStage{0, cfg.stages.front().active_objects, h, h}};
      run.stop_on_solve = true;
      Trainer trainer(run);
      const TrainSummary s = trainer.run();
      rows.push_back(SweepRow{h, run.seed, s.solved_at_steps.value_or(s.global_steps),
                              s.solved_at_steps.has_value(), s.final_accuracy});
    }
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream o;
  o << "horizon,seed,steps_to_solve,solved,final_accuracy\n";
  for (const auto& r : rows) {
    o << r.horizon << "," << r.seed << "," << r.steps_to_solve << "," << (r.solved ? 1 : 0) << ","
      << format_double(r.final_accuracy) << "\n";
  }
  return o.str();
}

std::vector<SweepRow> cmd_sweep_horizon(const std::filesystem::path& config_path,
                                        const std::vector<int>& horizons, int seeds,
                                        std::ostream& out) {
  const RunConfig cfg = load_run_config(config_path);
  if (cfg.env.kind != EnvKind::kMaze) throw ConfigError("sweep-horizon expects a maze config");
  const std::vector<SweepRow> rows = run_horizon_sweep(cfg, horizons, seeds);
  const std::string csv = sweep_csv(rows);
  const std::filesystem::path dir = resolve_output_dir(cfg);
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "sweep_horizon.csv", std::ios::binary | std::ios::trunc) << csv;
  out << csv;
  return rows;
}

void cmd_inspect(const std::filesystem::path& checkpoint_path, std::ostream& out) {
  const CheckpointHeader h = read_checkpoint_header(checkpoint_path);
  out << "format version " << h.version << "\n";
  for (const auto& [k, v] : h.entries) {
    if (k == "config") continue;
    out << k << " = " << v << "\n";
  }
  // Shapes follow from the header alone.
  NetShape shape;
  shape.head = h.get("head") == "gaussian" ? PolicyHead::kGaussian : PolicyHead::kCategorical;
  shape.obs_dim = std::stoi(h.get("obs_dim"));
  shape.action_dim = std::stoi(h.get("action_dim"));
  const std::string hidden = h.get("hidden");
  std::stringstream ss(hidden);
  for (std::string tok; std::getline(ss, tok, ',');) shape.hidden.push_back(std::stoi(tok));
  NetParams p = NetParams::zeros(shape);
  out << "arrays:\n";
  int in = shape.obs_dim;
  for (std::size_t i = 0; i < p.layers.size(); ++i) {
    out << "  layer" << i << ".weight " << in << "x" << p.layers[i].weight.cols() << "\n";
    out << "  layer" << i << ".bias " << p.layers[i].bias.size() << "\n";
    in = static_cast<int>(p.layers[i].weight.cols());
  }
  out << "  policy.weight " << p.policy.weight.rows() << "x" << p.policy.weight.cols() << "\n";
  out << "  policy.bias " << p.policy.bias.size() << "\n";
  out << "  value.weight " << p.value.weight.rows() << "x" << p.value.weight.cols() << "\n";
  out << "  value.bias " << p.value.bias.size() << "\n";
  if (shape.head == PolicyHead::kGaussian) out << "  log_sigma " << p.log_sigma.size() << "\n";
  out << "  (parameters, then first and second Adam moments, same order)\n";
}

}  // namespace stackrl
