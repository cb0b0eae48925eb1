#include "stackrl/trainer.hpp"

#include <chrono>
#include <cmath>
#include <json.hpp>

#include "stackrl/errors.hpp"

namespace stackrl {
namespace {

using Json = nlohmann::ordered_json;

// Keeps the reset streams of evaluation environments apart from training.
constexpr std::uint64_t kEvalSeedSalt = 0x6576616c75617465ULL;

EnvConfig stage_env(const RunConfig& cfg) {
  return apply_stage(cfg.stages.front(), cfg.env, cfg.ppo, cfg.ppo.lr).env;
}

}  // namespace

std::string metrics_line(const IterationRecord& r) {
  Json j;
  j["iteration"] = r.iteration;
  j["global_steps"] = r.global_steps;
  j["stage_index"] = r.stage_index;
  j["mean_reward"] = r.metrics.mean_reward;
  Json signals = Json::object();
  for (std::size_t k = 0; k < kNumSignals; ++k) {
    signals[std::string(signal_name(static_cast<Signal>(k)))] = r.metrics.signal_means[k];
  }
  j["signals"] = signals;
  j["episodes"] = r.metrics.episodes;
  j["success_rate"] = r.metrics.success_rate;
  j["subgoal_rates"] = r.metrics.subgoal_rates;
  j["mean_episode_length"] = r.metrics.mean_episode_length;
  j["accuracy"] = r.accuracy;
  j["accuracy_full"] = r.accuracy_full;
  j["advanced"] = r.advanced;
  j["solved"] = r.solved;
  j["kl"] = r.metrics.kl;
  j["lr"] = r.metrics.lr;
  j["kl_threshold"] = r.kl_threshold;
  j["policy_loss"] = r.metrics.policy_loss;
  j["value_loss"] = r.metrics.value_loss;
  j["entropy"] = r.metrics.entropy;
  j["clip_fraction"] = r.metrics.clip_fraction;
  return j.dump();
}

std::string timing_line(const IterationRecord& r) {
  Json j;
  j["iteration"] = r.iteration;
  j["wall_ms"] = r.wall_ms;
  return j.dump();
}

NetShape network_shape(const RunConfig& cfg, int obs_dim, int action_dim, bool discrete) {
  return NetShape{obs_dim, cfg.hidden, action_dim,
                  discrete ? PolicyHead::kCategorical : PolicyHead::kGaussian};
}

Trainer::Trainer(const RunConfig& cfg, std::filesystem::path output_dir)
    : cfg_(cfg),
      out_dir_(std::move(output_dir)),
      env_cfg_((validate(cfg), stage_env(cfg))),
      envs_(env_cfg_, cfg.num_envs, cfg.seed, cfg.shards),
      params_(init_params(network_shape(cfg, envs_.observation_size(), envs_.action_size(),
                                        envs_.discrete()),
                          cfg.seed)),
      adam_(AdamState::zeros_like(params_)),
      action_streams_(make_action_streams(cfg.seed, cfg.num_envs)),
      shuffle_rng_(cfg.seed, Stream::kShuffle),
      tracker_(cfg.eval_switching ? cfg.eval_episodes : cfg.accuracy_window),
      lr_(cfg.ppo.lr) {
  if (cfg_.eval_switching) {
    eval_envs_.emplace(env_cfg_, cfg.num_envs, cfg.seed ^ kEvalSeedSalt, cfg.shards);
  }
  if (!out_dir_.empty()) {
    std::filesystem::create_directories(out_dir_);
    std::ofstream(out_dir_ / "config.toml", std::ios::binary | std::ios::trunc)
        << write_run_config(cfg_);
    metrics_.open(out_dir_ / "metrics.jsonl", std::ios::binary | std::ios::trunc);
    timing_.open(out_dir_ / "timing.jsonl", std::ios::binary | std::ios::trunc);
    if (!metrics_ || !timing_) {
      throw RuntimeFault("cannot write metrics under '" + out_dir_.string() + "'");
    }
  }
}

bool Trainer::budget_left() const {
  const std::int64_t window =
      static_cast<std::int64_t>(cfg_.stages[static_cast<std::size_t>(stage_)].horizon_length) *
      cfg_.num_envs;
  return global_steps_ + window <= cfg_.total_steps;
}

void Trainer::record_eval_outcomes() {
  eval_envs_->reset_all();
  auto streams = make_action_streams(cfg_.seed ^ kEvalSeedSalt, cfg_.num_envs, Stream::kEval);
  const EvalResult r = evaluate_policy(params_, *eval_envs_, cfg_.eval_episodes, true, streams);
  const auto wins = static_cast<int>(std::lround(r.success_rate * r.episodes));
  tracker_.clear();
  for (int i = 0; i < r.episodes; ++i) tracker_.record(i < wins);
}

IterationRecord Trainer::iterate() {
  const auto t0 = std::chrono::steady_clock::now();
  const CurriculumStage& stage = cfg_.stages[static_cast<std::size_t>(stage_)];
  const CollectOptions opts{cfg_.gae.gamma, cfg_.bootstrap_on_timeout, cfg_.ppo.reward_scale};

  const HorizonBuffer buf = collect_horizon(params_, envs_, stage.horizon_length, opts, action_streams_);

  IterationRecord rec;
  rec.iteration = iteration_;
  rec.stage_index = stage_;
  rec.kl_threshold = cfg_.ppo.kl_threshold;
  rec.metrics = train_iteration(params_, adam_, buf, cfg_.ppo, cfg_.gae, lr_, shuffle_rng_,
                                stage.active_objects);
  global_steps_ += buf.size();
  rec.global_steps = global_steps_;

  if (eval_envs_) {
    record_eval_outcomes();
  } else {
    for (const auto& e : buf.episodes) tracker_.record(e.success);
  }
  rec.accuracy = tracker_.ratio();
  rec.accuracy_full = tracker_.full();

  const bool final_stage = stage_ + 1 == static_cast<int>(cfg_.stages.size());
  if (final_stage && !solved_at_ && tracker_.full() && tracker_.ratio() > kAdvanceThreshold) {
    solved_at_ = global_steps_;
  }
  rec.solved = solved_at_.has_value();

  const int next = maybe_advance(tracker_, cfg_.stages, stage_);
  if (next != stage_) {
    const StageApplication app = apply_stage(cfg_.stages[static_cast<std::size_t>(next)], env_cfg_, cfg_.ppo, lr_);
    env_cfg_ = app.env;
    lr_ = app.lr;
    envs_.reconfigure(env_cfg_);
    if (eval_envs_) eval_envs_->reconfigure(env_cfg_);
    stage_ = next;
    rec.advanced = true;
    summary_.advance_steps.push_back(global_steps_);
  }

  ++iteration_;
  summary_.iterations = iteration_;
  summary_.global_steps = global_steps_;
  summary_.final_stage = stage_;
  summary_.final_accuracy = rec.accuracy;
  summary_.mean_episode_length = rec.metrics.mean_episode_length;
  summary_.solved = rec.solved;
  summary_.solved_at_steps = solved_at_;

  rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  if (metrics_.is_open()) {
    metrics_ << metrics_line(rec) << '\n';
    metrics_.flush();
    timing_ << timing_line(rec) << '\n';
    timing_.flush();
    if (cfg_.checkpoint_every > 0 && iteration_ % cfg_.checkpoint_every == 0) {
      write_checkpoint(out_dir_ / ("checkpoint_" + std::to_string(iteration_) + ".stkl"));
    }
  }
  return rec;
}

TrainSummary Trainer::run(const std::function<bool(const IterationRecord&)>& stop) {
  while (budget_left()) {
    const IterationRecord rec = iterate();
    if (cfg_.stop_on_solve && rec.solved) break;
    if (stop && stop(rec)) break;
  }
  if (!out_dir_.empty()) write_checkpoint(out_dir_ / "final.stkl");
  return summary_;
}

Checkpoint Trainer::checkpoint() const {
  return Checkpoint{params_, adam_, stage_, lr_, global_steps_, iteration_, write_run_config(cfg_)};
}

void Trainer::write_checkpoint(const std::filesystem::path& path) const {
  save_checkpoint(checkpoint(), path);
}

}  // namespace stackrl
