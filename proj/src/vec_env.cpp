#include "stackrl/vec_env.hpp"

#include <tbb/blocked_range.h>
#include <tbb/parallel_for.h>

#include <exception>
#include <mutex>
#include <string>

#include "stackrl/errors.hpp"

namespace stackrl {

VecEnv::VecEnv(const EnvConfig& cfg, int num_envs, std::uint64_t seed, int shards)
    : cfg_(cfg), shards_(shards) {
  if (num_envs < 1) throw ConfigError("vectorized environment needs at least one instance");
  set_shards(shards);
  envs_.reserve(static_cast<std::size_t>(num_envs));
  for (int i = 0; i < num_envs; ++i) {
    envs_.push_back(make_environment(cfg, CounterRng(seed, Stream::kEnvReset,
                                                     static_cast<std::uint64_t>(i))));
  }
  obs_dim_ = envs_.front()->observation_size();
  episode_steps_.assign(static_cast<std::size_t>(num_envs), 0);
  episode_return_.assign(static_cast<std::size_t>(num_envs), 0.0);
  obs_ = Mat(num_envs, obs_dim_);
  for (int i = 0; i < num_envs; ++i) {
    envs_[static_cast<std::size_t>(i)]->observe({obs_.row(i).data(), static_cast<std::size_t>(obs_dim_)});
  }
}

VecEnv::VecEnv(const VecEnv& other)
    : cfg_(other.cfg_),
      episode_steps_(other.episode_steps_),
      episode_return_(other.episode_return_),
      obs_(other.obs_),
      obs_dim_(other.obs_dim_),
      shards_(other.shards_),
      arena_(other.arena_) {
  envs_.reserve(other.envs_.size());
  for (const auto& e : other.envs_) envs_.push_back(e->clone());
}

VecEnv& VecEnv::operator=(const VecEnv& other) {
  if (this != &other) *this = VecEnv(other);
  return *this;
}

void VecEnv::set_shards(int shards) {
  if (shards < 1) throw ConfigError("shard count must be >= 1");
  shards_ = shards;
  arena_ = shards > 1 ? std::make_shared<tbb::task_arena>(shards) : nullptr;
}

template <class Fn>
void VecEnv::for_each_shard(Fn&& fn) {
  const int n = size();
  if (shards_ == 1) {
    fn(0, n);
    return;
  }
  // Static contiguous partition: shard s owns [s*n/S, (s+1)*n/S).
  std::exception_ptr first_error;
  std::mutex error_mutex;
  arena_->execute([&] {
    tbb::parallel_for(0, shards_, [&](int s) {
      const int lo = static_cast<int>(static_cast<long long>(s) * n / shards_);
      const int hi = static_cast<int>(static_cast<long long>(s + 1) * n / shards_);
      try {
        fn(lo, hi);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  });
  if (first_error) std::rethrow_exception(first_error);
}

VecStep VecEnv::step(const Mat& actions) {
  const int n = size();
  if (actions.rows() != n) throw ConfigError("vec_step: expected one action row per environment");
  VecStep out;
  out.obs = Mat(n, obs_dim_);
  out.terminal_obs = Mat(n, obs_dim_);
  out.outcomes.resize(static_cast<std::size_t>(n));
  out.episode_lengths.assign(static_cast<std::size_t>(n), 0);
  out.episode_returns.assign(static_cast<std::size_t>(n), 0.0);

  for_each_shard([&](int lo, int hi) {
    for (int i = lo; i < hi; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      Environment& e = *envs_[idx];
      StepOutcome o;
      try {
        o = e.step({actions.row(i).data(), static_cast<std::size_t>(actions.cols())});
      } catch (const std::exception& ex) {
        throw RuntimeFault("environment " + std::to_string(i) + " faulted: " + ex.what());
      }
      episode_steps_[idx] += 1;
      episode_return_[idx] += o.reward;
      std::span<double> row(out.obs.row(i).data(), static_cast<std::size_t>(obs_dim_));
      e.observe(row);
      if (o.done) {
        out.terminal_obs.row(i) = out.obs.row(i);
        out.episode_lengths[idx] = episode_steps_[idx];
        out.episode_returns[idx] = episode_return_[idx];
        episode_steps_[idx] = 0;
        episode_return_[idx] = 0.0;
        e.reset();
        e.observe(row);
      }
      out.outcomes[idx] = o;
    }
  });
  obs_ = out.obs;
  return out;
}

void VecEnv::reconfigure(const EnvConfig& cfg) {
  cfg.validate();
  cfg_ = cfg;
  for (auto& e : envs_) e->configure(cfg);
  obs_dim_ = envs_.front()->observation_size();
  obs_.resize(size(), obs_dim_);
  reset_all();
}

void VecEnv::reset_all() {
  for (int i = 0; i < size(); ++i) {
    auto& e = *envs_[static_cast<std::size_t>(i)];
    e.reset();
    e.observe({obs_.row(i).data(), static_cast<std::size_t>(obs_dim_)});
    episode_steps_[static_cast<std::size_t>(i)] = 0;
    episode_return_[static_cast<std::size_t>(i)] = 0.0;
  }
}

}  // namespace stackrl
