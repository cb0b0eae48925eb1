#include "stackrl/curriculum.hpp"

#include <algorithm>
#include <string>

#include "stackrl/errors.hpp"

namespace stackrl {

void validate_schedule(std::vector<CurriculumStage>& schedule) {
  if (schedule.empty()) throw ConfigError("curriculum needs at least one stage");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    CurriculumStage& s = schedule[i];
    s.index = static_cast<int>(i);
    const std::string where = "stage " + std::to_string(i) + ": ";
    if (s.active_objects < 1) throw ConfigError(where + "objects must be >= 1");
    if (s.max_episode_length < 1) throw ConfigError(where + "ep_len must be >= 1");
    if (s.horizon_length < 1) throw ConfigError(where + "horizon must be >= 1");
    if (i > 0 && s.active_objects < schedule[i - 1].active_objects) {
      throw ConfigError(where + "object count may not decrease");
    }
  }
}

AccuracyTracker::AccuracyTracker(int window) {
  if (window < 1) throw ConfigError("accuracy window must be >= 1");
  ring_.assign(static_cast<std::size_t>(window), 0);
}

void AccuracyTracker::record(bool success) {
  auto& slot = ring_[static_cast<std::size_t>(head_)];
  if (full()) successes_ -= slot;
  else ++count_;
  slot = success ? 1 : 0;
  successes_ += slot;
  head_ = (head_ + 1) % window();
}

void AccuracyTracker::clear() {
  std::fill(ring_.begin(), ring_.end(), 0);
  head_ = count_ = successes_ = 0;
}

double AccuracyTracker::ratio() const {
  return count_ == 0 ? 0.0 : static_cast<double>(successes_) / count_;
}

std::optional<double> AccuracyTracker::accuracy() const {
  if (!full()) return std::nullopt;
  return ratio();
}

void record_outcome(AccuracyTracker& tracker, bool success) { tracker.record(success); }

int maybe_advance(AccuracyTracker& tracker, const std::vector<CurriculumStage>& schedule,
                  int current) {
  if (current < 0 || current >= static_cast<int>(schedule.size())) {
    throw ConfigError("stage index " + std::to_string(current) + " outside the schedule");
  }
  if (current + 1 >= static_cast<int>(schedule.size())) return current;
  const auto acc = tracker.accuracy();
  if (!acc || !(*acc > kAdvanceThreshold)) return current;
  tracker.clear();
  return current + 1;
}

StageApplication apply_stage(const CurriculumStage& stage, const EnvConfig& env,
                             const PpoConfig& ppo, double current_lr) {
  const int capacity = env.kind == EnvKind::kMaze ? 1 : env.num_objects;
  if (stage.active_objects > capacity) {
    throw ConfigError("stage " + std::to_string(stage.index) + " needs " +
                      std::to_string(stage.active_objects) + " objects but the environment has " +
                      std::to_string(capacity));
  }
  StageApplication out{env, ppo, current_lr};
  out.env.active_objects = stage.active_objects;
  out.env.max_episode_length = stage.max_episode_length;
  if (ppo.lr_reset_on_stage) out.lr = ppo.lr;
  out.env.validate();
  return out;
}

}  // namespace stackrl
