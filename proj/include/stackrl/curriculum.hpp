#ifndef STACKRL_CURRICULUM_HPP_
#define STACKRL_CURRICULUM_HPP_

#include <optional>
#include <vector>

#include "stackrl/env_types.hpp"
#include "stackrl/ppo.hpp"

namespace stackrl {

struct CurriculumStage {
  int index = 0;
  int active_objects = 1;
  int max_episode_length = 100;
  int horizon_length = 100;

  friend bool operator==(const CurriculumStage&, const CurriculumStage&) = default;
};

// Throws ConfigError unless the schedule is non-empty, lengths are >= 1 and
// active objects never decrease. Indices are renumbered 0..n-1.
void validate_schedule(std::vector<CurriculumStage>& schedule);

inline constexpr int kDefaultAccuracyWindow = 200;

// Success flags of the last K finished episodes.
class AccuracyTracker {
 public:
  explicit AccuracyTracker(int window = kDefaultAccuracyWindow);

  void record(bool success);
  void clear();

  int window() const { return static_cast<int>(ring_.size()); }
  int count() const { return count_; }
  bool full() const { return count_ == window(); }
  int successes() const { return successes_; }
  // successes / recorded entries; 0 when nothing has been recorded.
  double ratio() const;
  // Defined only once the window is full.
  std::optional<double> accuracy() const;

 private:
  std::vector<char> ring_;
  int head_ = 0;
  int count_ = 0;
  int successes_ = 0;
};

void record_outcome(AccuracyTracker& tracker, bool success);

// Advances by one stage iff the tracker is full and accuracy is strictly above
// 0.90; clears the tracker on advance. The last stage never advances.
int maybe_advance(AccuracyTracker& tracker, const std::vector<CurriculumStage>& schedule,
                  int current);

inline constexpr double kAdvanceThreshold = 0.90;

struct StageApplication {
  EnvConfig env;
  PpoConfig ppo;
  // Learning rate to continue with after the stage change.
  double lr = 0.0;
};

// Active objects and episode length go into the environment config. The
// horizon is read by the trainer directly from the stage. With
// lr_reset_on_stage the configured initial rate is restored.
StageApplication apply_stage(const CurriculumStage& stage, const EnvConfig& env,
                             const PpoConfig& ppo, double current_lr);

}  // namespace stackrl

#endif  // STACKRL_CURRICULUM_HPP_
