#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace coti {

struct Gamma;

// Strictly decreasing learning rates; index 0 is the largest.
class LearningRateGroup {
 public:
  explicit LearningRateGroup(std::vector<double> rates);

  // 5e-4, 2.5e-4, 7.5e-5, 5e-5, 2.5e-5
  static LearningRateGroup protocol_default();

  std::size_t size() const noexcept { return rates_.size(); }
  double operator[](std::size_t i) const { return rates_.at(i); }
  std::size_t min_index() const noexcept { return rates_.size() - 1; }
  const std::vector<double>& rates() const noexcept { return rates_; }

  bool operator==(const LearningRateGroup&) const = default;

 private:
  std::vector<double> rates_;
};

struct ScheduleState {
  std::size_t lr_index = 0;
  std::vector<double> phi_history;
  int freeze_remaining_epochs = 0;
  int plateau_count = 0;
  int epochs_in_cycle = 0;

  bool operator==(const ScheduleState&) const = default;
};

enum class ScheduleAction { Continue, LowerLrAndFreeze, AcquireNewBatch, Stop };

std::string_view to_string(ScheduleAction a) noexcept;

struct ScheduleConfig {
  double eps = 1e-6;
  double plateau_delta = 0.05;
  int plateau_rounds = 3;
  int eval_interval_epochs = 100;
  int freeze_epochs = 100;
};

// 10 sin(pi/20 g_aes) sin(pi/20 g_con), in [0, 10].
double indicator(double gamma_aes, double gamma_con);
double indicator(const Gamma& gamma);

struct ScheduleStep {
  ScheduleState state;
  ScheduleAction action;
};

// Decline rule first, then plateau, then improvement. phi_new is always
// appended to the history.
ScheduleStep step_schedule(const ScheduleState& state, double phi_new, const ScheduleConfig& config,
                           const LearningRateGroup& rates);

// Accounts for `epochs` of training: counts them into the cycle and burns
// down any active freeze.
ScheduleState advance_epochs(const ScheduleState& state, int epochs);

// Fresh state for a new cycle starting at `lr_index`.
ScheduleState begin_cycle(std::size_t lr_index);

nlohmann::json to_json(const ScheduleState& s);
ScheduleState schedule_state_from_json(const nlohmann::json& j);

}  // namespace coti
