#include "coti/schedule.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "coti/acquisition.hpp"
#include "coti/errors.hpp"

namespace coti {

LearningRateGroup::LearningRateGroup(std::vector<double> rates) : rates_(std::move(rates)) {
  if (rates_.empty()) throw Error(ErrorKind::InvalidConfig, "learning-rate group is empty");
  for (std::size_t i = 0; i < rates_.size(); ++i) {
    if (!(rates_[i] > 0.0) || !std::isfinite(rates_[i])) {
      throw Error(ErrorKind::InvalidConfig, fmt::format("learning rate {} is not positive", rates_[i]));
    }
    if (i > 0 && !(rates_[i] < rates_[i - 1])) {
      throw Error(ErrorKind::InvalidConfig, "learning rates must be strictly decreasing");
    }
  }
}

LearningRateGroup LearningRateGroup::protocol_default() {
  return LearningRateGroup({5e-4, 2.5e-4, 7.5e-5, 5e-5, 2.5e-5});
}

std::string_view to_string(ScheduleAction a) noexcept {
  switch (a) {
    case ScheduleAction::Continue: return "Continue";
    case ScheduleAction::LowerLrAndFreeze: return "LowerLrAndFreeze";
    case ScheduleAction::AcquireNewBatch: return "AcquireNewBatch";
    case ScheduleAction::Stop: return "Stop";
  }
  return "Continue";
}

double indicator(double gamma_aes, double gamma_con) {
  constexpr double k = std::numbers::pi / 20.0;
  return 10.0 * (std::sin(k * gamma_aes) * std::sin(k * gamma_con));
}

double indicator(const Gamma& gamma) { return indicator(gamma.gamma_aes, gamma.gamma_con); }

ScheduleStep step_schedule(const ScheduleState& state, double phi_new, const ScheduleConfig& config,
                           const LearningRateGroup& rates) {
  ScheduleStep out{state, ScheduleAction::Continue};
  auto& s = out.state;
  if (!state.phi_history.empty()) {
    const double last = state.phi_history.back();
    if (phi_new < last - config.eps) {
      if (s.lr_index >= rates.min_index()) {
        out.action = ScheduleAction::Stop;
      } else {
        ++s.lr_index;
        s.freeze_remaining_epochs = config.freeze_epochs;
        s.plateau_count = 0;
        out.action = ScheduleAction::LowerLrAndFreeze;
      }
    } else if (std::abs(phi_new - last) <= config.plateau_delta) {
      ++s.plateau_count;
      if (s.plateau_count >= config.plateau_rounds) {
        s.plateau_count = 0;
        out.action = ScheduleAction::AcquireNewBatch;
      }
    } else {
      s.plateau_count = 0;
    }
  } else {
    s.plateau_count = 0;
  }
  s.phi_history.push_back(phi_new);
  return out;
}

ScheduleState advance_epochs(const ScheduleState& state, int epochs) {
  ScheduleState s = state;
  s.epochs_in_cycle += epochs;
  s.freeze_remaining_epochs = std::max(0, s.freeze_remaining_epochs - epochs);
  return s;
}

ScheduleState begin_cycle(std::size_t lr_index) {
  ScheduleState s;
  s.lr_index = lr_index;
  return s;
}

nlohmann::json to_json(const ScheduleState& s) {
  return {{"lr_index", s.lr_index},
          {"phi_history", s.phi_history},
          {"freeze_remaining_epochs", s.freeze_remaining_epochs},
          {"plateau_count", s.plateau_count},
          {"epochs_in_cycle", s.epochs_in_cycle}};
}

ScheduleState schedule_state_from_json(const nlohmann::json& j) {
  ScheduleState s;
  s.lr_index = j.at("lr_index").get<std::size_t>();
  s.phi_history = j.at("phi_history").get<std::vector<double>>();
  s.freeze_remaining_epochs = j.at("freeze_remaining_epochs").get<int>();
  s.plateau_count = j.at("plateau_count").get<int>();
  s.epochs_in_cycle = j.at("epochs_in_cycle").get<int>();
  return s;
}

}  // namespace coti
