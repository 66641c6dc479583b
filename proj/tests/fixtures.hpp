#pragma once

#include "cuspgrowth/experiment.hpp"

namespace fixtures {

// Desk-scale built model with alpha = 1, beta = 2.5, eta = 0.05.
inline const cuspgrowth::IntervalSchedule& desk_schedule() {
  static const auto s = cuspgrowth::resolve_schedule(cuspgrowth::ExperimentConfig{});
  return s;
}

inline const cuspgrowth::CuspModel& desk_model() {
  static const auto m = cuspgrowth::build_model(cuspgrowth::ExperimentConfig{});
  return m;
}

}  // namespace fixtures
