#pragma once

// Scripted indicator sequences with traces worked out by hand from the
// three schedule rules (default thresholds: eps 1e-6, plateau window 0.05,
// three plateau rounds, five learning rates). Nothing here calls the
// state machine.

#include <string>
#include <vector>

#include <fmt/format.h>

#include "coti/schedule.hpp"

namespace scripts {

using coti::ScheduleAction;

struct Script {
  std::string name;
  std::vector<double> phis;
  std::vector<ScheduleAction> actions;
  std::vector<std::size_t> lr;  // lr_index after each step
};

inline constexpr std::size_t kMinIndex = 4;

// Every step falls by `step`: the first value has nothing to compare with,
// then each decline lowers the rate until the minimum, where it stops.
inline Script monotone_decline(int length, double step) {
  Script s{fmt::format("decline/{}x{}", length, step), {}, {}, {}};
  double v = 9.0;
  s.phis.push_back(v);
  s.actions.push_back(ScheduleAction::Continue);
  s.lr.push_back(0);
  for (int i = 1; i <= length; ++i) {
    v -= step;
    s.phis.push_back(v);
    if (static_cast<std::size_t>(i) <= kMinIndex) {
      s.actions.push_back(ScheduleAction::LowerLrAndFreeze);
      s.lr.push_back(static_cast<std::size_t>(i));
    } else {
      s.actions.push_back(ScheduleAction::Stop);
      s.lr.push_back(kMinIndex);
    }
  }
  return s;
}

// `plateau` small rises of 0.01 (every third one asks for a new batch),
// then `rises` jumps of 0.5 that reset the plateau counter.
inline Script plateau_then_improve(int plateau, int rises) {
  Script s{fmt::format("plateau/{}+{}", plateau, rises), {}, {}, {}};
  double v = 4.0;
  s.phis.push_back(v);
  s.actions.push_back(ScheduleAction::Continue);
  s.lr.push_back(0);
  for (int i = 1; i <= plateau; ++i) {
    v += 0.01;
    s.phis.push_back(v);
    s.actions.push_back(i % 3 == 0 ? ScheduleAction::AcquireNewBatch : ScheduleAction::Continue);
    s.lr.push_back(0);
  }
  for (int i = 0; i < rises; ++i) {
    v += 0.5;
    s.phis.push_back(v);
    s.actions.push_back(ScheduleAction::Continue);
    s.lr.push_back(0);
  }
  return s;
}

// Up by `amp`, down by `amp`, repeated. Every down step is a decline; up
// steps continue (a small amplitude counts one plateau round, never three,
// since each decline resets the counter).
inline Script oscillation(int length, double amp) {
  Script s{fmt::format("oscillation/{}x{}", length, amp), {}, {}, {}};
  const double base = 5.0;
  s.phis.push_back(base);
  s.actions.push_back(ScheduleAction::Continue);
  s.lr.push_back(0);
  std::size_t lr = 0;
  for (int i = 1; i <= length; ++i) {
    const bool up = i % 2 == 1;
    s.phis.push_back(up ? base + amp : base);
    if (up) {
      s.actions.push_back(ScheduleAction::Continue);
    } else if (lr < kMinIndex) {
      ++lr;
      s.actions.push_back(ScheduleAction::LowerLrAndFreeze);
    } else {
      s.actions.push_back(ScheduleAction::Stop);
    }
    s.lr.push_back(lr);
  }
  return s;
}

// Identical values: pure plateau.
inline Script flat(int length) {
  Script s{fmt::format("flat/{}", length), {}, {}, {}};
  for (int i = 0; i <= length; ++i) {
    s.phis.push_back(7.5);
    s.actions.push_back(i > 0 && i % 3 == 0 ? ScheduleAction::AcquireNewBatch : ScheduleAction::Continue);
    s.lr.push_back(0);
  }
  return s;
}

inline std::vector<Script> hand_written() {
  using A = ScheduleAction;
  return {
      // A decline inside the plateau window is still a decline.
      {"decline-beats-plateau", {5.0, 5.01, 5.0, 5.02}, {A::Continue, A::Continue, A::LowerLrAndFreeze, A::Continue},
       {0, 0, 1, 1}},
      // Plateau counter resets on improvement and on decline.
      {"reset-paths",
       {3.0, 3.02, 3.04, 3.5, 3.52, 3.54, 3.56, 3.0, 3.01, 3.02, 3.03},
       {A::Continue, A::Continue, A::Continue, A::Continue, A::Continue, A::Continue, A::AcquireNewBatch,
        A::LowerLrAndFreeze, A::Continue, A::Continue, A::AcquireNewBatch},
       {0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1}},
      // Tiny drop under eps is not a decline.
      {"eps-tolerance", {6.0, 6.0 - 5e-7, 6.0 - 1e-6 + 1e-9, 8.0}, {A::Continue, A::Continue, A::Continue, A::Continue},
       {0, 0, 0, 0}},
      // Halving to the bottom, then recovery is allowed to continue.
      {"bottom-then-recover",
       {9.0, 8.0, 7.0, 6.0, 5.0, 4.0, 6.0, 6.03},
       {A::Continue, A::LowerLrAndFreeze, A::LowerLrAndFreeze, A::LowerLrAndFreeze, A::LowerLrAndFreeze, A::Stop,
        A::Continue, A::Continue},
       {0, 1, 2, 3, 4, 4, 4, 4}},
  };
}

inline std::vector<Script> all() {
  std::vector<Script> out;
  for (int len = 1; len <= 8; ++len) {
    out.push_back(monotone_decline(len, 0.01));
    out.push_back(monotone_decline(len, 0.3));
  }
  for (int p = 1; p <= 7; ++p) {
    out.push_back(plateau_then_improve(p, 1));
    out.push_back(plateau_then_improve(p, 2));
  }
  for (int len : {4, 6, 8, 10, 12}) {
    out.push_back(oscillation(len, 0.02));
    out.push_back(oscillation(len, 0.4));
  }
  for (int len = 2; len <= 7; ++len) out.push_back(flat(len));
  for (auto& s : hand_written()) out.push_back(s);
  return out;
}

}  // namespace scripts
