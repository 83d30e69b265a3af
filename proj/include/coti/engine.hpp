#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "coti/acquisition.hpp"
#include "coti/backend.hpp"
#include "coti/config.hpp"
#include "coti/scoring_system.hpp"
#include "coti/state.hpp"
#include "coti/synthetic.hpp"

namespace coti {

struct TraceEntry {
  int cycle = 0;
  int epoch = 0;  // cumulative epochs of the embedding
  double phi = 0.0;
  double learning_rate = 0.0;
  ScheduleAction action = ScheduleAction::Continue;
  bool accepted = false;
};

struct CycleRecord {
  int cycle = 0;  // 1-based
  Gamma gamma;    // of the embedding entering the cycle, used for acquisition
  double phi_start = 0.0;
  double phi_end = 0.0;
  // Accepted-embedding indicator values in order, starting with phi_start.
  std::vector<double> accepted_phi;
  std::vector<std::string> selected;
  std::size_t training_size = 0;
  std::size_t web_size = 0;
  ScheduleAction final_action = ScheduleAction::Continue;
  std::vector<TraceEntry> trace;
};

enum class RunOutcome { completed, converged, exhausted_pool };
std::string_view to_string(RunOutcome o) noexcept;

struct RunReport {
  std::vector<CycleRecord> cycles;
  RunOutcome outcome = RunOutcome::completed;
  std::string note;
};

struct RunResult {
  Embedding embedding;
  RunReport report;
  CycleState final_state;
};

// Collaborators of a run. The similar-category reservoir is static input
// from which D_SI is reselected each cycle.
struct EngineContext {
  TrainerBackend& backend;
  ScoringSystem& scorers;
  const Pool& similar_reservoir;
  const RunConfig& config;
};

// Initial X_T samples lacking a label get 10; the embedding starts at
// the X_T centroid.
CycleState initial_state(const RunConfig& config, const Pool& web, const Pool& initial);

CycleState run_cycle(const CycleState& state, const EngineContext& ctx, CycleRecord* record = nullptr);

RunResult run(const CycleState& initial, const EngineContext& ctx);

// Builds pools, backend and scorers from the config (synthetic world or
// manifests plus synthetic trainer) and runs.
RunResult run_from_config(const RunConfig& config);

// Built-in scorers, or a handshaken plugin for "plugin:<command>".
std::unique_ptr<ScoringSystem> make_scorers(const RunConfig& config);

// Same as run_from_config with pools and world already built.
RunResult run_with_pools(const RunConfig& config, const SyntheticWorld& world, const Pool& web, const Pool& initial,
                         const Pool& similar);

}  // namespace coti
