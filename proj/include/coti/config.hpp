#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "coti/acquisition.hpp"
#include "coti/schedule.hpp"
#include "coti/scorers.hpp"
#include "coti/scoring_system.hpp"
#include "coti/synthetic.hpp"
#include "json.hpp"

namespace coti {

// Which samples a cycle acquires.
enum class AcquisitionStrategy {
  coti,             // integrated score
  rand,             // uniform random
  full,             // whole web pool in the first cycle
  aesthetic_only,   // top-B by aesthetic score
  concept_only,     // top-B by concept score
  generation_proxy, // top-B by mean distance to the embedding's generations
};

std::string_view to_string(AcquisitionStrategy s) noexcept;
AcquisitionStrategy acquisition_strategy_from_string(std::string_view s);

enum class ScheduleMode { dynamic, fixed };
std::string_view to_string(ScheduleMode m) noexcept;
ScheduleMode schedule_mode_from_string(std::string_view s);

// main: evaluate every eval_interval epochs and drive step_schedule.
// appendix: sub-cycles of subcycle_epochs with a checkpoint every
// checkpoint_epochs; the best checkpoint decides whether the rate drops.
enum class SchedulePreset { main, appendix };
std::string_view to_string(SchedulePreset p) noexcept;
SchedulePreset schedule_preset_from_string(std::string_view s);

struct AppendixSchedule {
  int subcycle_epochs = 1000;
  int checkpoint_epochs = 50;
  int max_subcycles = 20;

  bool operator==(const AppendixSchedule&) const = default;
};

// Where pools come from. With synthetic=false the pools are read from
// manifests of dimension world.dimension; the trainer and generator
// parameters of `world` are used either way.
struct DataConfig {
  bool synthetic = true;
  WorldConfig world;
  std::string web_manifest;
  std::string initial_manifest;
  std::string similar_manifest;

  bool operator==(const DataConfig&) const = default;
};

struct RunConfig {
  std::size_t budget = 10;
  int cycles = 20;
  LearningRateGroup rates = LearningRateGroup::protocol_default();
  ScheduleConfig schedule;
  SchedulePreset preset = SchedulePreset::main;
  AppendixSchedule appendix;
  ScheduleMode schedule_mode = ScheduleMode::dynamic;
  int fixed_epochs_per_cycle = 1000;
  int max_evals_per_cycle = 60;

  AcquisitionStrategy strategy = AcquisitionStrategy::coti;
  MatcherKind matcher = MatcherKind::min_cosine;
  bool strict_paper_normalization = false;
  IntegrationVariant variant = IntegrationVariant::linear;
  double aesthetic_lambda = 1.0;
  double similar_label = 5.0;
  // "builtin" or "plugin:<command line>"
  std::string scorer = "builtin";
  int plugin_timeout_ms = 5000;

  std::uint64_t seed = 0;
  std::size_t generated_size = 32;
  // 0 sizes D_TG and D_SI to |X_T|; otherwise a fixed size.
  std::size_t auxiliary_size = 0;

  DataConfig data;
};

void validate(const RunConfig& config);

// Budget 10 per cycle, 10 initial samples, 1000 web samples, 20 cycles,
// protocol learning-rate group.
RunConfig paper_preset();

nlohmann::json to_json(const RunConfig& c);
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

// Canonical serialization (sorted keys) used for hashing and manifests.
std::string canonical_config(const RunConfig& c);
// Hex SHA-256 of the canonical serialization.
std::string config_hash(const RunConfig& c);
std::string sha256_hex(std::string_view bytes);

BuiltinScorerOptions builtin_scorer_options(const RunConfig& c);

}  // namespace coti
