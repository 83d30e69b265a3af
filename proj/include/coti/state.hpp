#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "coti/datapool.hpp"
#include "coti/embedding.hpp"
#include "coti/schedule.hpp"
#include "json.hpp"

namespace coti {

// Everything needed to resume a run between cycles.
struct CycleState {
  int cycle_index = 0;
  Pool web{PoolName::W, 0};
  Pool training{PoolName::X_T, 0};
  Pool generated_null{PoolName::D_TG, 0};
  Pool similar{PoolName::D_SI, 0};
  Pool generated{PoolName::X_TI, 0};
  Embedding embedding;
  ScheduleState schedule;
  std::uint64_t rng_seed = 0;
  std::string config_hash;
  // Indicator of the embedding accepted at the end of the previous cycle.
  std::optional<double> last_cycle_phi;
  // Learning-rate index the next cycle starts from.
  std::size_t start_lr_index = 0;
  // Epochs trained over the whole run, rejected candidates included.
  int total_epochs = 0;

  bool operator==(const CycleState&) const = default;
};

nlohmann::json to_json(const CycleState& s);
CycleState cycle_state_from_json(const nlohmann::json& j);

// The snapshot document. Serialization is a pure function of the state:
// two snapshots of equal states are byte-identical.
std::string serialize_state(const CycleState& state);
CycleState deserialize_state(std::string_view text);

void snapshot_state(const CycleState& state, const std::filesystem::path& path);
// Throws ConfigMismatch when the stored hash differs from expected_config_hash.
CycleState restore_state(const std::filesystem::path& path, std::string_view expected_config_hash);
CycleState restore_state(const std::filesystem::path& path);

}  // namespace coti
