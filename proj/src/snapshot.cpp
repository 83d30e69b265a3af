#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "coti/errors.hpp"
#include "coti/state.hpp"

namespace coti {

namespace {

constexpr int kSnapshotFormat = 1;

nlohmann::json to_json(const Embedding& e) {
  return {{"vector", e.vector}, {"epochs_trained", e.epochs_trained}, {"cycle_born", e.cycle_born}};
}

Embedding embedding_from_json(const nlohmann::json& j) {
  Embedding e;
  e.vector = j.at("vector").get<std::vector<double>>();
  e.epochs_trained = j.at("epochs_trained").get<int>();
  e.cycle_born = j.at("cycle_born").get<int>();
  return e;
}

}  // namespace

nlohmann::json to_json(const CycleState& s) {
  nlohmann::json j;
  j["format"] = kSnapshotFormat;
  j["cycle_index"] = s.cycle_index;
  j["config_hash"] = s.config_hash;
  // JSON numbers are doubles in most readers; keep the seed exact as text.
  j["rng_seed"] = std::to_string(s.rng_seed);
  j["pools"] = {{"W", to_json(s.web)},
                {"X_T", to_json(s.training)},
                {"D_TG", to_json(s.generated_null)},
                {"D_SI", to_json(s.similar)},
                {"X_TI", to_json(s.generated)}};
  j["embedding"] = to_json(s.embedding);
  j["schedule"] = to_json(s.schedule);
  j["last_cycle_phi"] = s.last_cycle_phi ? nlohmann::json(*s.last_cycle_phi) : nlohmann::json(nullptr);
  j["start_lr_index"] = s.start_lr_index;
  j["total_epochs"] = s.total_epochs;
  return j;
}

CycleState cycle_state_from_json(const nlohmann::json& j) {
  if (j.value("format", 0) != kSnapshotFormat) {
    throw Error(ErrorKind::MalformedRecord, "unsupported snapshot format");
  }
  CycleState s;
  s.cycle_index = j.at("cycle_index").get<int>();
  s.config_hash = j.at("config_hash").get<std::string>();
  s.rng_seed = std::stoull(j.at("rng_seed").get<std::string>());
  const auto& pools = j.at("pools");
  s.web = pool_from_json(pools.at("W"));
  s.training = pool_from_json(pools.at("X_T"));
  s.generated_null = pool_from_json(pools.at("D_TG"));
  s.similar = pool_from_json(pools.at("D_SI"));
  s.generated = pool_from_json(pools.at("X_TI"));
  s.embedding = embedding_from_json(j.at("embedding"));
  s.schedule = schedule_state_from_json(j.at("schedule"));
  if (const auto& phi = j.at("last_cycle_phi"); !phi.is_null()) s.last_cycle_phi = phi.get<double>();
  s.start_lr_index = j.at("start_lr_index").get<std::size_t>();
  s.total_epochs = j.at("total_epochs").get<int>();
  return s;
}

std::string serialize_state(const CycleState& state) { return to_json(state).dump(1) + "\n"; }

CycleState deserialize_state(std::string_view text) {
  try {
    return cycle_state_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::MalformedRecord, fmt::format("snapshot: {}", e.what()));
  } catch (const std::invalid_argument& e) {
    throw Error(ErrorKind::MalformedRecord, fmt::format("snapshot: {}", e.what()));
  }
}

void snapshot_state(const CycleState& state, const std::filesystem::path& path) {
  const std::string text = serialize_state(state);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoFailure, path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorKind::IoFailure, path.string());
}

CycleState restore_state(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoFailure, fmt::format("cannot read snapshot {}", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_state(buf.str());
}

CycleState restore_state(const std::filesystem::path& path, std::string_view expected_config_hash) {
  CycleState s = restore_state(path);
  if (s.config_hash != expected_config_hash) {
    throw Error(ErrorKind::ConfigMismatch,
                fmt::format("snapshot hash {} != config hash {}", s.config_hash, expected_config_hash));
  }
  return s;
}

}  // namespace coti
