#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "coti/backend.hpp"
#include "json.hpp"

namespace coti {

// Ground truth of the desk-scale world: the ideal concept location a* and
// the behaviour of the stand-in trainer and generator.
struct SyntheticWorld {
  std::vector<double> ideal_point;
  double trainer_rate = 2.0;       // eta
  double generation_noise = 0.3;   // sigma
  std::uint64_t world_rng_seed = 0;
};

// e' = e + min(1, lr * eta * epochs) (centroid(X_T) - e)
Embedding synthetic_train(const SyntheticWorld& world, const Embedding& embedding, const Pool& training,
                          double learning_rate, int epochs);

// embedding + N(0, sigma^2 I) per sample.
Pool synthetic_generate(const SyntheticWorld& world, const Embedding& embedding, std::size_t count,
                        Rng& rng, std::string_view id_prefix = "g");

class SyntheticBackend final : public TrainerBackend {
 public:
  explicit SyntheticBackend(SyntheticWorld world) : world_(std::move(world)) {}

  Embedding train(const Embedding& embedding, const Pool& training, double learning_rate,
                  int epochs) override;
  Pool generate(const Embedding& embedding, std::size_t count, Rng& rng,
                std::string_view id_prefix) override;

  const SyntheticWorld& world() const noexcept { return world_; }

 private:
  SyntheticWorld world_;
};

// Generator parameters for the web pool and its companions.
//
// Every web sample carries two latent qualities q_con, q_aes ~ U[0, 10] and
// sits at
//   a* + (1 - q_con/10) rho_con b_con + (1 - q_aes/10) rho_aes b_aes + web_noise z
// where b_aes points from a* toward the origin (where unconditioned
// generations land) and b_con is a fixed unit direction orthogonal to a*,
// toward the similar-category cluster a* + similar_offset b_con.
struct WorldConfig {
  std::size_t dimension = 8;
  std::size_t web_size = 1000;
  std::size_t initial_size = 10;
  std::size_t similar_size = 200;
  double ideal_norm = 3.0;
  double concept_offset = 2.0;     // rho_con
  double aesthetic_offset = 2.0;   // rho_aes
  double web_noise = 0.35;
  double similar_offset = 2.5;
  // Initial curated samples draw both qualities from [initial_quality_min, 10].
  double initial_quality_min = 9.0;
  double trainer_rate = 2.0;
  double generation_noise = 0.3;
  std::uint64_t seed = 1;

  bool operator==(const WorldConfig&) const = default;
};

struct SyntheticDataset {
  SyntheticWorld world;
  Pool web;        // W, unlabeled
  Pool initial;    // X_T seed, labeled 10
  Pool similar;    // reservoir for D_SI
};

SyntheticDataset build_synthetic_dataset(const WorldConfig& config);

nlohmann::json to_json(const WorldConfig& c);
WorldConfig world_config_from_json(const nlohmann::json& j);

}  // namespace coti
