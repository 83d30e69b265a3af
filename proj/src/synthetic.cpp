#include "coti/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "coti/errors.hpp"

namespace coti {

Embedding synthetic_train(const SyntheticWorld& world, const Embedding& embedding, const Pool& training,
                          double learning_rate, int epochs) {
  if (training.empty()) throw Error(ErrorKind::EmptyTrainingPool, "synthetic trainer needs X_T");
  if (training.dimension() != embedding.vector.size()) {
    throw Error(ErrorKind::DimensionMismatch, "embedding and X_T dimensions differ");
  }
  const auto c = centroid(training);
  const double step = std::min(1.0, learning_rate * world.trainer_rate * static_cast<double>(epochs));
  Embedding out = embedding;
  for (std::size_t k = 0; k < c.size(); ++k) {
    // Exact landing on the centroid for a full step.
    out.vector[k] = step >= 1.0 ? c[k] : embedding.vector[k] + step * (c[k] - embedding.vector[k]);
  }
  out.epochs_trained += epochs;
  return out;
}

Pool synthetic_generate(const SyntheticWorld& world, const Embedding& embedding, std::size_t count, Rng& rng,
                        std::string_view id_prefix) {
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<Sample> samples;
  samples.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Sample s;
    s.id = fmt::format("{}{:05}", id_prefix, i);
    s.provenance = Provenance::generated_by_embedding;
    s.features = embedding.vector;
    if (world.generation_noise > 0.0) {
      for (auto& x : s.features) x += world.generation_noise * noise(rng);
    }
    samples.push_back(std::move(s));
  }
  return Pool(PoolName::X_TI, embedding.vector.size(), std::move(samples));
}

Embedding SyntheticBackend::train(const Embedding& embedding, const Pool& training, double learning_rate,
                                  int epochs) {
  return synthetic_train(world_, embedding, training, learning_rate, epochs);
}

Pool SyntheticBackend::generate(const Embedding& embedding, std::size_t count, Rng& rng, std::string_view id_prefix) {
  return synthetic_generate(world_, embedding, count, rng, id_prefix);
}

namespace {

std::vector<double> unit_gaussian(std::size_t d, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(d);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (auto& x : v) {
      x = n(rng);
      norm += x * x;
    }
  } while (norm == 0.0);
  norm = std::sqrt(norm);
  for (auto& x : v) x /= norm;
  return v;
}

}  // namespace

SyntheticDataset build_synthetic_dataset(const WorldConfig& config) {
  if (config.dimension < 2) throw Error(ErrorKind::InvalidConfig, "synthetic world needs dimension >= 2");
  if (config.initial_size == 0) throw Error(ErrorKind::InvalidConfig, "synthetic world needs initial samples");
  Rng rng = make_rng(config.seed, Stream::World);
  const std::size_t d = config.dimension;

  const auto ideal_dir = unit_gaussian(d, rng);
  std::vector<double> ideal(d);
  for (std::size_t k = 0; k < d; ++k) ideal[k] = config.ideal_norm * ideal_dir[k];

  std::vector<double> b_aes(d);
  for (std::size_t k = 0; k < d; ++k) b_aes[k] = -ideal_dir[k];

  auto b_con = unit_gaussian(d, rng);
  double proj = 0.0;
  for (std::size_t k = 0; k < d; ++k) proj += b_con[k] * ideal_dir[k];
  double norm = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    b_con[k] -= proj * ideal_dir[k];
    norm += b_con[k] * b_con[k];
  }
  norm = std::sqrt(norm);
  for (auto& x : b_con) x /= norm;

  std::normal_distribution<double> noise(0.0, 1.0);
  const auto place = [&](double q_con, double q_aes) {
    std::vector<double> x(d);
    for (std::size_t k = 0; k < d; ++k) {
      x[k] = ideal[k] + (1.0 - q_con / 10.0) * config.concept_offset * b_con[k] +
             (1.0 - q_aes / 10.0) * config.aesthetic_offset * b_aes[k] + config.web_noise * noise(rng);
    }
    return x;
  };

  std::uniform_real_distribution<double> quality(0.0, 10.0);
  std::uniform_real_distribution<double> curated(std::min(config.initial_quality_min, 10.0), 10.0);

  std::vector<Sample> web;
  web.reserve(config.web_size);
  for (std::size_t i = 0; i < config.web_size; ++i) {
    const double q_con = quality(rng);
    const double q_aes = quality(rng);
    web.push_back({fmt::format("w{:05}", i), place(q_con, q_aes), Provenance::web, std::nullopt});
  }

  std::vector<Sample> initial;
  for (std::size_t i = 0; i < config.initial_size; ++i) {
    const double q_con = curated(rng);
    const double q_aes = curated(rng);
    initial.push_back({fmt::format("x{:05}", i), place(q_con, q_aes), Provenance::initial, 10.0});
  }

  std::vector<Sample> similar;
  for (std::size_t i = 0; i < config.similar_size; ++i) {
    std::vector<double> x(d);
    for (std::size_t k = 0; k < d; ++k) {
      x[k] = ideal[k] + config.similar_offset * b_con[k] + config.web_noise * noise(rng);
    }
    similar.push_back({fmt::format("s{:05}", i), std::move(x), Provenance::similar_category, std::nullopt});
  }

  SyntheticWorld world{ideal, config.trainer_rate, config.generation_noise, config.seed};
  return {std::move(world), Pool(PoolName::W, d, std::move(web)), Pool(PoolName::X_T, d, std::move(initial)),
          Pool(PoolName::D_SI, d, std::move(similar))};
}

nlohmann::json to_json(const WorldConfig& c) {
  return {{"dimension", c.dimension},
          {"web_size", c.web_size},
          {"initial_size", c.initial_size},
          {"similar_size", c.similar_size},
          {"ideal_norm", c.ideal_norm},
          {"concept_offset", c.concept_offset},
          {"aesthetic_offset", c.aesthetic_offset},
          {"web_noise", c.web_noise},
          {"similar_offset", c.similar_offset},
          {"initial_quality_min", c.initial_quality_min},
          {"trainer_rate", c.trainer_rate},
          {"generation_noise", c.generation_noise},
          {"seed", c.seed}};
}

WorldConfig world_config_from_json(const nlohmann::json& j) {
  WorldConfig c;
  c.dimension = j.value("dimension", c.dimension);
  c.web_size = j.value("web_size", c.web_size);
  c.initial_size = j.value("initial_size", c.initial_size);
  c.similar_size = j.value("similar_size", c.similar_size);
  c.ideal_norm = j.value("ideal_norm", c.ideal_norm);
  c.concept_offset = j.value("concept_offset", c.concept_offset);
  c.aesthetic_offset = j.value("aesthetic_offset", c.aesthetic_offset);
  c.web_noise = j.value("web_noise", c.web_noise);
  c.similar_offset = j.value("similar_offset", c.similar_offset);
  c.initial_quality_min = j.value("initial_quality_min", c.initial_quality_min);
  c.trainer_rate = j.value("trainer_rate", c.trainer_rate);
  c.generation_noise = j.value("generation_noise", c.generation_noise);
  c.seed = j.value("seed", c.seed);
  return c;
}

}  // namespace coti
