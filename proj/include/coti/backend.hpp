#pragma once

#include <cstddef>
#include <string_view>

#include "coti/datapool.hpp"
#include "coti/embedding.hpp"
#include "coti/rng.hpp"

namespace coti {

// What the engine needs from a text-to-image stack: optimise the
// embedding on a training pool, and sample images conditioned on it.
class TrainerBackend {
 public:
  virtual ~TrainerBackend() = default;

  // Deterministic given its inputs.
  virtual Embedding train(const Embedding& embedding, const Pool& training, double learning_rate,
                          int epochs) = 0;

  // `count` samples of the embedding's dimension, provenance
  // generated_by_embedding, ids "<id_prefix><k>".
  virtual Pool generate(const Embedding& embedding, std::size_t count, Rng& rng,
                        std::string_view id_prefix) = 0;
};

}  // namespace coti
