#pragma once

#include <vector>

namespace coti {

// The learned concept representation: a point in feature space.
struct Embedding {
  std::vector<double> vector;
  int epochs_trained = 0;
  int cycle_born = 0;

  bool operator==(const Embedding&) const = default;
};

}  // namespace coti
