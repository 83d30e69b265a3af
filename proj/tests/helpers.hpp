#pragma once

#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "coti/datapool.hpp"
#include "coti/errors.hpp"
#include "coti/rng.hpp"

namespace testing {

inline std::vector<double> gaussian_vector(std::size_t d, coti::Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  std::vector<double> v(d);
  for (auto& x : v) x = n(rng);
  return v;
}

inline coti::Pool random_pool(coti::PoolName name, std::size_t n, std::size_t d, coti::Rng& rng,
                              const std::string& prefix = "s", double scale = 1.0) {
  std::vector<coti::Sample> samples;
  for (std::size_t i = 0; i < n; ++i) {
    coti::Sample s;
    s.id = fmt::format("{}{:04}", prefix, i);
    s.features = gaussian_vector(d, rng, scale);
    samples.push_back(std::move(s));
  }
  return coti::Pool(name, d, std::move(samples));
}

inline coti::Pool labeled(const coti::Pool& p, double label) {
  std::vector<coti::Sample> out(p.samples().begin(), p.samples().end());
  for (auto& s : out) s.aesthetic_label = label;
  return coti::Pool(p.name(), p.dimension(), std::move(out));
}

inline std::vector<std::vector<double>> features_of(const coti::Pool& p) {
  std::vector<std::vector<double>> out;
  for (const auto& s : p.samples()) out.push_back(s.features);
  return out;
}

// Kind of the coti::Error thrown by f; a non-throwing f is a test failure.
template <class F>
coti::ErrorKind error_kind(F&& f) {
  try {
    f();
  } catch (const coti::Error& e) {
    return e.kind();
  }
  throw std::logic_error("expected a coti::Error");
}

}  // namespace testing
