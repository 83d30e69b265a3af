#include "coti/scoring_system.hpp"

#include <cmath>

#include <fmt/format.h>

#include "coti/errors.hpp"

namespace coti {

BuiltinScorers::BuiltinScorers(BuiltinScorerOptions options) : options_(std::move(options)) {}

void BuiltinScorers::refit(const Pool& training, const Pool& negatives) {
  aesthetic_ = fit_aesthetic(training, negatives, options_.aesthetic);
  std::optional<Pool> neg;
  if (options_.matcher == MatcherKind::classifier) neg = negatives;
  matcher_ = build_matcher(options_.matcher, training, neg, options_.matcher_options);
}

const AestheticModel& BuiltinScorers::aesthetic_model() const {
  if (!aesthetic_) throw Error(ErrorKind::EmptyPositives, "scorers used before refit");
  return *aesthetic_;
}

const ConceptMatcher& BuiltinScorers::matcher() const {
  if (!matcher_) throw Error(ErrorKind::EmptyReference, "scorers used before refit");
  return *matcher_;
}

std::vector<double> BuiltinScorers::aesthetic_scores(std::span<const Sample> samples) {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto s : score_aesthetic_batch(aesthetic_model(), samples)) out.push_back(s.value());
  return out;
}

std::vector<double> BuiltinScorers::concept_scores(std::span<const Sample> samples) {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto s : score_concept_batch(matcher(), samples)) out.push_back(s.value());
  return out;
}

FrozenAffineScorers::FrozenAffineScorers(std::vector<double> aesthetic_weights, std::vector<double> concept_weights)
    : aesthetic_weights_(std::move(aesthetic_weights)), concept_weights_(std::move(concept_weights)) {
  if (aesthetic_weights_.empty() || aesthetic_weights_.size() != concept_weights_.size()) {
    throw Error(ErrorKind::InvalidConfig, "frozen scorers need two weight vectors of length d+1");
  }
}

namespace {

double affine(const std::vector<double>& w, std::span<const double> x) {
  if (x.size() + 1 != w.size()) {
    throw Error(ErrorKind::DimensionMismatch, fmt::format("expected {} features, got {}", w.size() - 1, x.size()));
  }
  double acc = w.back();
  for (std::size_t k = 0; k < x.size(); ++k) acc += w[k] * x[k];
  return acc;
}

}  // namespace

std::vector<double> FrozenAffineScorers::aesthetic_scores(std::span<const Sample> samples) {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(Score::clamped(affine(aesthetic_weights_, s.features)).value());
  return out;
}

std::vector<double> FrozenAffineScorers::concept_scores(std::span<const Sample> samples) {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    const double p = 1.0 / (1.0 + std::exp(-affine(concept_weights_, s.features)));
    out.push_back(Score::clamped(10.0 * p).value());
  }
  return out;
}

}  // namespace coti
