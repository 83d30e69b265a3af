#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "coti/datapool.hpp"

namespace coti {

// A score on the shared [0, 10] scale.
class Score {
 public:
  constexpr Score() = default;
  // Throws NumericalFailure when value is outside [0, 10] or not finite.
  explicit Score(double value);

  static Score clamped(double raw) noexcept;

  constexpr double value() const noexcept { return value_; }
  constexpr auto operator<=>(const Score&) const = default;

 private:
  double value_ = 0.0;
};

// ---------------------------------------------------------------------------
// Aesthetic scorer: affine regressor over features, p = w.x + b.

struct AestheticTrainingMeta {
  int iterations = 0;
  double final_loss = 0.0;
  // false when max_iter was hit before the gradient fell under tol; the
  // model is still usable.
  bool converged = true;
  std::vector<double> loss_history;
};

struct AestheticModel {
  // weights[0..d-1] multiply the features, weights[d] is the bias.
  std::vector<double> weights;
  AestheticTrainingMeta training_meta;

  std::size_t dimension() const noexcept { return weights.empty() ? 0 : weights.size() - 1; }
  double raw_prediction(std::span<const double> features) const;
};

struct AestheticFitOptions {
  double lambda = 1.0;
  int max_iter = 200;
  double tol = 1e-10;
};

// Minimizes
//   L = 1/|pos| sum (p - label)^2 + lambda/|neg| sum (p - label)^2
// by conjugate gradients on the normal equations.
AestheticModel fit_aesthetic(const Pool& positives, const Pool& negatives,
                             const AestheticFitOptions& options = {});

// Loss of `weights` under the objective minimized by fit_aesthetic.
double aesthetic_loss(std::span<const double> weights, const Pool& positives, const Pool& negatives,
                      double lambda);

Score score_aesthetic(const AestheticModel& model, const Sample& sample);
std::vector<Score> score_aesthetic_batch(const AestheticModel& model, std::span<const Sample> samples);

// ---------------------------------------------------------------------------
// Concept-matching scorers.

enum class MatcherKind { min_cosine, vlad, set_distance, classifier };

std::string_view to_string(MatcherKind k) noexcept;
MatcherKind matcher_kind_from_string(std::string_view s);

struct ConceptMatcher {
  MatcherKind kind = MatcherKind::min_cosine;
  std::vector<std::vector<double>> reference_features;
  // Logistic weights, length d+1 with the bias last; classifier only.
  std::optional<std::vector<double>> classifier_weights;
  // Keeps the literal 1/|X_T| factor in the vlad mean.
  bool strict_paper_normalization = false;

  std::size_t dimension() const noexcept {
    return reference_features.empty() ? 0 : reference_features.front().size();
  }
};

struct MatcherOptions {
  bool strict_paper_normalization = false;
  double classifier_l2 = 1e-3;
  int classifier_max_iter = 50;
};

ConceptMatcher build_matcher(MatcherKind kind, const Pool& training_pool,
                             const std::optional<Pool>& negatives = std::nullopt,
                             const MatcherOptions& options = {});

// Matcher kind's raw similarity before mapping onto [0, 10].
double raw_concept(const ConceptMatcher& matcher, std::span<const double> features);
Score score_concept(const ConceptMatcher& matcher, const Sample& sample);
std::vector<Score> score_concept_batch(const ConceptMatcher& matcher, std::span<const Sample> samples);

// Cosine similarity; 0 when either vector has zero norm.
double cosine(std::span<const double> a, std::span<const double> b);
double euclidean(std::span<const double> a, std::span<const double> b);

}  // namespace coti
