#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "coti/acquisition.hpp"
#include "coti/datapool.hpp"
#include "coti/scorers.hpp"

namespace coti {

// The pair of scorers the engine consults. Implementations may be built-in
// models refit every cycle or externally hosted ones that ignore refit().
class ScoringSystem {
 public:
  virtual ~ScoringSystem() = default;

  // training: X_T with labels; negatives: D_TG ∪ D_SI with labels.
  virtual void refit(const Pool& training, const Pool& negatives) = 0;

  // Both return one [0, 10] value per sample, in input order.
  virtual std::vector<double> aesthetic_scores(std::span<const Sample> samples) = 0;
  virtual std::vector<double> concept_scores(std::span<const Sample> samples) = 0;
};

struct BuiltinScorerOptions {
  MatcherKind matcher = MatcherKind::min_cosine;
  AestheticFitOptions aesthetic;
  MatcherOptions matcher_options;
};

class BuiltinScorers final : public ScoringSystem {
 public:
  explicit BuiltinScorers(BuiltinScorerOptions options = {});

  void refit(const Pool& training, const Pool& negatives) override;
  std::vector<double> aesthetic_scores(std::span<const Sample> samples) override;
  std::vector<double> concept_scores(std::span<const Sample> samples) override;

  const AestheticModel& aesthetic_model() const;
  const ConceptMatcher& matcher() const;

 private:
  BuiltinScorerOptions options_;
  std::optional<AestheticModel> aesthetic_;
  std::optional<ConceptMatcher> matcher_;
};

// Fixed affine scorers: aesthetic = clamp(w.x + b), concept = 10 sigmoid(u.x + c).
// Never refit; used to pin scores for swap tests against hosted scorers.
class FrozenAffineScorers final : public ScoringSystem {
 public:
  FrozenAffineScorers(std::vector<double> aesthetic_weights, std::vector<double> concept_weights);

  void refit(const Pool&, const Pool&) override {}
  std::vector<double> aesthetic_scores(std::span<const Sample> samples) override;
  std::vector<double> concept_scores(std::span<const Sample> samples) override;

 private:
  std::vector<double> aesthetic_weights_;
  std::vector<double> concept_weights_;
};

}  // namespace coti
