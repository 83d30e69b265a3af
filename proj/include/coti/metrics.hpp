#pragma once

#include <cstdint>
#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "coti/config.hpp"
#include "coti/datapool.hpp"

namespace coti {

// |top-R ∩ relevant| / R
double r_precision(std::span<const std::string> ranked_candidates, const std::set<std::string>& relevant,
                   std::size_t R);

struct GaussianStats {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;  // unbiased (n - 1)
};

GaussianStats gaussian_stats(const Pool& pool);

// ||mu_a - mu_b||^2 + Tr(S_a + S_b - 2 (S_a S_b)^{1/2})
double fid(const Pool& a, const Pool& b);
double fid(const GaussianStats& a, const GaussianStats& b);

// PSD square root by symmetric eigendecomposition; eigenvalues in
// [-1e-10, 0) are clipped to zero, anything lower is a NumericalFailure.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m);

struct StrategySpec {
  AcquisitionStrategy kind = AcquisitionStrategy::coti;
  ScheduleMode schedule = ScheduleMode::dynamic;

  std::string label() const;  // "coti", "aesthetic", ...
  bool operator==(const StrategySpec&) const = default;
};

// "coti", "rand", "full", "aesthetic", "concept", "generation", with an
// optional ":fixed" / ":dynamic" suffix.
StrategySpec parse_strategy(std::string_view text);
std::vector<StrategySpec> parse_strategies(std::string_view comma_list);

struct EvaluationConfig {
  std::size_t generated_count = 256;
  // Relevance radius for R-precision; <= 0 calibrates it so the ideal
  // embedding scores exactly 1.
  double relevance_radius = 0.0;
};

struct StrategyResult {
  StrategySpec spec;
  std::uint64_t seed = 0;
  double final_distance = 0.0;
  double r_precision = 0.0;
  double fid = 0.0;
  int cycles_run = 0;
  std::size_t training_size = 0;
};

struct StrategySummary {
  StrategySpec spec;
  double mean_distance = 0.0;
  double std_distance = 0.0;
  double mean_r_precision = 0.0;
  double std_r_precision = 0.0;
  double mean_fid = 0.0;
  double std_fid = 0.0;
};

struct ComparisonTable {
  std::vector<StrategyResult> rows;  // ordered by (spec, seed)
  std::vector<StrategySummary> summary;

  const StrategyResult& at(std::size_t spec_index, std::size_t seed_index) const;
};

// Runs every spec on the synthetic world of each seed. `base` supplies the
// engine settings; strategy, schedule mode and seeds are overridden.
ComparisonTable compare_strategies(std::span<const StrategySpec> specs, const RunConfig& base,
                                   std::span<const std::uint64_t> seeds,
                                   const EvaluationConfig& eval = {});

// Distance, R-precision and FID of an embedding against the world's ideal point.
StrategyResult evaluate_embedding(const SyntheticWorld& world, const std::vector<double>& embedding,
                                  std::uint64_t seed, const EvaluationConfig& eval);

// CSV: strategy,schedule,seed,final_distance,r_precision,fid
void write_comparison_csv(std::ostream& out, const ComparisonTable& table);
void write_summary_csv(std::ostream& out, const ComparisonTable& table);

}  // namespace coti
