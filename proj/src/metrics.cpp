#include "coti/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "coti/engine.hpp"
#include "coti/errors.hpp"
#include "coti/reports.hpp"
#include "coti/scorers.hpp"

namespace coti {

double r_precision(std::span<const std::string> ranked_candidates, const std::set<std::string>& relevant,
                   std::size_t R) {
  if (R == 0) throw Error(ErrorKind::InvalidR, "R must be positive");
  if (R > ranked_candidates.size()) {
    throw Error(ErrorKind::InvalidR, fmt::format("R={} exceeds {} candidates", R, ranked_candidates.size()));
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < R; ++i) hits += relevant.count(ranked_candidates[i]);
  return static_cast<double>(hits) / static_cast<double>(R);
}

GaussianStats gaussian_stats(const Pool& pool) {
  const auto n = static_cast<Eigen::Index>(pool.size());
  const auto d = static_cast<Eigen::Index>(pool.dimension());
  if (n < 2) throw Error(ErrorKind::DegeneratePool, fmt::format("need at least 2 samples, got {}", n));
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    x.row(i) = Eigen::Map<const Eigen::RowVectorXd>(pool[static_cast<std::size_t>(i)].features.data(), d);
  }
  GaussianStats s;
  s.mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd centered = x.rowwise() - s.mean.transpose();
  s.covariance = centered.transpose() * centered / static_cast<double>(n - 1);
  return s;
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  if (eig.info() != Eigen::Success) throw Error(ErrorKind::NumericalFailure, "eigendecomposition failed");
  Eigen::VectorXd values = eig.eigenvalues();
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (values[i] < -1e-10) {
      throw Error(ErrorKind::NumericalFailure, fmt::format("matrix not PSD, eigenvalue {}", values[i]));
    }
    values[i] = std::sqrt(std::max(values[i], 0.0));
  }
  return eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
}

double fid(const GaussianStats& a, const GaussianStats& b) {
  if (a.mean.size() != b.mean.size()) throw Error(ErrorKind::DimensionMismatch, "FID inputs differ in dimension");
  // Tr (S_a S_b)^{1/2} = Tr (S_a^{1/2} S_b S_a^{1/2})^{1/2}, which stays symmetric.
  const Eigen::MatrixXd ra = psd_sqrt(a.covariance);
  const Eigen::MatrixXd cross = psd_sqrt(ra * b.covariance * ra);
  const double mean_term = (a.mean - b.mean).squaredNorm();
  const double trace_term = a.covariance.trace() + b.covariance.trace() - 2.0 * cross.trace();
  return std::max(0.0, mean_term + trace_term);
}

double fid(const Pool& a, const Pool& b) {
  if (a.dimension() != b.dimension()) throw Error(ErrorKind::DimensionMismatch, "FID inputs differ in dimension");
  return fid(gaussian_stats(a), gaussian_stats(b));
}

std::string StrategySpec::label() const { return std::string(to_string(kind)); }

StrategySpec parse_strategy(std::string_view text) {
  StrategySpec spec;
  const auto colon = text.find(':');
  spec.kind = acquisition_strategy_from_string(text.substr(0, colon));
  if (colon != std::string_view::npos) spec.schedule = schedule_mode_from_string(text.substr(colon + 1));
  return spec;
}

std::vector<StrategySpec> parse_strategies(std::string_view comma_list) {
  std::vector<StrategySpec> out;
  std::size_t start = 0;
  while (start <= comma_list.size()) {
    const auto end = std::min(comma_list.find(',', start), comma_list.size());
    const auto item = comma_list.substr(start, end - start);
    if (item.empty()) throw Error(ErrorKind::InvalidConfig, "empty strategy in list");
    out.push_back(parse_strategy(item));
    start = end + 1;
  }
  return out;
}

const StrategyResult& ComparisonTable::at(std::size_t spec_index, std::size_t seed_index) const {
  const std::size_t per_spec = summary.empty() ? 0 : rows.size() / summary.size();
  return rows.at(spec_index * per_spec + seed_index);
}

StrategyResult evaluate_embedding(const SyntheticWorld& world, const std::vector<double>& embedding,
                                  std::uint64_t seed, const EvaluationConfig& eval) {
  if (embedding.size() != world.ideal_point.size()) {
    throw Error(ErrorKind::DimensionMismatch, "embedding and ideal point differ in dimension");
  }
  StrategyResult r;
  r.seed = seed;
  r.final_distance = euclidean(embedding, world.ideal_point);

  Rng gen_rng = make_rng(seed, Stream::Evaluation, 0);
  const Pool generated = synthetic_generate(world, Embedding{embedding, 0, 0}, eval.generated_count, gen_rng, "ev");
  double radius = eval.relevance_radius;
  if (radius <= 0.0) {
    // Same noise around a*: the farthest ideal sample sets the radius.
    Rng cal_rng = make_rng(seed, Stream::Evaluation, 0);
    const Pool ideal = synthetic_generate(world, Embedding{world.ideal_point, 0, 0}, eval.generated_count, cal_rng);
    radius = 0.0;
    for (const auto& s : ideal.samples()) radius = std::max(radius, euclidean(s.features, world.ideal_point));
  }
  std::vector<std::string> ranked;
  std::set<std::string> relevant;
  for (const auto& s : generated.samples()) {
    ranked.push_back(s.id);
    if (euclidean(s.features, world.ideal_point) <= radius) relevant.insert(s.id);
  }
  r.r_precision = ranked.empty() ? 0.0 : r_precision(ranked, relevant, ranked.size());

  Rng cloud_rng = make_rng(seed, Stream::Evaluation, 1);
  const Pool cloud = synthetic_generate(world, Embedding{world.ideal_point, 0, 0}, eval.generated_count, cloud_rng);
  r.fid = fid(generated, cloud);
  return r;
}

namespace {

void mean_std(const std::vector<double>& v, double& mean, double& stdev) {
  mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  stdev = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
}

}  // namespace

ComparisonTable compare_strategies(std::span<const StrategySpec> specs, const RunConfig& base,
                                   std::span<const std::uint64_t> seeds, const EvaluationConfig& eval) {
  if (specs.empty() || seeds.empty()) throw Error(ErrorKind::InvalidConfig, "need strategies and seeds");
  std::vector<SyntheticDataset> worlds;
  worlds.reserve(seeds.size());
  for (auto seed : seeds) {
    WorldConfig wc = base.data.world;
    wc.seed = seed;
    worlds.push_back(build_synthetic_dataset(wc));
  }

  ComparisonTable table;
  for (const auto& spec : specs) {
    std::vector<double> dist, rp, fids;
    for (std::size_t k = 0; k < seeds.size(); ++k) {
      RunConfig cfg = base;
      cfg.strategy = spec.kind;
      cfg.schedule_mode = spec.schedule;
      cfg.seed = seeds[k];
      cfg.data.synthetic = true;
      cfg.data.world.seed = seeds[k];
      const auto& w = worlds[k];
      const auto result = run_with_pools(cfg, w.world, w.web, w.initial, w.similar);
      StrategyResult row = evaluate_embedding(w.world, result.embedding.vector, seeds[k], eval);
      row.spec = spec;
      row.cycles_run = result.final_state.cycle_index;
      row.training_size = result.final_state.training.size();
      dist.push_back(row.final_distance);
      rp.push_back(row.r_precision);
      fids.push_back(row.fid);
      table.rows.push_back(row);
    }
    StrategySummary s;
    s.spec = spec;
    mean_std(dist, s.mean_distance, s.std_distance);
    mean_std(rp, s.mean_r_precision, s.std_r_precision);
    mean_std(fids, s.mean_fid, s.std_fid);
    table.summary.push_back(s);
  }
  return table;
}

void write_comparison_csv(std::ostream& out, const ComparisonTable& table) {
  out << "strategy,schedule,seed,final_distance,r_precision,fid\n";
  for (const auto& r : table.rows) {
    out << r.spec.label() << ',' << to_string(r.spec.schedule) << ',' << r.seed << ','
        << format_double(r.final_distance) << ',' << format_double(r.r_precision) << ',' << format_double(r.fid)
        << '\n';
  }
}

void write_summary_csv(std::ostream& out, const ComparisonTable& table) {
  out << "strategy,schedule,mean_distance,std_distance,mean_r_precision,std_r_precision,mean_fid,std_fid\n";
  for (const auto& s : table.summary) {
    out << s.spec.label() << ',' << to_string(s.spec.schedule) << ',' << format_double(s.mean_distance) << ','
        << format_double(s.std_distance) << ',' << format_double(s.mean_r_precision) << ','
        << format_double(s.std_r_precision) << ',' << format_double(s.mean_fid) << ',' << format_double(s.std_fid)
        << '\n';
  }
}

}  // namespace coti
