#include "coti/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

#include "coti/errors.hpp"
#include "coti/scoring_system.hpp"

namespace coti {

std::string_view to_string(IntegrationVariant v) noexcept {
  return v == IntegrationVariant::linear ? "linear" : "sin";
}

IntegrationVariant integration_variant_from_string(std::string_view s) {
  if (s == "linear") return IntegrationVariant::linear;
  if (s == "sin") return IntegrationVariant::sin;
  throw Error(ErrorKind::InvalidConfig, fmt::format("unknown integration variant '{}'", s));
}

const ScoreEntry* ScoreReport::find(std::string_view id) const {
  for (const auto& e : entries) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

Gamma gamma_from_scores(std::span<const double> aes, std::span<const double> con) {
  if (aes.empty() || aes.size() != con.size()) {
    throw Error(ErrorKind::EmptyGeneratedSet, "gamma needs one score pair per generated sample");
  }
  double sa = 0.0, sc = 0.0;
  for (std::size_t i = 0; i < aes.size(); ++i) {
    sa += aes[i];
    sc += con[i];
  }
  const double n = static_cast<double>(aes.size());
  return {std::clamp(sa / n, 0.0, 10.0), std::clamp(sc / n, 0.0, 10.0), aes.size()};
}

Gamma compute_gamma(const Pool& generated, const AestheticModel& aes, const ConceptMatcher& matcher) {
  if (generated.empty()) throw Error(ErrorKind::EmptyGeneratedSet, "X_TI is empty");
  std::vector<double> a, c;
  for (const auto s : score_aesthetic_batch(aes, generated.samples())) a.push_back(s.value());
  for (const auto s : score_concept_batch(matcher, generated.samples())) c.push_back(s.value());
  return gamma_from_scores(a, c);
}

Gamma compute_gamma(const Pool& generated, ScoringSystem& scorers) {
  if (generated.empty()) throw Error(ErrorKind::EmptyGeneratedSet, "X_TI is empty");
  return gamma_from_scores(scorers.aesthetic_scores(generated.samples()),
                           scorers.concept_scores(generated.samples()));
}

double integrated_score(Score s_aes, Score s_con, const Gamma& gamma, IntegrationVariant variant) {
  double w_aes = 0.0, w_con = 0.0;
  if (variant == IntegrationVariant::linear) {
    w_aes = 1.0 - gamma.gamma_aes / 10.0;
    w_con = 1.0 - gamma.gamma_con / 10.0;
  } else {
    constexpr double k = std::numbers::pi / 20.0;
    w_aes = 1.0 - std::sin(k * gamma.gamma_aes);
    w_con = 1.0 - std::sin(k * gamma.gamma_con);
  }
  return w_aes * s_aes.value() + w_con * s_con.value();
}

ScoreReport build_score_report(const Pool& pool, std::span<const double> aes, std::span<const double> con,
                               const Gamma& gamma, IntegrationVariant variant) {
  if (aes.size() != pool.size() || con.size() != pool.size()) {
    throw Error(ErrorKind::LengthMismatch, "score vectors do not cover the pool");
  }
  ScoreReport report;
  report.gamma = gamma;
  report.variant = variant;
  report.entries.reserve(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const Score a = Score::clamped(aes[i]);
    const Score c = Score::clamped(con[i]);
    report.entries.push_back({pool[i].id, a.value(), c.value(), integrated_score(a, c, gamma, variant)});
  }
  return report;
}

ScoreReport score_pool(const Pool& pool, ScoringSystem& scorers, const Gamma& gamma, IntegrationVariant variant) {
  return build_score_report(pool, scorers.aesthetic_scores(pool.samples()), scorers.concept_scores(pool.samples()),
                            gamma, variant);
}

std::vector<std::string> select_top_b(const Pool& pool, const ScoreReport& report, std::size_t budget) {
  if (budget > pool.size()) {
    throw Error(ErrorKind::BudgetExceedsPool, fmt::format("B={} but |W|={}", budget, pool.size()));
  }
  std::unordered_map<std::string_view, double> by_id;
  by_id.reserve(report.entries.size());
  for (const auto& e : report.entries) by_id.emplace(e.id, e.s_int);

  struct Candidate {
    double score;
    const std::string* id;
  };
  std::vector<Candidate> candidates;
  candidates.reserve(pool.size());
  for (const auto& s : pool.samples()) {
    const auto it = by_id.find(s.id);
    if (it == by_id.end()) throw Error(ErrorKind::MissingScore, s.id);
    candidates.push_back({it->second, &s.id});
  }
  const auto better = [](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return *a.id < *b.id;
  };
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(budget), candidates.end(),
                    better);
  std::vector<std::string> out;
  out.reserve(budget);
  for (std::size_t i = 0; i < budget; ++i) out.push_back(*candidates[i].id);
  return out;
}

double decay_label(double p_x, int n_current, int n_total) {
  if (n_total < 1 || n_current < 0 || n_current > n_total) {
    throw Error(ErrorKind::InvalidCycleIndex, fmt::format("cycle {} of {}", n_current, n_total));
  }
  const double frac = static_cast<double>(n_current) / static_cast<double>(n_total);
  return 10.0 - frac * (10.0 - p_x);
}

void write_score_report_csv(std::ostream& out, const ScoreReport& report, std::span<const std::string> selected) {
  const std::unordered_set<std::string_view> chosen(selected.begin(), selected.end());
  out << "id,s_aes,s_con,s_int,selected\n";
  for (const auto& e : report.entries) {
    out << fmt::format("{},{},{},{},{}\n", e.id, e.s_aes, e.s_con, e.s_int, chosen.contains(e.id) ? "true" : "false");
  }
}

}  // namespace coti
