#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "coti/datapool.hpp"
#include "coti/scorers.hpp"

namespace coti {

class ScoringSystem;

// Mean scores of the embedding's generated set; they condition the
// acquisition weights.
struct Gamma {
  double gamma_aes = 0.0;
  double gamma_con = 0.0;
  std::size_t sample_count = 1;

  bool operator==(const Gamma&) const = default;
};

enum class IntegrationVariant { linear, sin };

std::string_view to_string(IntegrationVariant v) noexcept;
IntegrationVariant integration_variant_from_string(std::string_view s);

struct ScoreEntry {
  std::string id;
  double s_aes = 0.0;
  double s_con = 0.0;
  double s_int = 0.0;
};

struct ScoreReport {
  std::vector<ScoreEntry> entries;
  Gamma gamma;
  IntegrationVariant variant = IntegrationVariant::linear;

  const ScoreEntry* find(std::string_view id) const;
};

Gamma compute_gamma(const Pool& generated, const AestheticModel& aes, const ConceptMatcher& matcher);
Gamma compute_gamma(const Pool& generated, ScoringSystem& scorers);
// From already computed per-sample scores.
Gamma gamma_from_scores(std::span<const double> aes, std::span<const double> con);

// linear: (1 - g_aes/10) s_aes + (1 - g_con/10) s_con
// sin:    (1 - sin(pi/20 g_aes)) s_aes + (1 - sin(pi/20 g_con)) s_con
double integrated_score(Score s_aes, Score s_con, const Gamma& gamma, IntegrationVariant variant);

ScoreReport build_score_report(const Pool& pool, std::span<const double> aes,
                               std::span<const double> con, const Gamma& gamma,
                               IntegrationVariant variant);
ScoreReport score_pool(const Pool& pool, ScoringSystem& scorers, const Gamma& gamma,
                       IntegrationVariant variant);

// Top-B ids by s_int, descending, ties broken by ascending id.
std::vector<std::string> select_top_b(const Pool& pool, const ScoreReport& report, std::size_t budget);

// 10 - (n_current / n_total)(10 - p_x)
double decay_label(double p_x, int n_current, int n_total);

// CSV: id,s_aes,s_con,s_int,selected
void write_score_report_csv(std::ostream& out, const ScoreReport& report,
                            std::span<const std::string> selected);

}  // namespace coti
