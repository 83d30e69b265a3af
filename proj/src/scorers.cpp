#include "coti/scorers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "coti/errors.hpp"
#include "parallel.hpp"

namespace coti {

Score::Score(double value) : value_(value) {
  if (!(value >= 0.0 && value <= kMaxLabel)) {
    throw Error(ErrorKind::NumericalFailure, fmt::format("score {} outside [0, 10]", value));
  }
}

Score Score::clamped(double raw) noexcept {
  if (std::isnan(raw)) raw = 0.0;
  Score s;
  s.value_ = std::clamp(raw, 0.0, kMaxLabel);
  return s;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

double euclidean(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

namespace {

double affine(std::span<const double> weights, std::span<const double> x) {
  double acc = weights[x.size()];
  for (std::size_t k = 0; k < x.size(); ++k) acc += weights[k] * x[k];
  return acc;
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void require_dimension(std::size_t expected, std::size_t got, std::string_view what) {
  if (expected != got) {
    throw Error(ErrorKind::DimensionMismatch, fmt::format("{}: expected {} features, got {}", what, expected, got));
  }
}

struct WeightedRow {
  const std::vector<double>* x;
  double label;
  double weight;
};

std::vector<WeightedRow> weighted_rows(const Pool& positives, const Pool& negatives, double lambda) {
  std::vector<WeightedRow> rows;
  rows.reserve(positives.size() + negatives.size());
  const double wp = 1.0 / static_cast<double>(positives.size());
  for (const auto& s : positives.samples()) {
    if (!s.aesthetic_label) throw Error(ErrorKind::UnlabeledSample, s.id);
    rows.push_back({&s.features, *s.aesthetic_label, wp});
  }
  if (!negatives.empty()) {
    const double wn = lambda / static_cast<double>(negatives.size());
    for (const auto& s : negatives.samples()) {
      if (!s.aesthetic_label) throw Error(ErrorKind::UnlabeledSample, s.id);
      rows.push_back({&s.features, *s.aesthetic_label, wn});
    }
  }
  return rows;
}

double rows_loss(const std::vector<WeightedRow>& rows, std::span<const double> w) {
  double loss = 0.0;
  for (const auto& r : rows) {
    const double e = affine(w, *r.x) - r.label;
    loss += r.weight * e * e;
  }
  return loss;
}

}  // namespace

double AestheticModel::raw_prediction(std::span<const double> features) const {
  require_dimension(dimension(), features.size(), "aesthetic model");
  return affine(weights, features);
}

double aesthetic_loss(std::span<const double> weights, const Pool& positives, const Pool& negatives,
                      double lambda) {
  return rows_loss(weighted_rows(positives, negatives, lambda), weights);
}

AestheticModel fit_aesthetic(const Pool& positives, const Pool& negatives, const AestheticFitOptions& options) {
  if (positives.empty()) throw Error(ErrorKind::EmptyPositives, "aesthetic fit needs labeled X_T samples");
  if (!(options.lambda >= 0.0)) throw Error(ErrorKind::InvalidConfig, "lambda must be >= 0");
  if (!negatives.empty()) require_dimension(positives.dimension(), negatives.dimension(), "negatives");

  const std::size_t d = positives.dimension();
  const std::size_t n = d + 1;
  const auto rows = weighted_rows(positives, negatives, options.lambda);

  // Normal equations A w = b with A = sum c x~ x~^T, b = sum c y x~.
  std::vector<double> a(n * n, 0.0), b(n, 0.0);
  std::vector<double> xt(n, 1.0);
  for (const auto& r : rows) {
    std::copy(r.x->begin(), r.x->end(), xt.begin());
    for (std::size_t i = 0; i < n; ++i) {
      b[i] += r.weight * r.label * xt[i];
      for (std::size_t j = 0; j < n; ++j) a[i * n + j] += r.weight * xt[i] * xt[j];
    }
  }
  const auto matvec = [&](const std::vector<double>& v) {
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) out[i] += a[i * n + j] * v[j];
    }
    return out;
  };
  const auto dot = [](const std::vector<double>& u, const std::vector<double>& v) {
    return std::inner_product(u.begin(), u.end(), v.begin(), 0.0);
  };

  AestheticModel model;
  model.weights.assign(n, 0.0);
  auto& meta = model.training_meta;
  double loss = rows_loss(rows, model.weights);
  meta.loss_history.push_back(loss);

  std::vector<double> r = b;  // residual b - A w at w = 0
  std::vector<double> p = r;
  double rr = dot(r, r);
  const double stop = options.tol * std::max(1.0, std::sqrt(dot(b, b)));
  meta.converged = std::sqrt(rr) <= stop;

  while (!meta.converged && meta.iterations < options.max_iter) {
    const auto ap = matvec(p);
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) break;  // direction in the null space of A
    const double alpha = rr / pap;
    std::vector<double> next = model.weights;
    for (std::size_t i = 0; i < n; ++i) next[i] += alpha * p[i];
    const double next_loss = rows_loss(rows, next);
    ++meta.iterations;
    if (next_loss > loss) {
      // Rounding noise at the optimum; keep the better iterate.
      meta.converged = true;
      break;
    }
    model.weights = std::move(next);
    loss = next_loss;
    meta.loss_history.push_back(loss);

    for (std::size_t i = 0; i < n; ++i) r[i] -= alpha * ap[i];
    const double rr_next = dot(r, r);
    if (std::sqrt(rr_next) <= stop) {
      meta.converged = true;
      break;
    }
    const double beta = rr_next / rr;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
    rr = rr_next;
  }
  if (!meta.converged && meta.iterations < options.max_iter) {
    // CG broke down on a singular direction; the residual left is outside
    // the range of A, so the iterate is a least-squares minimizer.
    meta.converged = true;
  }
  meta.final_loss = loss;
  return model;
}

Score score_aesthetic(const AestheticModel& model, const Sample& sample) {
  return Score::clamped(model.raw_prediction(sample.features));
}

std::vector<Score> score_aesthetic_batch(const AestheticModel& model, std::span<const Sample> samples) {
  std::vector<Score> out(samples.size());
  for (const auto& s : samples) require_dimension(model.dimension(), s.features.size(), "aesthetic model");
  detail::parallel_for(samples.size(), [&](std::size_t i) { out[i] = score_aesthetic(model, samples[i]); });
  return out;
}

// ---------------------------------------------------------------------------

std::string_view to_string(MatcherKind k) noexcept {
  switch (k) {
    case MatcherKind::min_cosine: return "min_cosine";
    case MatcherKind::vlad: return "vlad";
    case MatcherKind::set_distance: return "set_distance";
    case MatcherKind::classifier: return "classifier";
  }
  return "min_cosine";
}

MatcherKind matcher_kind_from_string(std::string_view s) {
  for (auto k : {MatcherKind::min_cosine, MatcherKind::vlad, MatcherKind::set_distance, MatcherKind::classifier}) {
    if (to_string(k) == s) return k;
  }
  throw Error(ErrorKind::InvalidConfig, fmt::format("unknown matcher '{}'", s));
}

namespace {

// L2-regularised logistic regression by Newton's method; the bias is not
// penalised.
std::vector<double> fit_logistic(const Pool& positives, const Pool& negatives, double l2, int max_iter) {
  const std::size_t d = positives.dimension();
  const std::size_t n = d + 1;
  const std::size_t m = positives.size() + negatives.size();
  Eigen::MatrixXd x(m, n);
  Eigen::VectorXd y(m);
  std::size_t row = 0;
  for (const Pool* pool : {&positives, &negatives}) {
    const double label = pool == &positives ? 1.0 : 0.0;
    for (const auto& s : pool->samples()) {
      for (std::size_t k = 0; k < d; ++k) x(row, k) = s.features[k];
      x(row, d) = 1.0;
      y(row) = label;
      ++row;
    }
  }
  Eigen::MatrixXd reg = Eigen::MatrixXd::Identity(n, n) * l2 * static_cast<double>(m);
  reg(d, d) = 0.0;

  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd z = x * w;
    Eigen::VectorXd p(m), s(m);
    for (std::size_t i = 0; i < m; ++i) {
      p(i) = sigmoid(z(i));
      s(i) = std::max(p(i) * (1.0 - p(i)), 1e-12);
    }
    const Eigen::VectorXd grad = x.transpose() * (p - y) + reg * w;
    const Eigen::MatrixXd hess = x.transpose() * s.asDiagonal() * x + reg;
    const Eigen::VectorXd step = hess.ldlt().solve(grad);
    if (!step.allFinite()) break;
    w -= step;
    if (step.norm() <= 1e-10 * std::max(1.0, w.norm())) break;
  }
  return {w.data(), w.data() + n};
}

}  // namespace

ConceptMatcher build_matcher(MatcherKind kind, const Pool& training_pool, const std::optional<Pool>& negatives,
                             const MatcherOptions& options) {
  if (training_pool.empty()) throw Error(ErrorKind::EmptyReference, "matcher needs a nonempty X_T");
  ConceptMatcher m;
  m.kind = kind;
  m.strict_paper_normalization = options.strict_paper_normalization;
  m.reference_features.reserve(training_pool.size());
  for (const auto& s : training_pool.samples()) m.reference_features.push_back(s.features);

  if (kind == MatcherKind::classifier) {
    if (!negatives || negatives->empty()) {
      throw Error(ErrorKind::MissingNegatives, "classifier matcher needs D_TG ∪ D_SI negatives");
    }
    require_dimension(training_pool.dimension(), negatives->dimension(), "negatives");
    m.classifier_weights =
        fit_logistic(training_pool, *negatives, options.classifier_l2, options.classifier_max_iter);
  }
  return m;
}

double raw_concept(const ConceptMatcher& matcher, std::span<const double> features) {
  require_dimension(matcher.dimension(), features.size(), "concept matcher");
  switch (matcher.kind) {
    case MatcherKind::min_cosine: {
      double worst = std::numeric_limits<double>::infinity();
      for (const auto& r : matcher.reference_features) worst = std::min(worst, cosine(features, r));
      return worst;
    }
    case MatcherKind::vlad:
    case MatcherKind::set_distance: {
      double nearest = std::numeric_limits<double>::infinity();
      for (const auto& r : matcher.reference_features) nearest = std::min(nearest, euclidean(features, r));
      double raw = std::exp(-nearest);
      if (matcher.kind == MatcherKind::vlad && matcher.strict_paper_normalization) {
        raw /= static_cast<double>(matcher.reference_features.size());
      }
      return raw;
    }
    case MatcherKind::classifier:
      if (!matcher.classifier_weights) throw Error(ErrorKind::MissingNegatives, "classifier was never fitted");
      return sigmoid(affine(*matcher.classifier_weights, features));
  }
  return 0.0;
}

Score score_concept(const ConceptMatcher& matcher, const Sample& sample) {
  const double raw = raw_concept(matcher, sample.features);
  if (matcher.kind == MatcherKind::min_cosine) return Score::clamped(5.0 * (raw + 1.0));
  return Score::clamped(10.0 * raw);
}

std::vector<Score> score_concept_batch(const ConceptMatcher& matcher, std::span<const Sample> samples) {
  for (const auto& s : samples) require_dimension(matcher.dimension(), s.features.size(), "concept matcher");
  std::vector<Score> out(samples.size());
  detail::parallel_for(samples.size(), [&](std::size_t i) { out[i] = score_concept(matcher, samples[i]); });
  return out;
}

}  // namespace coti
