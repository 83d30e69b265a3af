#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "oracles.hpp"

#include "coti/scorers.hpp"

using namespace coti;
using testing::error_kind;

namespace {

Sample at(std::vector<double> f, std::string id = "q") { return {std::move(id), std::move(f)}; }

Pool pool_of(PoolName name, std::vector<std::vector<double>> xs, std::optional<double> label = std::nullopt) {
  std::vector<Sample> s;
  for (std::size_t i = 0; i < xs.size(); ++i) s.push_back({"r" + std::to_string(i), xs[i], Provenance::web, label});
  return Pool(name, xs.front().size(), std::move(s));
}

}  // namespace

TEST_CASE("Score range") {
  CHECK(Score(7.25).value() == 7.25);
  CHECK(error_kind([] { Score(10.5); }) == ErrorKind::NumericalFailure);
  CHECK(error_kind([] { Score(-0.1); }) == ErrorKind::NumericalFailure);
  CHECK(Score::clamped(12.3).value() == 10.0);
  CHECK(Score::clamped(-3.0).value() == 0.0);
}

TEST_CASE("score_aesthetic clamps an affine prediction") {
  const Sample s = at({1.0, 2.0});
  CHECK(score_aesthetic(AestheticModel{{0.0, 0.0, 0.0}, {}}, s).value() == 0.0);
  CHECK(score_aesthetic(AestheticModel{{1.0, 1.0, 9.3}, {}}, s).value() == 10.0);
  CHECK(score_aesthetic(AestheticModel{{0.25, 1.0, 4.0}, {}}, s).value() == 6.25);
  CHECK(error_kind([&] { score_aesthetic(AestheticModel{{1.0, 0.0}, {}}, s); }) == ErrorKind::DimensionMismatch);
}

TEST_CASE("fit_aesthetic against the weighted least squares optimum") {
  Rng rng(11);
  const std::size_t d = 5;
  const auto pos = testing::labeled(testing::random_pool(PoolName::X_T, 30, d, rng, "x"), 10.0);
  const auto tg = testing::labeled(testing::random_pool(PoolName::D_TG, 30, d, rng, "g"), 0.0);
  const auto si = testing::labeled(testing::random_pool(PoolName::D_SI, 30, d, rng, "s"), 5.0);
  const auto neg = tg.with_appended(si.samples());

  SUBCASE("lambda = 1") {
    const auto model = fit_aesthetic(pos, neg);
    oracle::Mat xs;
    oracle::Vec ys, ws;
    for (const auto& s : pos.samples()) {
      xs.push_back(s.features);
      ys.push_back(*s.aesthetic_label);
      ws.push_back(1.0 / pos.size());
    }
    for (const auto& s : neg.samples()) {
      xs.push_back(s.features);
      ys.push_back(*s.aesthetic_label);
      ws.push_back(1.0 / neg.size());
    }
    const auto best = oracle::weighted_least_squares(xs, ys, ws);
    const double optimum = oracle::weighted_loss(best, xs, ys, ws);
    CHECK(model.training_meta.final_loss <= optimum * 1.05);
    CHECK(aesthetic_loss(model.weights, pos, neg, 1.0) == doctest::Approx(model.training_meta.final_loss));
    const auto& h = model.training_meta.loss_history;
    for (std::size_t i = 1; i < h.size(); ++i) CHECK(h[i] <= h[i - 1]);
  }
  SUBCASE("lambda = 0 ignores negatives") {
    Rng r2(5);
    std::vector<Sample> varied(pos.samples().begin(), pos.samples().end());
    std::uniform_real_distribution<double> u(0.0, 10.0);
    for (auto& s : varied) s.aesthetic_label = u(r2);
    const Pool p(PoolName::X_T, d, varied);
    const auto model = fit_aesthetic(p, neg, {.lambda = 0.0});
    oracle::Mat xs;
    oracle::Vec ys;
    for (const auto& s : p.samples()) {
      xs.push_back(s.features);
      ys.push_back(*s.aesthetic_label);
    }
    const auto best = oracle::weighted_least_squares(xs, ys, oracle::Vec(xs.size(), 1.0));
    for (std::size_t k = 0; k <= d; ++k) CHECK(model.weights[k] == doctest::Approx(best[k]).epsilon(1e-6));
  }
  SUBCASE("single positive is interpolated") {
    const auto one = pool_of(PoolName::X_T, {{0.3, -1.2, 2.0, 0.5, 1.0}}, 10.0);
    const auto model = fit_aesthetic(one, neg, {.lambda = 0.0});
    CHECK(model.raw_prediction(one[0].features) == doctest::Approx(10.0).epsilon(0.01));
  }
  SUBCASE("errors") {
    CHECK(error_kind([&] { fit_aesthetic(Pool(PoolName::X_T, d), neg); }) == ErrorKind::EmptyPositives);
    const auto unl = testing::random_pool(PoolName::X_T, 3, d, rng);
    CHECK(error_kind([&] { fit_aesthetic(unl, neg); }) == ErrorKind::UnlabeledSample);
    CHECK(error_kind([&] { fit_aesthetic(pos, neg, {.lambda = -1.0}); }) == ErrorKind::InvalidConfig);
  }
}

TEST_CASE("matcher examples") {
  const auto single = pool_of(PoolName::X_T, {{1.0, 2.0, 0.0}});
  SUBCASE("min_cosine") {
    const auto m = build_matcher(MatcherKind::min_cosine, single);
    CHECK(m.reference_features.size() == 1);
    CHECK(score_concept(m, at({1.0, 2.0, 0.0})).value() == doctest::Approx(10.0));
    CHECK(score_concept(m, at({-2.0, 1.0, 0.0})).value() == 5.0);
    Rng rng(2);
    const auto ten = testing::random_pool(PoolName::X_T, 10, 3, rng);
    CHECK(build_matcher(MatcherKind::min_cosine, ten).reference_features.size() == 10);
  }
  SUBCASE("vlad and set distance at a reference") {
    for (auto kind : {MatcherKind::vlad, MatcherKind::set_distance}) {
      const auto m = build_matcher(kind, single);
      CHECK(score_concept(m, at({1.0, 2.0, 0.0})).value() == 10.0);
    }
  }
  SUBCASE("set distance ln 2 away") {
    const auto m = build_matcher(MatcherKind::set_distance, single);
    CHECK(score_concept(m, at({1.0 + std::log(2.0), 2.0, 0.0})).value() == doctest::Approx(5.0).epsilon(1e-12));
  }
  SUBCASE("strict vlad divides by |X_T|") {
    const auto two = pool_of(PoolName::X_T, {{0.0, 0.0, 0.0}, {5.0, 5.0, 5.0}});
    auto m = build_matcher(MatcherKind::vlad, two, std::nullopt, {.strict_paper_normalization = true});
    CHECK(score_concept(m, at({0.0, 0.0, 0.0})).value() == doctest::Approx(5.0));
  }
  SUBCASE("errors") {
    CHECK(error_kind([] { build_matcher(MatcherKind::vlad, Pool(PoolName::X_T, 2)); }) == ErrorKind::EmptyReference);
    CHECK(error_kind([&] { build_matcher(MatcherKind::classifier, single); }) == ErrorKind::MissingNegatives);
    CHECK(error_kind([&] { build_matcher(MatcherKind::classifier, single, Pool(PoolName::D_TG, 3)); }) ==
          ErrorKind::MissingNegatives);
    const auto m = build_matcher(MatcherKind::set_distance, single);
    CHECK(error_kind([&] { score_concept(m, at({1.0})); }) == ErrorKind::DimensionMismatch);
  }
}

TEST_CASE("classifier separates separable data") {
  Rng rng(8);
  std::vector<Sample> p, n;
  for (int i = 0; i < 40; ++i) {
    auto x = testing::gaussian_vector(4, rng, 0.5);
    x[0] += 2.0;
    p.push_back({"p" + std::to_string(i), x});
    auto y = testing::gaussian_vector(4, rng, 0.5);
    y[0] -= 2.0;
    n.push_back({"n" + std::to_string(i), y});
  }
  const Pool pos(PoolName::X_T, 4, p), neg(PoolName::D_TG, 4, n);
  const auto m = build_matcher(MatcherKind::classifier, pos, neg);
  REQUIRE(m.classifier_weights.has_value());
  int correct = 0;
  double min_pos = 10.0, max_neg = 0.0;
  for (const auto& s : pos.samples()) {
    const double v = score_concept(m, s).value();
    correct += v > 5.0;
    min_pos = std::min(min_pos, v);
  }
  for (const auto& s : neg.samples()) {
    const double v = score_concept(m, s).value();
    correct += v < 5.0;
    max_neg = std::max(max_neg, v);
  }
  CHECK(correct == 80);
  CHECK(min_pos > max_neg);
}

TEST_CASE("matchers agree with brute-force oracles") {
  Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const auto refs = testing::random_pool(PoolName::X_T, 1 + trial % 9, 6, rng);
    const auto rf = testing::features_of(refs);
    const Sample q = at(testing::gaussian_vector(6, rng));
    CHECK(score_concept(build_matcher(MatcherKind::min_cosine, refs), q).value() ==
          doctest::Approx(oracle::min_cosine(q.features, rf)).epsilon(1e-12));
    CHECK(score_concept(build_matcher(MatcherKind::vlad, refs), q).value() ==
          doctest::Approx(oracle::vlad(q.features, rf, false)).epsilon(1e-12));
    CHECK(score_concept(build_matcher(MatcherKind::vlad, refs, std::nullopt, {.strict_paper_normalization = true}), q)
              .value() == doctest::Approx(oracle::vlad(q.features, rf, true)).epsilon(1e-12));
    CHECK(score_concept(build_matcher(MatcherKind::set_distance, refs), q).value() ==
          doctest::Approx(oracle::set_distance(q.features, rf)).epsilon(1e-12));
  }
}

TEST_CASE("matcher properties") {
  Rng rng(4);
  const auto refs = testing::random_pool(PoolName::X_T, 7, 5, rng);
  const auto mc = build_matcher(MatcherKind::min_cosine, refs);
  const auto sd = build_matcher(MatcherKind::set_distance, refs);
  const auto vl = build_matcher(MatcherKind::vlad, refs);
  for (int i = 0; i < 50; ++i) {
    auto x = testing::gaussian_vector(5, rng, 3.0);
    auto scaled = x;
    for (auto& v : scaled) v *= 4.5;
    CHECK(score_concept(mc, at(x)).value() == doctest::Approx(score_concept(mc, at(scaled)).value()));
    for (const auto* m : {&mc, &sd, &vl}) {
      const double v = score_concept(*m, at(x)).value();
      CHECK(v >= 0.0);
      CHECK(v <= 10.0);
    }
    // Ordering by distance to the nearest reference is ordering by score.
    const auto y = testing::gaussian_vector(5, rng, 3.0);
    auto nearest = [&](const std::vector<double>& v) {
      double best = 1e300;
      for (const auto& s : refs.samples()) best = std::min(best, euclidean(v, s.features));
      return best;
    };
    for (const auto* m : {&sd, &vl}) {
      if (nearest(x) <= nearest(y)) {
        CHECK(score_concept(*m, at(x)).value() >= score_concept(*m, at(y)).value());
      } else {
        CHECK(score_concept(*m, at(x)).value() <= score_concept(*m, at(y)).value());
      }
    }
  }
  for (const auto& s : refs.samples()) CHECK(score_concept(sd, s).value() == 10.0);
}

TEST_CASE("batch scoring keeps input order") {
  Rng rng(6);
  const auto refs = testing::random_pool(PoolName::X_T, 5, 3, rng);
  const auto many = testing::random_pool(PoolName::W, 3000, 3, rng);
  const auto m = build_matcher(MatcherKind::set_distance, refs);
  const auto batch = score_concept_batch(m, many.samples());
  const AestheticModel model{{0.3, -0.2, 1.0, 5.0}, {}};
  const auto abatch = score_aesthetic_batch(model, many.samples());
  for (std::size_t i = 0; i < many.size(); ++i) {
    CHECK(batch[i] == score_concept(m, many[i]));
    CHECK(abatch[i] == score_aesthetic(model, many[i]));
  }
}
