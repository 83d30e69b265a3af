#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "oracles.hpp"

#include "coti/metrics.hpp"
#include "coti/synthetic.hpp"

using namespace coti;
using testing::error_kind;

TEST_CASE("r_precision") {
  const std::vector<std::string> ranked{"a", "b", "c", "d"};
  CHECK(r_precision(ranked, {"a", "c"}, 2) == 0.5);
  CHECK(r_precision(ranked, {"a", "b"}, 2) == 1.0);
  CHECK(r_precision(ranked, {}, 4) == 0.0);
  CHECK(r_precision(ranked, {"d"}, 4) == 0.25);
  const std::vector<std::string> tail_shuffled{"a", "b", "d", "c"};
  CHECK(r_precision(tail_shuffled, {"a", "c"}, 2) == r_precision(ranked, {"a", "c"}, 2));
  CHECK(error_kind([&] { r_precision(ranked, {}, 0); }) == ErrorKind::InvalidR);
  CHECK(error_kind([&] { r_precision(ranked, {}, 5); }) == ErrorKind::InvalidR);
}

TEST_CASE("fid") {
  Rng rng(17);
  const auto a = testing::random_pool(PoolName::X_TI, 200, 4, rng);
  CHECK(fid(a, a) < 1e-6);
  CHECK(error_kind([] { fid(Pool(PoolName::X_TI, 2, {{"a", {1.0, 2.0}}}), Pool(PoolName::X_TI, 2)); }) ==
        ErrorKind::DegeneratePool);
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = testing::random_pool(PoolName::X_TI, 12, 3, rng, "x", 1.0 + trial * 0.2);
    const auto y = testing::random_pool(PoolName::X_TI, 15, 3, rng, "y");
    CHECK(fid(x, y) == doctest::Approx(oracle::fid(testing::features_of(x), testing::features_of(y))).epsilon(1e-9));
  }
}

TEST_CASE("psd_sqrt") {
  Eigen::MatrixXd m(2, 2);
  m << 4.0, 0.0, 0.0, 9.0;
  const auto r = psd_sqrt(m);
  CHECK(r(0, 0) == doctest::Approx(2.0));
  CHECK(r(1, 1) == doctest::Approx(3.0));
  Eigen::MatrixXd tiny(1, 1);
  tiny << -1e-12;
  CHECK(psd_sqrt(tiny)(0, 0) == 0.0);
  Eigen::MatrixXd neg(1, 1);
  neg << -1.0;
  CHECK(error_kind([&] { psd_sqrt(neg); }) == ErrorKind::NumericalFailure);
}

TEST_CASE("strategy parsing") {
  CHECK(parse_strategy("coti") == StrategySpec{AcquisitionStrategy::coti, ScheduleMode::dynamic});
  CHECK(parse_strategy("rand:fixed") == StrategySpec{AcquisitionStrategy::rand, ScheduleMode::fixed});
  CHECK(parse_strategies("coti,full,aesthetic").size() == 3);
  CHECK(parse_strategy("generation").kind == AcquisitionStrategy::generation_proxy);
  CHECK(error_kind([] { parse_strategy("best"); }) == ErrorKind::InvalidConfig);
  CHECK(error_kind([] { parse_strategies("coti,,rand"); }) == ErrorKind::InvalidConfig);
}

TEST_CASE("evaluate_embedding") {
  const SyntheticWorld world{{1.0, 0.0, 0.0}, 2.0, 0.3, 0};
  const auto ideal = evaluate_embedding(world, world.ideal_point, 3, {});
  CHECK(ideal.final_distance == 0.0);
  CHECK(ideal.r_precision == 1.0);
  const auto off = evaluate_embedding(world, {3.0, 0.0, 0.0}, 3, {});
  CHECK(off.final_distance == doctest::Approx(2.0));
  CHECK(off.r_precision < 0.5);
  CHECK(off.fid > ideal.fid);
}

TEST_CASE("comparison table") {
  RunConfig base;
  base.cycles = 3;
  base.data.world.web_size = 100;
  const std::vector<StrategySpec> specs{parse_strategy("coti"), parse_strategy("rand")};
  const std::vector<std::uint64_t> seeds{1, 2, 3};
  const auto t = compare_strategies(specs, base, seeds);
  CHECK(t.rows.size() == 6);
  CHECK(t.summary.size() == 2);
  CHECK(t.at(1, 2).spec.kind == AcquisitionStrategy::rand);
  CHECK(t.at(1, 2).seed == 3);
  std::ostringstream csv;
  write_comparison_csv(csv, t);
  std::istringstream lines(csv.str());
  std::string line;
  std::getline(lines, line);
  CHECK(line == "strategy,schedule,seed,final_distance,r_precision,fid");
  int n = 0;
  while (std::getline(lines, line)) ++n;
  CHECK(n == 6);
  const auto again = compare_strategies(specs, base, seeds);
  std::ostringstream csv2;
  write_comparison_csv(csv2, again);
  CHECK(csv2.str() == csv.str());
}
