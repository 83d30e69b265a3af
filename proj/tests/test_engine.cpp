#include <cmath>
#include <deque>

#include "doctest.h"
#include "helpers.hpp"

#include "coti/engine.hpp"
#include "coti/synthetic.hpp"

using namespace coti;
using testing::error_kind;

namespace {

// Returns scripted embeddings from train() and copies of the embedding
// from generate(), so the indicator of a candidate is a known function.
class ScriptedBackend final : public TrainerBackend {
 public:
  explicit ScriptedBackend(std::deque<double> script) : script_(std::move(script)) {}

  Embedding train(const Embedding& e, const Pool&, double lr, int epochs) override {
    inputs.push_back(e.vector[0]);
    rates.push_back(lr);
    Embedding out = e;
    out.epochs_trained += epochs;
    if (!script_.empty()) {
      out.vector[0] = script_.front();
      script_.pop_front();
    }
    return out;
  }

  Pool generate(const Embedding& e, std::size_t count, Rng&, std::string_view prefix) override {
    std::vector<Sample> s;
    for (std::size_t i = 0; i < count; ++i) {
      s.push_back({std::string(prefix) + std::to_string(i), e.vector, Provenance::generated_by_embedding});
    }
    return Pool(PoolName::X_TI, e.vector.size(), std::move(s));
  }

  std::vector<double> inputs;
  std::vector<double> rates;

 private:
  std::deque<double> script_;
};

Pool line_pool(PoolName name, std::size_t n, double x, const std::string& prefix) {
  std::vector<Sample> s;
  for (std::size_t i = 0; i < n; ++i) s.push_back({prefix + std::to_string(i), {x}});
  return Pool(name, 1, std::move(s));
}

RunConfig scripted_config(int cycles) {
  RunConfig c;
  c.budget = 1;
  c.cycles = cycles;
  c.generated_size = 4;
  return c;
}

// aesthetic = the first coordinate, concept fixed at 5.
FrozenAffineScorers identity_scorers() { return FrozenAffineScorers({1.0, 0.0}, {0.0, 0.0}); }

}  // namespace

TEST_CASE("inner loop follows the schedule and reverts declines") {
  ScriptedBackend backend({3.0, 2.5, 3.5, 3.51, 3.52, 3.53, 9.0});
  auto scorers = identity_scorers();
  const Pool reservoir(PoolName::D_SI, 1);
  const auto config = scripted_config(1);
  const EngineContext ctx{backend, scorers, reservoir, config};
  const auto web = line_pool(PoolName::W, 50, 1.0, "w");
  const auto init = line_pool(PoolName::X_T, 1, 2.0, "x");
  const auto s0 = initial_state(config, web, init);
  CHECK(s0.embedding.vector == std::vector<double>{2.0});
  CHECK(*s0.training[0].aesthetic_label == 10.0);

  CycleRecord rec;
  const auto s1 = run_cycle(s0, ctx, &rec);
  REQUIRE(rec.trace.size() == 6);
  using A = ScheduleAction;
  const std::vector<A> actions{A::Continue, A::LowerLrAndFreeze, A::Continue, A::Continue, A::Continue,
                               A::AcquireNewBatch};
  const std::vector<bool> accepted{true, false, true, true, true, true};
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(rec.trace[i].action == actions[i]);
    CHECK(rec.trace[i].accepted == accepted[i]);
    CHECK(rec.trace[i].epoch == int(100 * (i + 1)));
  }
  CHECK(backend.inputs == std::vector<double>{2.0, 3.0, 3.0, 3.5, 3.51, 3.52});
  CHECK(backend.rates == std::vector<double>{5e-4, 5e-4, 2.5e-4, 2.5e-4, 2.5e-4, 2.5e-4});
  CHECK(s1.embedding.vector == std::vector<double>{3.53});
  CHECK(s1.embedding.cycle_born == 1);
  CHECK(rec.final_action == A::AcquireNewBatch);
  CHECK(rec.accepted_phi.size() == 6);
  for (std::size_t i = 1; i < rec.accepted_phi.size(); ++i) CHECK(rec.accepted_phi[i] > rec.accepted_phi[i - 1]);
  CHECK(rec.gamma.gamma_aes == 2.0);
  CHECK(rec.gamma.gamma_con == 5.0);
  CHECK(s1.total_epochs == 600);
  CHECK(s1.cycle_index == 1);

  // Acquisition and label decay: one web sample, predicted 1.0, last cycle.
  CHECK(rec.selected == std::vector<std::string>{"w0"});
  CHECK(s1.training.size() == 2);
  CHECK(s1.web.size() == 49);
  CHECK(*s1.training[1].aesthetic_label == 1.0);
  CHECK(s1.generated_null.size() == 1);
  CHECK(*s1.generated_null[0].aesthetic_label == 0.0);
  CHECK(s1.generated_null[0].provenance == Provenance::generated_no_embedding);
  CHECK(s1.generated_null[0].features == std::vector<double>{0.0});
  CHECK(s1.similar.empty());
  CHECK(s1.generated.name() == PoolName::X_TI);
  CHECK(error_kind([&] { run_cycle(s1, ctx); }) == ErrorKind::InvalidCycleIndex);
}

TEST_CASE("declines all the way down converge the run") {
  ScriptedBackend backend({1.9, 1.8, 1.7, 1.6, 1.5});
  auto scorers = identity_scorers();
  const Pool reservoir(PoolName::D_SI, 1);
  const auto config = scripted_config(3);
  const EngineContext ctx{backend, scorers, reservoir, config};
  const auto s0 = initial_state(config, line_pool(PoolName::W, 50, 1.0, "w"), line_pool(PoolName::X_T, 1, 2.0, "x"));
  const auto result = run(s0, ctx);
  CHECK(result.report.outcome == RunOutcome::converged);
  REQUIRE(result.report.cycles.size() == 1);
  const auto& rec = result.report.cycles[0];
  CHECK(rec.final_action == ScheduleAction::Stop);
  CHECK(rec.trace.size() == 5);
  CHECK(rec.trace.back().learning_rate == 2.5e-5);
  CHECK(result.embedding.vector == std::vector<double>{2.0});
  CHECK(backend.inputs == std::vector<double>{2.0, 2.0, 2.0, 2.0, 2.0});
}

TEST_CASE("label decay follows the cycle index") {
  ScriptedBackend backend({});
  auto scorers = identity_scorers();
  const Pool reservoir(PoolName::D_SI, 1);
  auto config = scripted_config(4);
  config.max_evals_per_cycle = 1;
  const EngineContext ctx{backend, scorers, reservoir, config};
  CycleState s = initial_state(config, line_pool(PoolName::W, 10, 6.0, "w"), line_pool(PoolName::X_T, 1, 2.0, "x"));
  for (int n = 1; n <= 4; ++n) {
    s = run_cycle(s, ctx);
    CHECK(*s.training[std::size_t(n)].aesthetic_label == doctest::Approx(10.0 - n / 4.0 * 4.0));
  }
}

TEST_CASE("auxiliary sets are rebuilt each cycle") {
  Rng rng(1);
  const auto reservoir = testing::random_pool(PoolName::D_SI, 6, 2, rng, "r");
  const auto web = testing::random_pool(PoolName::W, 30, 2, rng, "w");
  const auto init = testing::random_pool(PoolName::X_T, 3, 2, rng, "x");
  SyntheticBackend backend(SyntheticWorld{{1.0, 1.0}, 2.0, 0.3, 0});
  BuiltinScorers scorers;
  auto config = scripted_config(3);
  config.budget = 2;
  const EngineContext ctx{backend, scorers, reservoir, config};
  CycleState s = initial_state(config, web, init);
  for (int k = 1; k <= 3; ++k) {
    const std::size_t xt = s.training.size();
    s = run_cycle(s, ctx);
    CHECK(s.generated_null.size() == xt);
    CHECK(s.similar.size() == std::min<std::size_t>(xt, 6));
    for (const auto& x : s.similar.samples()) {
      CHECK(*x.aesthetic_label == 5.0);
      CHECK(x.provenance == Provenance::similar_category);
      CHECK(reservoir.contains(x.id));
    }
    CHECK(s.training.size() == xt + 2);
  }
}

TEST_CASE("strategies, exhaustion and determinism on the synthetic world") {
  RunConfig base;
  base.cycles = 5;
  base.data.world.web_size = 120;
  const auto ds = build_synthetic_dataset(base.data.world);

  SUBCASE("identical inputs give identical states") {
    const auto a = run_with_pools(base, ds.world, ds.web, ds.initial, ds.similar);
    const auto b = run_with_pools(base, ds.world, ds.web, ds.initial, ds.similar);
    CHECK(serialize_state(a.final_state) == serialize_state(b.final_state));
    CHECK(a.final_state.training.size() == 10 + 10 * std::size_t(a.final_state.cycle_index));
  }
  SUBCASE("resuming from a snapshot matches an uninterrupted run") {
    SyntheticBackend backend(ds.world);
    BuiltinScorers scorers;
    const EngineContext ctx{backend, scorers, ds.similar, base};
    CycleState s = initial_state(base, ds.web, ds.initial);
    const auto straight = run(s, ctx).final_state;
    s = run_cycle(s, ctx);
    s = run_cycle(s, ctx);
    const auto resumed = run(deserialize_state(serialize_state(s)), ctx).final_state;
    CHECK(serialize_state(resumed) == serialize_state(straight));
  }
  SUBCASE("full takes the whole pool once") {
    auto c = base;
    c.strategy = AcquisitionStrategy::full;
    const auto r = run_with_pools(c, ds.world, ds.web, ds.initial, ds.similar);
    REQUIRE(!r.report.cycles.empty());
    CHECK(r.report.cycles[0].selected.size() == 120);
    CHECK(r.final_state.web.empty());
    CHECK(r.final_state.training.size() == 130);
  }
  SUBCASE("every budgeted strategy moves B per cycle") {
    for (auto k : {AcquisitionStrategy::coti, AcquisitionStrategy::rand, AcquisitionStrategy::aesthetic_only,
                   AcquisitionStrategy::concept_only, AcquisitionStrategy::generation_proxy}) {
      auto c = base;
      c.strategy = k;
      const auto r = run_with_pools(c, ds.world, ds.web, ds.initial, ds.similar);
      for (const auto& rec : r.report.cycles) {
        CHECK(rec.selected.size() == 10);
        CHECK(rec.training_size + rec.web_size == 130);
      }
    }
  }
  SUBCASE("a small pool runs dry") {
    auto c = base;
    c.data.world.web_size = 25;
    const auto small = build_synthetic_dataset(c.data.world);
    const auto r = run_with_pools(c, small.world, small.web, small.initial, small.similar);
    CHECK(r.report.outcome == RunOutcome::exhausted_pool);
    CHECK(r.final_state.web.size() == 5);
    SyntheticBackend backend(small.world);
    BuiltinScorers scorers;
    const EngineContext ctx{backend, scorers, small.similar, c};
    CHECK(error_kind([&] { run_cycle(r.final_state, ctx); }) == ErrorKind::ExhaustedPool);
  }
  SUBCASE("fixed schedule trains at one rate") {
    auto c = base;
    c.schedule_mode = ScheduleMode::fixed;
    const auto r = run_with_pools(c, ds.world, ds.web, ds.initial, ds.similar);
    for (const auto& rec : r.report.cycles) {
      CHECK(rec.trace.size() == 10);
      for (const auto& t : rec.trace) CHECK(t.learning_rate == 5e-4);
    }
  }
  SUBCASE("appendix preset checkpoints every 50 epochs") {
    auto c = base;
    c.preset = SchedulePreset::appendix;
    c.appendix.max_subcycles = 3;
    const auto r = run_with_pools(c, ds.world, ds.web, ds.initial, ds.similar);
    REQUIRE(!r.report.cycles.empty());
    for (const auto& rec : r.report.cycles) {
      CHECK(rec.phi_end >= rec.phi_start);
      for (const auto& t : rec.trace) CHECK(t.epoch % 50 == 0);
    }
  }
  SUBCASE("empty initial pool") {
    CHECK(error_kind([&] { initial_state(base, ds.web, Pool(PoolName::X_T, ds.web.dimension())); }) ==
          ErrorKind::EmptyTrainingPool);
  }
}

TEST_CASE("paper preset pool sizes") {
  const auto c = paper_preset();
  const auto r = run_from_config(c);
  REQUIRE(r.report.cycles.size() == 20);
  for (std::size_t k = 1; k <= r.report.cycles.size(); ++k) {
    CHECK(r.report.cycles[k - 1].training_size == 10 + 10 * k);
    CHECK(r.report.cycles[k - 1].web_size == 1000 - 10 * k);
  }
}
