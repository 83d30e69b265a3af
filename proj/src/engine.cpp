#include "coti/engine.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "coti/errors.hpp"
#include "coti/plugin.hpp"
#include "coti/synthetic.hpp"

namespace coti {

std::string_view to_string(RunOutcome o) noexcept {
  switch (o) {
    case RunOutcome::completed: return "completed";
    case RunOutcome::converged: return "converged";
    case RunOutcome::exhausted_pool: return "exhausted_pool";
  }
  return "completed";
}

namespace {

bool is_budgeted(AcquisitionStrategy s) { return s != AcquisitionStrategy::full; }

Pool relabeled(const Pool& pool, PoolName name, Provenance provenance, std::optional<double> label) {
  std::vector<Sample> out(pool.samples().begin(), pool.samples().end());
  for (auto& s : out) {
    s.provenance = provenance;
    s.aesthetic_label = label;
  }
  return Pool(name, pool.dimension(), std::move(out));
}

Pool resample_similar(const Pool& reservoir, std::size_t count, Rng rng, double label, std::size_t dimension) {
  if (reservoir.empty() || count == 0) return Pool(PoolName::D_SI, dimension);
  std::vector<std::size_t> order(reservoir.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(std::min(count, order.size()));
  std::vector<Sample> picked;
  picked.reserve(order.size());
  for (auto i : order) picked.push_back(reservoir[i]);
  return relabeled(Pool(PoolName::D_SI, dimension, std::move(picked)), PoolName::D_SI, Provenance::similar_category,
                   label);
}

// Everything the inner training loop needs to score a candidate embedding.
class Evaluator {
 public:
  Evaluator(const EngineContext& ctx, std::uint64_t seed, int cycle)
      : ctx_(ctx), seed_(derive_seed(seed, Stream::EmbeddingGeneration, static_cast<std::uint64_t>(cycle))),
        prefix_(fmt::format("ti{}_", cycle)) {}

  struct Result {
    Pool generated;
    Gamma gamma;
    double phi;
  };

  // Common random numbers: every candidate of a cycle is rendered with
  // the same generator noise, so phi differences come from the embedding.
  Result operator()(const Embedding& e) const {
    Rng rng(seed_);
    Pool generated = ctx_.backend.generate(e, ctx_.config.generated_size, rng, prefix_);
    const Gamma gamma = compute_gamma(generated, ctx_.scorers);
    return {std::move(generated), gamma, indicator(gamma)};
  }

 private:
  const EngineContext& ctx_;
  std::uint64_t seed_;
  std::string prefix_;
};

std::vector<std::string> choose_batch(const CycleState& state, const EngineContext& ctx, const Pool& generated,
                                      const Gamma& gamma, int cycle) {
  const auto& cfg = ctx.config;
  const Pool& web = state.web;
  switch (cfg.strategy) {
    case AcquisitionStrategy::full: {
      std::vector<std::string> all;
      all.reserve(web.size());
      for (const auto& s : web.samples()) all.push_back(s.id);
      return all;
    }
    case AcquisitionStrategy::rand: {
      std::vector<std::string> ids;
      ids.reserve(web.size());
      for (const auto& s : web.samples()) ids.push_back(s.id);
      Rng rng = make_rng(state.rng_seed, Stream::RandomSelection, static_cast<std::uint64_t>(cycle));
      std::shuffle(ids.begin(), ids.end(), rng);
      ids.resize(cfg.budget);
      return ids;
    }
    case AcquisitionStrategy::coti:
      return select_top_b(web, score_pool(web, ctx.scorers, gamma, cfg.variant), cfg.budget);
    case AcquisitionStrategy::aesthetic_only:
    case AcquisitionStrategy::concept_only:
    case AcquisitionStrategy::generation_proxy: {
      ScoreReport report;
      report.gamma = gamma;
      report.variant = cfg.variant;
      std::vector<double> single;
      if (cfg.strategy == AcquisitionStrategy::aesthetic_only) {
        single = ctx.scorers.aesthetic_scores(web.samples());
      } else if (cfg.strategy == AcquisitionStrategy::concept_only) {
        single = ctx.scorers.concept_scores(web.samples());
      } else {
        // Perceptual-distance analogue: prefer samples far from what the
        // embedding currently renders.
        for (const auto& s : web.samples()) {
          double acc = 0.0;
          for (const auto& g : generated.samples()) acc += euclidean(s.features, g.features);
          single.push_back(acc / static_cast<double>(generated.size()));
        }
      }
      for (std::size_t i = 0; i < web.size(); ++i) report.entries.push_back({web[i].id, 0.0, 0.0, single[i]});
      return select_top_b(web, report, cfg.budget);
    }
  }
  return {};
}

struct TrainingOutcome {
  Embedding embedding;
  Evaluator::Result evaluation;
  ScheduleState schedule;
  ScheduleAction final_action = ScheduleAction::Continue;
  std::vector<double> accepted_phi;
  std::vector<TraceEntry> trace;
  int epochs = 0;
};

TrainingOutcome train_fixed(const Embedding& start, Evaluator::Result start_eval, const Evaluator& evaluate,
                            const Pool& training,
                            const EngineContext& ctx, int cycle, int epoch_base) {
  const auto& cfg = ctx.config;
  TrainingOutcome out{start, std::move(start_eval), begin_cycle(0)};
  out.accepted_phi.push_back(out.evaluation.phi);
  out.schedule.phi_history.push_back(out.evaluation.phi);
  const int interval = cfg.schedule.eval_interval_epochs;
  for (int done = 0; done < cfg.fixed_epochs_per_cycle; done += interval) {
    const int epochs = std::min(interval, cfg.fixed_epochs_per_cycle - done);
    out.embedding = ctx.backend.train(out.embedding, training, cfg.rates[0], epochs);
    out.epochs += epochs;
    out.schedule = advance_epochs(out.schedule, epochs);
    out.evaluation = evaluate(out.embedding);
    out.schedule.phi_history.push_back(out.evaluation.phi);
    out.accepted_phi.push_back(out.evaluation.phi);
    out.trace.push_back({cycle, epoch_base + out.epochs, out.evaluation.phi, cfg.rates[0], ScheduleAction::Continue, true});
  }
  return out;
}

TrainingOutcome train_main(const Embedding& start, Evaluator::Result start_eval, const Evaluator& evaluate,
                            const Pool& training,
                           const EngineContext& ctx, int cycle, int epoch_base, std::size_t start_lr) {
  const auto& cfg = ctx.config;
  TrainingOutcome out{start, std::move(start_eval), begin_cycle(start_lr)};
  out.schedule = step_schedule(out.schedule, out.evaluation.phi, cfg.schedule, cfg.rates).state;
  out.accepted_phi.push_back(out.evaluation.phi);
  const int interval = cfg.schedule.eval_interval_epochs;

  for (int eval = 0; eval < cfg.max_evals_per_cycle; ++eval) {
    const double lr = cfg.rates[out.schedule.lr_index];
    Embedding candidate = ctx.backend.train(out.embedding, training, lr, interval);
    out.epochs += interval;
    out.schedule = advance_epochs(out.schedule, interval);
    auto result = evaluate(candidate);
    const auto step = step_schedule(out.schedule, result.phi, cfg.schedule, cfg.rates);
    out.schedule = step.state;

    const bool declined = step.action == ScheduleAction::LowerLrAndFreeze || step.action == ScheduleAction::Stop;
    const bool accept = !declined && result.phi > out.accepted_phi.back();
    out.trace.push_back({cycle, epoch_base + out.epochs, result.phi, lr, step.action, accept});
    if (accept) {
      out.embedding = std::move(candidate);
      out.accepted_phi.push_back(result.phi);
      out.evaluation = std::move(result);
    }
    if (step.action == ScheduleAction::Stop) {
      out.final_action = ScheduleAction::Stop;
      return out;
    }
    if (step.action == ScheduleAction::AcquireNewBatch && out.schedule.freeze_remaining_epochs == 0) {
      out.final_action = ScheduleAction::AcquireNewBatch;
      return out;
    }
  }
  spdlog::debug("cycle {}: evaluation cap reached", cycle);
  return out;
}

TrainingOutcome train_appendix(const Embedding& start, Evaluator::Result start_eval, const Evaluator& evaluate,
                            const Pool& training,
                               const EngineContext& ctx, int cycle, int epoch_base, std::size_t start_lr) {
  const auto& cfg = ctx.config;
  TrainingOutcome out{start, std::move(start_eval), begin_cycle(start_lr)};
  out.schedule.phi_history.push_back(out.evaluation.phi);
  out.accepted_phi.push_back(out.evaluation.phi);
  const int step_epochs = cfg.appendix.checkpoint_epochs;
  const int checkpoints = cfg.appendix.subcycle_epochs / step_epochs;
  out.final_action = ScheduleAction::Stop;

  for (int sub = 0; sub < cfg.appendix.max_subcycles; ++sub) {
    const double lr = cfg.rates[out.schedule.lr_index];
    Embedding current = out.embedding;
    std::optional<Embedding> best;
    std::optional<Evaluator::Result> best_eval;
    int best_at = -1;
    const std::size_t first_entry = out.trace.size();
    for (int k = 0; k < checkpoints; ++k) {
      current = ctx.backend.train(current, training, lr, step_epochs);
      out.epochs += step_epochs;
      out.schedule = advance_epochs(out.schedule, step_epochs);
      auto result = evaluate(current);
      out.trace.push_back({cycle, epoch_base + out.epochs, result.phi, lr, ScheduleAction::Continue, false});
      if (!best_eval || result.phi > best_eval->phi) {
        best = current;
        best_eval = std::move(result);
        best_at = k;
      }
    }
    const bool improved = best_eval->phi > out.accepted_phi.back() + cfg.schedule.eps;
    out.schedule.phi_history.push_back(best_eval->phi);
    if (improved) {
      out.trace[first_entry + static_cast<std::size_t>(best_at)].accepted = true;
      out.embedding = std::move(*best);
      out.accepted_phi.push_back(best_eval->phi);
      out.evaluation = std::move(*best_eval);
    }
    ScheduleAction action = ScheduleAction::Continue;
    if (!(improved && best_at == checkpoints - 1)) {
      if (out.schedule.lr_index >= cfg.rates.min_index()) {
        action = ScheduleAction::Stop;
      } else {
        ++out.schedule.lr_index;
        out.schedule.freeze_remaining_epochs = cfg.schedule.freeze_epochs;
        action = ScheduleAction::LowerLrAndFreeze;
      }
    }
    out.trace.back().action = action;
    if (action == ScheduleAction::Stop) return out;
  }
  out.final_action = ScheduleAction::Continue;
  return out;
}

}  // namespace

CycleState initial_state(const RunConfig& config, const Pool& web, const Pool& initial) {
  validate(config);
  if (initial.empty()) throw Error(ErrorKind::EmptyTrainingPool, "initial X_T is empty");
  if (web.dimension() != initial.dimension()) {
    throw Error(ErrorKind::DimensionMismatch, "web and initial pools differ in dimension");
  }
  const std::size_t d = initial.dimension();
  CycleState s;
  std::vector<Sample> seeded(initial.samples().begin(), initial.samples().end());
  for (auto& sample : seeded) {
    if (!sample.aesthetic_label) sample.aesthetic_label = kMaxLabel;
  }
  s.training = Pool(PoolName::X_T, d, std::move(seeded));
  s.web = web.renamed(PoolName::W);
  s.generated_null = Pool(PoolName::D_TG, d);
  s.similar = Pool(PoolName::D_SI, d);
  s.generated = Pool(PoolName::X_TI, d);
  s.embedding = Embedding{centroid(s.training), 0, 0};
  s.schedule = begin_cycle(0);
  s.rng_seed = config.seed;
  s.config_hash = config_hash(config);
  return s;
}

CycleState run_cycle(const CycleState& state, const EngineContext& ctx, CycleRecord* record) {
  const auto& cfg = ctx.config;
  if (state.cycle_index >= cfg.cycles) {
    throw Error(ErrorKind::InvalidCycleIndex, fmt::format("all {} cycles already ran", cfg.cycles));
  }
  if (is_budgeted(cfg.strategy) && state.web.size() < cfg.budget) {
    throw Error(ErrorKind::ExhaustedPool, fmt::format("|W|={} < B={}", state.web.size(), cfg.budget));
  }
  const int cycle = state.cycle_index + 1;
  const auto cycle_u = static_cast<std::uint64_t>(cycle);
  const std::size_t d = state.training.dimension();
  CycleState next = state;

  // (a) auxiliary sets, regenerated every cycle.
  const std::size_t aux = cfg.auxiliary_size > 0 ? cfg.auxiliary_size : state.training.size();
  {
    Rng rng = make_rng(state.rng_seed, Stream::NullGeneration, cycle_u);
    const Embedding null_embedding{std::vector<double>(d, 0.0), 0, 0};
    next.generated_null = relabeled(ctx.backend.generate(null_embedding, aux, rng, fmt::format("tg{}_", cycle)),
                                    PoolName::D_TG, Provenance::generated_no_embedding, 0.0);
  }
  next.similar = resample_similar(ctx.similar_reservoir, aux,
                                  make_rng(state.rng_seed, Stream::SimilarResample, cycle_u), cfg.similar_label, d);

  // (b) scorers on the current X_T.
  const Pool negatives = next.generated_null.with_appended(next.similar.samples());
  ctx.scorers.refit(state.training, negatives);

  // (c) condition on the current embedding, acquire, decay labels.
  const Evaluator evaluate(ctx, state.rng_seed, cycle);
  auto start_eval = evaluate(state.embedding);
  const Gamma gamma = start_eval.gamma;
  const auto batch = choose_batch(state, ctx, start_eval.generated, gamma, cycle);
  std::vector<std::pair<std::string, double>> labels;
  if (!batch.empty()) {
    std::vector<Sample> picked;
    picked.reserve(batch.size());
    for (const auto& id : batch) {
      const Sample* s = state.web.find(id);
      if (!s) throw Error(ErrorKind::UnknownId, id);
      picked.push_back(*s);
    }
    const auto p = ctx.scorers.aesthetic_scores(picked);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      labels.emplace_back(batch[i], decay_label(std::clamp(p[i], 0.0, 10.0), cycle, cfg.cycles));
    }
  }
  auto moved = move_samples(state.web, state.training, batch);
  next.web = std::move(moved.src);
  next.training = moved.dst.with_labels(labels);

  // (d) scheduled embedding training on the extended X_T.
  const double phi_before = start_eval.phi;
  TrainingOutcome trained = [&] {
    if (cfg.schedule_mode == ScheduleMode::fixed) {
      return train_fixed(state.embedding, std::move(start_eval), evaluate, next.training, ctx, cycle,
                         state.total_epochs);
    }
    if (cfg.preset == SchedulePreset::main) {
      return train_main(state.embedding, std::move(start_eval), evaluate, next.training, ctx, cycle,
                        state.total_epochs, 0);
    }
    return train_appendix(state.embedding, std::move(start_eval), evaluate, next.training, ctx, cycle,
                          state.total_epochs, state.start_lr_index);
  }();

  // (e) bookkeeping.
  const double phi_end = trained.accepted_phi.back();
  next.embedding = trained.embedding;
  if (next.embedding != state.embedding) next.embedding.cycle_born = cycle;
  next.generated = trained.evaluation.generated.renamed(PoolName::X_TI);
  next.schedule = trained.schedule;
  next.total_epochs = state.total_epochs + trained.epochs;
  if (cfg.preset == SchedulePreset::appendix && cfg.schedule_mode == ScheduleMode::dynamic) {
    // A cycle that ends below the previous one starts the next lower.
    next.start_lr_index = state.start_lr_index;
    if (state.last_cycle_phi && phi_end < *state.last_cycle_phi) {
      next.start_lr_index = std::min(state.start_lr_index + 1, cfg.rates.min_index());
    }
  }
  next.last_cycle_phi = phi_end;
  next.cycle_index = cycle;

  if (record) {
    record->cycle = cycle;
    record->gamma = gamma;
    record->phi_start = phi_before;
    record->phi_end = phi_end;
    record->accepted_phi = trained.accepted_phi;
    record->selected = batch;
    record->training_size = next.training.size();
    record->web_size = next.web.size();
    record->final_action = trained.final_action;
    record->trace = std::move(trained.trace);
  }
  spdlog::info("cycle {}: gamma=({:.4f}, {:.4f}) phi {:.4f} -> {:.4f}, |X_T|={}, |W|={}, {}", cycle, gamma.gamma_aes,
               gamma.gamma_con, phi_before, phi_end, next.training.size(), next.web.size(),
               to_string(trained.final_action));
  return next;
}

RunResult run(const CycleState& initial, const EngineContext& ctx) {
  validate(ctx.config);
  RunResult result;
  CycleState state = initial;
  while (state.cycle_index < ctx.config.cycles) {
    if (is_budgeted(ctx.config.strategy) && state.web.size() < ctx.config.budget) {
      result.report.outcome = RunOutcome::exhausted_pool;
      result.report.note = fmt::format("ExhaustedPool: |W|={} < B={} before cycle {}", state.web.size(),
                                       ctx.config.budget, state.cycle_index + 1);
      break;
    }
    CycleRecord record;
    state = run_cycle(state, ctx, &record);
    const bool no_gain = record.accepted_phi.size() == 1;
    const bool stopped = record.final_action == ScheduleAction::Stop;
    result.report.cycles.push_back(std::move(record));
    if (stopped && no_gain) {
      result.report.outcome = RunOutcome::converged;
      result.report.note = fmt::format("no improvement at the minimum rate in cycle {}", state.cycle_index);
      break;
    }
  }
  result.embedding = state.embedding;
  result.final_state = std::move(state);
  return result;
}

RunResult run_from_config(const RunConfig& config) {
  validate(config);
  const auto& data = config.data;
  std::optional<SyntheticDataset> synthetic;
  Pool web(PoolName::W, data.world.dimension), initial(PoolName::X_T, data.world.dimension),
      similar(PoolName::D_SI, data.world.dimension);
  SyntheticWorld world{{}, data.world.trainer_rate, data.world.generation_noise, data.world.seed};
  if (data.synthetic) {
    synthetic = build_synthetic_dataset(data.world);
    world = synthetic->world;
    web = synthetic->web;
    initial = synthetic->initial;
    similar = synthetic->similar;
  } else {
    web = load_manifest(data.web_manifest, data.world.dimension, PoolName::W);
    initial = load_manifest(data.initial_manifest, data.world.dimension, PoolName::X_T);
    if (!data.similar_manifest.empty()) {
      similar = load_manifest(data.similar_manifest, data.world.dimension, PoolName::D_SI);
    }
  }
  return run_with_pools(config, world, web, initial, similar);
}

std::unique_ptr<ScoringSystem> make_scorers(const RunConfig& config) {
  if (config.scorer == "builtin") return std::make_unique<BuiltinScorers>(builtin_scorer_options(config));
  auto handle = std::make_shared<PluginHandle>(
      handshake(split_command(config.scorer.substr(7)), std::chrono::milliseconds(config.plugin_timeout_ms)));
  return std::make_unique<PluginScorers>(std::move(handle), builtin_scorer_options(config));
}

RunResult run_with_pools(const RunConfig& config, const SyntheticWorld& world, const Pool& web, const Pool& initial,
                         const Pool& similar) {
  SyntheticBackend backend(world);
  const auto scorers = make_scorers(config);
  const EngineContext ctx{backend, *scorers, similar, config};
  return run(initial_state(config, web, initial), ctx);
}

}  // namespace coti
