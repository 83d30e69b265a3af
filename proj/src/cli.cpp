#include "coti/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>

#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "coti/engine.hpp"
#include "coti/errors.hpp"
#include "coti/metrics.hpp"
#include "coti/reports.hpp"

namespace coti {

namespace {

namespace fs = std::filesystem;

void configure_logging() {
  auto logger = spdlog::get("coti");
  if (!logger) {
    logger = spdlog::stderr_color_mt("coti");
    spdlog::set_default_logger(logger);
  }
  const char* env = std::getenv("COTI_LOG");
  const std::string level = env ? env : "error";
  if (level == "debug") {
    spdlog::set_level(spdlog::level::debug);
  } else if (level == "info") {
    spdlog::set_level(spdlog::level::info);
  } else {
    spdlog::set_level(spdlog::level::err);
  }
}

// Flags shared by every command; unset ones leave the config untouched.
struct Overrides {
  std::string config_path;
  bool paper = false;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> budget;
  std::optional<int> cycles;
  std::optional<std::string> matcher;
  std::optional<std::string> variant;
  std::optional<std::string> scorer;
  std::optional<std::string> schedule;
  std::optional<std::string> schedule_mode;
  std::optional<std::string> strategy;

  void attach(CLI::App& app) {
    app.add_option("--config", config_path, "RunConfig JSON file");
    app.add_option("--seed", seed, "run seed");
    app.add_option("--budget", budget, "samples acquired per cycle");
    app.add_option("--cycles", cycles, "number of cycles");
    app.add_option("--matcher", matcher, "min_cosine | vlad | set_distance | classifier");
    app.add_option("--variant", variant, "linear | sin");
    app.add_option("--scorer", scorer, "builtin | plugin:<command>");
    app.add_option("--schedule", schedule, "main | appendix");
    app.add_option("--schedule-mode", schedule_mode, "dynamic | fixed");
    app.add_option("--strategy", strategy, "coti | rand | full | aesthetic | concept | generation");
  }

  RunConfig resolve() const {
    RunConfig c = paper ? paper_preset() : RunConfig{};
    if (!config_path.empty()) {
      c = load_run_config(config_path);
      if (paper) {
        // The preset wins over the file for the protocol constants.
        const RunConfig p = paper_preset();
        c.budget = p.budget;
        c.cycles = p.cycles;
        c.rates = p.rates;
        c.data.world.web_size = p.data.world.web_size;
        c.data.world.initial_size = p.data.world.initial_size;
      }
    }
    if (seed) c.seed = *seed;
    if (budget) c.budget = *budget;
    if (cycles) c.cycles = *cycles;
    if (matcher) c.matcher = matcher_kind_from_string(*matcher);
    if (variant) c.variant = integration_variant_from_string(*variant);
    if (scorer) c.scorer = *scorer;
    if (schedule) c.preset = schedule_preset_from_string(*schedule);
    if (schedule_mode) c.schedule_mode = schedule_mode_from_string(*schedule_mode);
    if (strategy) c.strategy = acquisition_strategy_from_string(*strategy);
    validate(c);
    return c;
  }
};

struct Inputs {
  SyntheticWorld world;
  Pool web{PoolName::W, 0};
  Pool initial{PoolName::X_T, 0};
  Pool similar{PoolName::D_SI, 0};
};

Inputs load_inputs(const RunConfig& c) {
  Inputs in;
  const auto& data = c.data;
  const std::size_t d = data.world.dimension;
  if (data.synthetic) {
    auto ds = build_synthetic_dataset(data.world);
    in.world = std::move(ds.world);
    in.web = std::move(ds.web);
    in.initial = std::move(ds.initial);
    in.similar = std::move(ds.similar);
  } else {
    in.world = SyntheticWorld{std::vector<double>(d, 0.0), data.world.trainer_rate, data.world.generation_noise,
                              data.world.seed};
    in.web = load_manifest(data.web_manifest, d, PoolName::W);
    in.initial = load_manifest(data.initial_manifest, d, PoolName::X_T);
    in.similar = data.similar_manifest.empty() ? Pool(PoolName::D_SI, d)
                                               : load_manifest(data.similar_manifest, d, PoolName::D_SI);
  }
  return in;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::IoFailure, fmt::format("cannot write {}", path.string()));
  return f;
}

void write_text(const fs::path& path, const std::string& text) {
  auto f = open_out(path);
  f << text;
  if (!f) throw Error(ErrorKind::IoFailure, fmt::format("cannot write {}", path.string()));
}

void write_effective_config(const fs::path& dir, const RunConfig& c) {
  write_text(dir / "config.json", to_json(c).dump(2) + "\n");
}

fs::path ensure_dir(const std::string& dir) {
  fs::path p = dir.empty() ? fs::path(".") : fs::path(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw Error(ErrorKind::IoFailure, fmt::format("cannot create {}: {}", p.string(), ec.message()));
  return p;
}

// Writes the snapshot and prints its digest.
void emit_snapshot(const fs::path& path, const CycleState& state, std::ostream& out) {
  const std::string bytes = serialize_state(state);
  write_text(path, bytes);
  out << "snapshot " << path.string() << " sha256 " << sha256_hex(bytes) << "\n";
}

CycleState load_or_init(const std::string& state_path, const RunConfig& c, const Inputs& in) {
  if (state_path.empty()) return initial_state(c, in.web, in.initial);
  return restore_state(state_path, config_hash(c));
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  configure_logging();
  CLI::App app{"Active-learning engine for controllable textual inversion", "coti"};
  app.require_subcommand(1);

  Overrides ov;
  std::string out_dir = ".";
  std::string state_path;
  std::string strategies = "coti,rand,full";
  std::size_t seed_count = 20;
  std::uint64_t first_seed = 1;
  std::string preset;

  auto common = [&](CLI::App* sub) {
    ov.attach(*sub);
    sub->add_option("--out-dir,--out", out_dir, "output directory");
    sub->add_option("--preset", preset, "paper: protocol constants")->check(CLI::IsMember({"paper"}));
  };
  auto* init = app.add_subcommand("init", "build pools and the initial snapshot");
  common(init);
  auto* score = app.add_subcommand("score", "score the web pool for the next cycle");
  common(score);
  score->add_option("--state", state_path, "snapshot to score from");
  auto* cycle = app.add_subcommand("cycle", "run one cycle");
  common(cycle);
  cycle->add_option("--state", state_path, "snapshot to resume from");
  auto* run_cmd = app.add_subcommand("run", "run all remaining cycles");
  common(run_cmd);
  run_cmd->add_option("--state", state_path, "snapshot to resume from");
  auto* simulate = app.add_subcommand("simulate", "compare strategies over synthetic worlds");
  common(simulate);
  simulate->add_option("--strategies", strategies, "comma list, e.g. coti,coti:fixed,rand");
  simulate->add_option("--seeds", seed_count, "number of world seeds")->check(CLI::PositiveNumber);
  simulate->add_option("--first-seed", first_seed, "first world seed");
  auto* report = app.add_subcommand("report", "summarize a snapshot");
  report->add_option("--state", state_path, "snapshot")->required();
  // CLI11 parses right to left from a reversed vector.
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 2;
  }
  ov.paper = preset == "paper";

  try {
    if (*report) {
      const CycleState s = restore_state(state_path);
      out << fmt::format("cycle {}\n|W| {}\n|X_T| {}\n|D_TG| {}\n|D_SI| {}\n|X_TI| {}\nlr_index {}\nconfig {}\n",
                         s.cycle_index, s.web.size(), s.training.size(), s.generated_null.size(), s.similar.size(),
                         s.generated.size(), s.schedule.lr_index, s.config_hash);
      out << fmt::format("embedding [{}]\n", fmt::join(s.embedding.vector, ", "));
      return 0;
    }

    const RunConfig config = ov.resolve();
    const fs::path dir = ensure_dir(out_dir);
    write_effective_config(dir, config);

    if (*simulate) {
      const auto specs = parse_strategies(strategies);
      std::vector<std::uint64_t> seeds;
      for (std::size_t i = 0; i < seed_count; ++i) seeds.push_back(first_seed + i);
      const auto table = compare_strategies(specs, config, seeds);
      {
        auto f = open_out(dir / "comparison.csv");
        write_comparison_csv(f, table);
      }
      {
        auto f = open_out(dir / "summary.csv");
        write_summary_csv(f, table);
      }
      write_summary_csv(out, table);
      return 0;
    }

    const Inputs in = load_inputs(config);
    if (*init) {
      write_manifest(in.web, dir / "web.jsonl");
      write_manifest(in.initial, dir / "initial.jsonl");
      write_manifest(in.similar, dir / "similar.jsonl");
      emit_snapshot(dir / "state.json", initial_state(config, in.web, in.initial), out);
      return 0;
    }

    SyntheticBackend backend(in.world);
    const auto scorers = make_scorers(config);
    const EngineContext ctx{backend, *scorers, in.similar, config};
    CycleState state = load_or_init(state_path, config, in);

    if (*score) {
      // Same scorers and conditioning the next cycle would acquire with.
      CycleRecord record;
      const CycleState next = run_cycle(state, ctx, &record);
      ScoreReport rep = score_pool(state.web, *scorers, record.gamma, config.variant);
      auto f = open_out(dir / "scores.csv");
      write_score_report_csv(f, rep, record.selected);
      out << fmt::format("gamma ({}, {}) selected {}\n", format_double(record.gamma.gamma_aes),
                         format_double(record.gamma.gamma_con), fmt::join(record.selected, ","));
      (void)next;
      return 0;
    }

    RunReport rep;
    if (*cycle) {
      CycleRecord record;
      state = run_cycle(state, ctx, &record);
      rep.cycles.push_back(std::move(record));
    } else {
      auto result = run(state, ctx);
      state = std::move(result.final_state);
      rep = std::move(result.report);
      out << "outcome " << to_string(rep.outcome) << (rep.note.empty() ? "" : " (" + rep.note + ")") << "\n";
    }
    {
      auto f = open_out(dir / "cycles.csv");
      write_cycle_report_csv(f, rep);
    }
    {
      auto f = open_out(dir / "trace.csv");
      write_schedule_trace_csv(f, rep);
    }
    emit_snapshot(dir / "state.json", state, out);
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace coti
