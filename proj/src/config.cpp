#include "coti/config.hpp"

#include <fstream>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "coti/errors.hpp"

namespace coti {

std::string_view to_string(AcquisitionStrategy s) noexcept {
  switch (s) {
    case AcquisitionStrategy::coti: return "coti";
    case AcquisitionStrategy::rand: return "rand";
    case AcquisitionStrategy::full: return "full";
    case AcquisitionStrategy::aesthetic_only: return "aesthetic";
    case AcquisitionStrategy::concept_only: return "concept";
    case AcquisitionStrategy::generation_proxy: return "generation";
  }
  return "coti";
}

AcquisitionStrategy acquisition_strategy_from_string(std::string_view s) {
  for (auto k : {AcquisitionStrategy::coti, AcquisitionStrategy::rand, AcquisitionStrategy::full,
                 AcquisitionStrategy::aesthetic_only, AcquisitionStrategy::concept_only,
                 AcquisitionStrategy::generation_proxy}) {
    if (to_string(k) == s) return k;
  }
  throw Error(ErrorKind::InvalidConfig, fmt::format("unknown strategy '{}'", s));
}

std::string_view to_string(ScheduleMode m) noexcept { return m == ScheduleMode::dynamic ? "dynamic" : "fixed"; }

ScheduleMode schedule_mode_from_string(std::string_view s) {
  if (s == "dynamic") return ScheduleMode::dynamic;
  if (s == "fixed") return ScheduleMode::fixed;
  throw Error(ErrorKind::InvalidConfig, fmt::format("unknown schedule mode '{}'", s));
}

std::string_view to_string(SchedulePreset p) noexcept { return p == SchedulePreset::main ? "main" : "appendix"; }

SchedulePreset schedule_preset_from_string(std::string_view s) {
  if (s == "main") return SchedulePreset::main;
  if (s == "appendix") return SchedulePreset::appendix;
  throw Error(ErrorKind::InvalidConfig, fmt::format("unknown schedule preset '{}'", s));
}

void validate(const RunConfig& c) {
  const auto bad = [](const std::string& why) { throw Error(ErrorKind::InvalidConfig, why); };
  if (c.budget < 1) bad("budget must be >= 1");
  if (c.cycles < 1) bad("cycles must be >= 1");
  if (c.schedule.eval_interval_epochs < 1) bad("eval_interval_epochs must be >= 1");
  if (c.schedule.plateau_rounds < 1) bad("plateau_rounds must be >= 1");
  if (c.schedule.freeze_epochs < 0) bad("freeze_epochs must be >= 0");
  if (c.schedule.eps < 0 || c.schedule.plateau_delta < 0) bad("eps and plateau_delta must be >= 0");
  if (c.appendix.checkpoint_epochs < 1 || c.appendix.subcycle_epochs < c.appendix.checkpoint_epochs) {
    bad("appendix schedule needs 1 <= checkpoint_epochs <= subcycle_epochs");
  }
  if (c.appendix.max_subcycles < 1) bad("max_subcycles must be >= 1");
  if (c.fixed_epochs_per_cycle < 1) bad("fixed_epochs_per_cycle must be >= 1");
  if (c.max_evals_per_cycle < 1) bad("max_evals_per_cycle must be >= 1");
  if (c.generated_size < 1) bad("generated_size must be >= 1");
  if (!(c.aesthetic_lambda >= 0)) bad("aesthetic_lambda must be >= 0");
  if (!(c.similar_label >= 0 && c.similar_label <= 10)) bad("similar_label must be in [0, 10]");
  if (c.scorer != "builtin" && !c.scorer.starts_with("plugin:")) bad("scorer must be builtin or plugin:<command>");
  if (c.plugin_timeout_ms < 1) bad("plugin_timeout_ms must be >= 1");
  if (!c.data.synthetic && (c.data.web_manifest.empty() || c.data.initial_manifest.empty())) {
    bad("manifest data needs web_manifest and initial_manifest");
  }
}

RunConfig paper_preset() {
  RunConfig c;
  c.budget = 10;
  c.cycles = 20;
  c.rates = LearningRateGroup::protocol_default();
  c.data.world.initial_size = 10;
  c.data.world.web_size = 1000;
  return c;
}

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
  j["budget"] = c.budget;
  j["cycles"] = c.cycles;
  j["learning_rates"] = c.rates.rates();
  j["schedule"] = {{"eps", c.schedule.eps},
                   {"plateau_delta", c.schedule.plateau_delta},
                   {"plateau_rounds", c.schedule.plateau_rounds},
                   {"eval_interval_epochs", c.schedule.eval_interval_epochs},
                   {"freeze_epochs", c.schedule.freeze_epochs}};
  j["schedule_preset"] = std::string(to_string(c.preset));
  j["appendix_schedule"] = {{"subcycle_epochs", c.appendix.subcycle_epochs},
                            {"checkpoint_epochs", c.appendix.checkpoint_epochs},
                            {"max_subcycles", c.appendix.max_subcycles}};
  j["schedule_mode"] = std::string(to_string(c.schedule_mode));
  j["fixed_epochs_per_cycle"] = c.fixed_epochs_per_cycle;
  j["max_evals_per_cycle"] = c.max_evals_per_cycle;
  j["strategy"] = std::string(to_string(c.strategy));
  j["matcher"] = std::string(to_string(c.matcher));
  j["strict_paper_normalization"] = c.strict_paper_normalization;
  j["variant"] = std::string(to_string(c.variant));
  j["aesthetic_lambda"] = c.aesthetic_lambda;
  j["similar_label"] = c.similar_label;
  j["scorer"] = c.scorer;
  j["plugin_timeout_ms"] = c.plugin_timeout_ms;
  j["seed"] = c.seed;
  j["generated_size"] = c.generated_size;
  j["auxiliary_size"] = c.auxiliary_size;
  j["data"] = {{"synthetic", c.data.synthetic},
               {"world", to_json(c.data.world)},
               {"web_manifest", c.data.web_manifest},
               {"initial_manifest", c.data.initial_manifest},
               {"similar_manifest", c.data.similar_manifest}};
  return j;
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  try {
    RunConfig c;
    c.budget = j.value("budget", c.budget);
    c.cycles = j.value("cycles", c.cycles);
    if (j.contains("learning_rates")) c.rates = LearningRateGroup(j.at("learning_rates").get<std::vector<double>>());
    if (const auto s = j.find("schedule"); s != j.end()) {
      c.schedule.eps = s->value("eps", c.schedule.eps);
      c.schedule.plateau_delta = s->value("plateau_delta", c.schedule.plateau_delta);
      c.schedule.plateau_rounds = s->value("plateau_rounds", c.schedule.plateau_rounds);
      c.schedule.eval_interval_epochs = s->value("eval_interval_epochs", c.schedule.eval_interval_epochs);
      c.schedule.freeze_epochs = s->value("freeze_epochs", c.schedule.freeze_epochs);
    }
    c.preset = schedule_preset_from_string(j.value("schedule_preset", std::string("main")));
    if (const auto a = j.find("appendix_schedule"); a != j.end()) {
      c.appendix.subcycle_epochs = a->value("subcycle_epochs", c.appendix.subcycle_epochs);
      c.appendix.checkpoint_epochs = a->value("checkpoint_epochs", c.appendix.checkpoint_epochs);
      c.appendix.max_subcycles = a->value("max_subcycles", c.appendix.max_subcycles);
    }
    c.schedule_mode = schedule_mode_from_string(j.value("schedule_mode", std::string("dynamic")));
    c.fixed_epochs_per_cycle = j.value("fixed_epochs_per_cycle", c.fixed_epochs_per_cycle);
    c.max_evals_per_cycle = j.value("max_evals_per_cycle", c.max_evals_per_cycle);
    c.strategy = acquisition_strategy_from_string(j.value("strategy", std::string("coti")));
    c.matcher = matcher_kind_from_string(j.value("matcher", std::string("min_cosine")));
    c.strict_paper_normalization = j.value("strict_paper_normalization", c.strict_paper_normalization);
    c.variant = integration_variant_from_string(j.value("variant", std::string("linear")));
    c.aesthetic_lambda = j.value("aesthetic_lambda", c.aesthetic_lambda);
    c.similar_label = j.value("similar_label", c.similar_label);
    c.scorer = j.value("scorer", c.scorer);
    c.plugin_timeout_ms = j.value("plugin_timeout_ms", c.plugin_timeout_ms);
    c.seed = j.value("seed", c.seed);
    c.generated_size = j.value("generated_size", c.generated_size);
    c.auxiliary_size = j.value("auxiliary_size", c.auxiliary_size);
    if (const auto d = j.find("data"); d != j.end()) {
      c.data.synthetic = d->value("synthetic", c.data.synthetic);
      if (d->contains("world")) c.data.world = world_config_from_json(d->at("world"));
      c.data.web_manifest = d->value("web_manifest", c.data.web_manifest);
      c.data.initial_manifest = d->value("initial_manifest", c.data.initial_manifest);
      c.data.similar_manifest = d->value("similar_manifest", c.data.similar_manifest);
    }
    validate(c);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidConfig, e.what());
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MissingFile, path.string());
  try {
    return run_config_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidConfig, fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::string canonical_config(const RunConfig& c) { return to_json(c).dump(); }

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::NumericalFailure, "sha256 failed");
  }
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", digest[i]);
  return out;
}

std::string config_hash(const RunConfig& c) { return sha256_hex(canonical_config(c)); }

BuiltinScorerOptions builtin_scorer_options(const RunConfig& c) {
  BuiltinScorerOptions o;
  o.matcher = c.matcher;
  o.aesthetic.lambda = c.aesthetic_lambda;
  o.matcher_options.strict_paper_normalization = c.strict_paper_normalization;
  return o;
}

}  // namespace coti
