#include "coti/datapool.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

#include "coti/errors.hpp"

namespace coti {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::MissingFile: return "MissingFile";
    case ErrorKind::MalformedRecord: return "MalformedRecord";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::DuplicateId: return "DuplicateId";
    case ErrorKind::UnknownId: return "UnknownId";
    case ErrorKind::IoFailure: return "IoFailure";
    case ErrorKind::ConfigMismatch: return "ConfigMismatch";
    case ErrorKind::EmptyPositives: return "EmptyPositives";
    case ErrorKind::UnlabeledSample: return "UnlabeledSample";
    case ErrorKind::EmptyReference: return "EmptyReference";
    case ErrorKind::MissingNegatives: return "MissingNegatives";
    case ErrorKind::EmptyGeneratedSet: return "EmptyGeneratedSet";
    case ErrorKind::BudgetExceedsPool: return "BudgetExceedsPool";
    case ErrorKind::MissingScore: return "MissingScore";
    case ErrorKind::InvalidCycleIndex: return "InvalidCycleIndex";
    case ErrorKind::EmptyTrainingPool: return "EmptyTrainingPool";
    case ErrorKind::ExhaustedPool: return "ExhaustedPool";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::InvalidR: return "InvalidR";
    case ErrorKind::DegeneratePool: return "DegeneratePool";
    case ErrorKind::NumericalFailure: return "NumericalFailure";
    case ErrorKind::SpawnFailure: return "SpawnFailure";
    case ErrorKind::Timeout: return "Timeout";
    case ErrorKind::VersionMismatch: return "VersionMismatch";
    case ErrorKind::MalformedReply: return "MalformedReply";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::PluginError: return "PluginError";
  }
  return "Unknown";
}

std::string_view to_string(Provenance p) noexcept {
  switch (p) {
    case Provenance::web: return "web";
    case Provenance::initial: return "initial";
    case Provenance::generated_no_embedding: return "generated_no_embedding";
    case Provenance::similar_category: return "similar_category";
    case Provenance::generated_by_embedding: return "generated_by_embedding";
  }
  return "web";
}

Provenance provenance_from_string(std::string_view s) {
  for (auto p : {Provenance::web, Provenance::initial, Provenance::generated_no_embedding,
                 Provenance::similar_category, Provenance::generated_by_embedding}) {
    if (to_string(p) == s) return p;
  }
  throw Error(ErrorKind::MalformedRecord, fmt::format("unknown provenance '{}'", s));
}

std::string_view to_string(PoolName p) noexcept {
  switch (p) {
    case PoolName::W: return "W";
    case PoolName::X_T: return "X_T";
    case PoolName::D_TG: return "D_TG";
    case PoolName::D_SI: return "D_SI";
    case PoolName::X_TI: return "X_TI";
  }
  return "W";
}

PoolName pool_name_from_string(std::string_view s) {
  for (auto p : {PoolName::W, PoolName::X_T, PoolName::D_TG, PoolName::D_SI, PoolName::X_TI}) {
    if (to_string(p) == s) return p;
  }
  throw Error(ErrorKind::MalformedRecord, fmt::format("unknown pool name '{}'", s));
}

namespace {

void check_label(const Sample& s) {
  if (s.aesthetic_label && !(*s.aesthetic_label >= 0.0 && *s.aesthetic_label <= kMaxLabel)) {
    throw Error(ErrorKind::MalformedRecord,
                fmt::format("label {} of '{}' outside [0, 10]", *s.aesthetic_label, s.id));
  }
}

}  // namespace

Pool::Pool(PoolName name, std::size_t dimension) : name_(name), dimension_(dimension) {}

Pool::Pool(PoolName name, std::size_t dimension, std::vector<Sample> samples)
    : name_(name), dimension_(dimension), samples_(std::move(samples)) {
  std::unordered_set<std::string_view> seen;
  seen.reserve(samples_.size());
  for (const auto& s : samples_) {
    if (s.features.size() != dimension_) {
      throw Error(ErrorKind::DimensionMismatch,
                  fmt::format("sample '{}' has {} features, pool expects {}", s.id, s.features.size(),
                              dimension_));
    }
    check_label(s);
    if (!seen.insert(s.id).second) throw Error(ErrorKind::DuplicateId, s.id);
  }
}

bool Pool::contains(std::string_view id) const { return find(id) != nullptr; }

const Sample* Pool::find(std::string_view id) const {
  for (const auto& s : samples_) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

Pool Pool::with_appended(std::span<const Sample> extra) const {
  std::vector<Sample> all = samples_;
  all.insert(all.end(), extra.begin(), extra.end());
  return Pool(name_, dimension_, std::move(all));
}

Pool Pool::renamed(PoolName name) const {
  Pool p = *this;
  p.name_ = name;
  return p;
}

Pool Pool::with_labels(std::span<const std::pair<std::string, double>> labels) const {
  std::unordered_map<std::string_view, double> by_id;
  for (const auto& [id, label] : labels) by_id[id] = label;
  std::vector<Sample> out = samples_;
  for (auto& s : out) {
    if (auto it = by_id.find(s.id); it != by_id.end()) s.aesthetic_label = it->second;
  }
  return Pool(name_, dimension_, std::move(out));
}

nlohmann::json to_json(const Sample& s) {
  nlohmann::json j;
  j["id"] = s.id;
  j["features"] = s.features;
  j["provenance"] = std::string(to_string(s.provenance));
  if (s.aesthetic_label) j["label"] = *s.aesthetic_label;
  return j;
}

Sample sample_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::MalformedRecord, "record is not an object");
  Sample s;
  const auto id = j.find("id");
  if (id == j.end() || !id->is_string()) throw Error(ErrorKind::MalformedRecord, "missing string 'id'");
  s.id = id->get<std::string>();
  const auto feats = j.find("features");
  if (feats == j.end() || !feats->is_array()) {
    throw Error(ErrorKind::MalformedRecord, "missing array 'features'");
  }
  s.features.reserve(feats->size());
  for (const auto& v : *feats) {
    if (!v.is_number()) throw Error(ErrorKind::MalformedRecord, "non-numeric feature");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw Error(ErrorKind::MalformedRecord, "non-finite feature");
    s.features.push_back(x);
  }
  if (const auto prov = j.find("provenance"); prov != j.end()) {
    if (!prov->is_string()) throw Error(ErrorKind::MalformedRecord, "'provenance' must be a string");
    s.provenance = provenance_from_string(prov->get<std::string>());
  }
  if (const auto label = j.find("label"); label != j.end() && !label->is_null()) {
    if (!label->is_number()) throw Error(ErrorKind::MalformedRecord, "'label' must be a number");
    s.aesthetic_label = label->get<double>();
  }
  check_label(s);
  return s;
}

nlohmann::json to_json(const Pool& p) {
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& s : p.samples()) samples.push_back(to_json(s));
  return {{"name", std::string(to_string(p.name()))}, {"dimension", p.dimension()}, {"samples", samples}};
}

Pool pool_from_json(const nlohmann::json& j) {
  std::vector<Sample> samples;
  for (const auto& s : j.at("samples")) samples.push_back(sample_from_json(s));
  return Pool(pool_name_from_string(j.at("name").get<std::string>()), j.at("dimension").get<std::size_t>(),
              std::move(samples));
}

Pool parse_manifest(std::string_view text, std::size_t dimension, PoolName name) {
  std::vector<Sample> samples;
  std::unordered_set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

    Sample s;
    try {
      s = sample_from_json(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::MalformedRecord, fmt::format("line {}: {}", line_no, e.what()));
    } catch (const Error& e) {
      throw Error(ErrorKind::MalformedRecord, fmt::format("line {}: {}", line_no, e.what()));
    }
    if (s.features.size() != dimension) {
      throw Error(ErrorKind::DimensionMismatch,
                  fmt::format("line {}: {} features, expected {}", line_no, s.features.size(), dimension));
    }
    if (!seen.insert(s.id).second) throw Error(ErrorKind::DuplicateId, s.id);
    samples.push_back(std::move(s));
  }
  return Pool(name, dimension, std::move(samples));
}

Pool load_manifest(const std::filesystem::path& path, std::size_t dimension, PoolName name) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::MissingFile, path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_manifest(buf.str(), dimension, name);
}

std::string format_manifest(const Pool& pool) {
  std::string out;
  for (const auto& s : pool.samples()) {
    out += to_json(s).dump();
    out += '\n';
  }
  return out;
}

void write_manifest(const Pool& pool, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoFailure, path.string());
  out << format_manifest(pool);
  if (!out) throw Error(ErrorKind::IoFailure, path.string());
}

MoveResult move_samples(const Pool& src, const Pool& dst, std::span<const std::string> ids) {
  if (src.dimension() != dst.dimension()) {
    throw Error(ErrorKind::DimensionMismatch,
                fmt::format("cannot move between dimensions {} and {}", src.dimension(), dst.dimension()));
  }
  std::unordered_map<std::string_view, std::size_t> index;
  index.reserve(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) index.emplace(src[i].id, i);

  std::vector<bool> taken(src.size(), false);
  std::vector<Sample> moved;
  moved.reserve(ids.size());
  for (const auto& id : ids) {
    const auto it = index.find(id);
    if (it == index.end() || taken[it->second]) throw Error(ErrorKind::UnknownId, id);
    taken[it->second] = true;
    moved.push_back(src[it->second]);
  }
  std::vector<Sample> kept;
  kept.reserve(src.size() - moved.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (!taken[i]) kept.push_back(src[i]);
  }
  return {Pool(src.name(), src.dimension(), std::move(kept)), dst.with_appended(moved)};
}

std::vector<double> centroid(const Pool& pool) {
  std::vector<double> c(pool.dimension(), 0.0);
  if (pool.empty()) return c;
  for (const auto& s : pool.samples()) {
    for (std::size_t k = 0; k < c.size(); ++k) c[k] += s.features[k];
  }
  for (auto& v : c) v /= static_cast<double>(pool.size());
  return c;
}

}  // namespace coti
