#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace coti {

enum class Provenance {
  web,
  initial,
  generated_no_embedding,
  similar_category,
  generated_by_embedding,
};

std::string_view to_string(Provenance p) noexcept;
Provenance provenance_from_string(std::string_view s);

// W: web pool, X_T: training pool, D_TG: generated without embedding,
// D_SI: similar-category set, X_TI: generated by the current embedding.
enum class PoolName { W, X_T, D_TG, D_SI, X_TI };

std::string_view to_string(PoolName p) noexcept;
PoolName pool_name_from_string(std::string_view s);

inline constexpr double kMaxLabel = 10.0;

struct Sample {
  std::string id;
  std::vector<double> features;
  Provenance provenance = Provenance::web;
  std::optional<double> aesthetic_label;

  bool operator==(const Sample&) const = default;
};

// An ordered, dimension-checked sample set. Pools are values: every
// "mutation" returns a new Pool and leaves the original untouched.
class Pool {
 public:
  Pool(PoolName name, std::size_t dimension);
  // Validates dimension, label range and id uniqueness.
  Pool(PoolName name, std::size_t dimension, std::vector<Sample> samples);

  PoolName name() const noexcept { return name_; }
  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }
  std::span<const Sample> samples() const noexcept { return samples_; }
  const Sample& operator[](std::size_t i) const { return samples_[i]; }

  bool contains(std::string_view id) const;
  const Sample* find(std::string_view id) const;

  Pool with_appended(std::span<const Sample> extra) const;
  Pool renamed(PoolName name) const;
  // Returns a copy with the given labels applied to the named samples.
  Pool with_labels(std::span<const std::pair<std::string, double>> labels) const;

  bool operator==(const Pool&) const = default;

 private:
  PoolName name_;
  std::size_t dimension_;
  std::vector<Sample> samples_;
};

// Manifest: one JSON object per line,
//   {"id": "...", "features": [...], "provenance": "web", "label": 7.5}
// "provenance" defaults to "web"; "label" is optional. Blank lines are skipped.
Pool load_manifest(const std::filesystem::path& path, std::size_t dimension,
                   PoolName name = PoolName::W);
void write_manifest(const Pool& pool, const std::filesystem::path& path);
Pool parse_manifest(std::string_view text, std::size_t dimension, PoolName name = PoolName::W);
std::string format_manifest(const Pool& pool);

struct MoveResult {
  Pool src;
  Pool dst;
};

// Removes `ids` from src and appends them to dst in the given order.
MoveResult move_samples(const Pool& src, const Pool& dst, std::span<const std::string> ids);

std::vector<double> centroid(const Pool& pool);

nlohmann::json to_json(const Sample& s);
Sample sample_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Pool& p);
Pool pool_from_json(const nlohmann::json& j);

}  // namespace coti
