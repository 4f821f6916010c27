#ifndef SAVI_SIMULATION_HPP
#define SAVI_SIMULATION_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "savi/config.hpp"
#include "savi/rng.hpp"

namespace savi {

/// One stratum of the input space: prevalence mass and true mean score.
struct Cell {
  std::string id;
  double mass = 0.0;
  double truth = 0.0;
  std::string tag;  // e.g. "chemistry x post_graduate"; informational
};

/// Discrete subgroup space with known per-cell score distributions.
class SubgroupSpace {
 public:
  /// Throws ConfigError if ids repeat, masses are negative or do not sum to
  /// 1 within 1e-12, a truth lies outside [0,1], or epsilon is outside (0,1].
  SubgroupSpace(std::vector<Cell> cells, double epsilon);

  const std::vector<Cell>& cells() const noexcept { return cells_; }
  std::size_t size() const noexcept { return cells_.size(); }
  const Cell& cell(std::size_t i) const { return cells_.at(i); }
  double epsilon() const noexcept { return epsilon_; }

  std::optional<std::size_t> find(std::string_view id) const;
  /// Throws DomainError for unknown ids.
  std::size_t index_of(std::string_view id) const;

  /// Total mass of cells whose truth is strictly below q.
  double mass_below(double q) const;

 private:
  std::vector<Cell> cells_;
  double epsilon_;
};

enum class Degradation { None, Small, Medium, Large };

std::string_view to_string(Degradation d) noexcept;
/// Case-sensitive: "None", "Small", "Medium", "Large".
Degradation parse_degradation(std::string_view name);

/**
 * 3 domains x 4 education levels with masses proportional to the question-bank
 * domain sizes (Chemistry 187, Biology 142, Physics 119), split evenly
 * across levels.
 *
 * Chemistry truths are linearly interpolated across the level's accuracy
 * range, easiest level at the top of the range and post-graduate at the
 * bottom: Large 0.25-0.40, Medium 0.50-0.75, Small 0.60-0.77. Biology and
 * Physics sit at 0.90. The None table uses 0.94 for every cell.
 */
SubgroupSpace load_degradation_table(Degradation level, double epsilon = 0.05);

/// Same 12-cell layout with every truth set to `truth`.
SubgroupSpace load_uniform_table(double truth, double epsilon = 0.05);

/// Bernoulli(V(cell)) draw.
Score draw_score(const SubgroupSpace& space, std::size_t cell, Rng& rng);
/// Throws DomainError for an unknown cell id.
Score draw_score(const SubgroupSpace& space, std::string_view cell_id, Rng& rng);

/// {"cells": [{"id", "mass", "truth"}], "epsilon"}
nlohmann::json space_to_json(const SubgroupSpace& space);
SubgroupSpace space_from_json(const nlohmann::json& j);

enum class ScenarioMode { Generator, FinitePool };

std::string_view to_string(ScenarioMode m) noexcept;
ScenarioMode parse_scenario_mode(std::string_view name);

struct PoolItem {
  std::string item_id;
  std::string cell_id;
};

struct ScenarioConfig {
  ScenarioMode mode = ScenarioMode::Generator;
  std::vector<PoolItem> pool;  // FinitePool only; empty means default_pool()
  Degradation degradation = Degradation::Large;
  std::uint64_t seed = 0;
};

/// Synthetic item ids, `total` items spread over cells in proportion to mass
/// (largest-remainder rounding).
std::vector<PoolItem> default_pool(const SubgroupSpace& space, std::size_t total = 448);

/**
 * Source of scores for a simulated audit.
 *
 * Generator mode draws i.i.d. scores from any cell forever. FinitePool mode
 * removes a uniformly chosen remaining item of the requested cell on every
 * draw; a cell with no items left becomes unavailable.
 */
class AuditEnvironment {
 public:
  AuditEnvironment(const SubgroupSpace& space, ScenarioMode mode, std::vector<PoolItem> pool,
                   std::uint64_t seed);
  AuditEnvironment(const SubgroupSpace& space, const ScenarioConfig& scenario);

  struct Draw {
    std::string item_id;
    Score score;
  };

  bool available(std::size_t cell) const { return available_.at(cell); }
  const std::vector<bool>& availability() const noexcept { return available_; }
  bool exhausted() const noexcept;
  std::size_t remaining(std::size_t cell) const;

  /// Throws StateError if the cell has no items left.
  Draw sample(std::size_t cell);

 private:
  const SubgroupSpace* space_;
  ScenarioMode mode_;
  Rng rng_;
  std::vector<std::vector<std::string>> items_;  // per cell, FinitePool only
  std::vector<bool> available_;
  std::uint64_t generated_ = 0;
};

}  // namespace savi

#endif  // SAVI_SIMULATION_HPP
