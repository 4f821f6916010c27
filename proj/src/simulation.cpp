#include "savi/simulation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <set>

namespace savi {

SubgroupSpace::SubgroupSpace(std::vector<Cell> cells, double epsilon)
    : cells_(std::move(cells)), epsilon_(epsilon) {
  if (cells_.empty()) throw ConfigError("subgroup space needs at least one cell");
  if (!(epsilon_ > 0.0 && epsilon_ <= 1.0)) throw ConfigError("epsilon must lie in (0,1]");
  std::set<std::string> seen;
  double total = 0.0;
  for (const Cell& c : cells_) {
    if (c.id.empty()) throw ConfigError("cell id must not be empty");
    if (!seen.insert(c.id).second) throw ConfigError("duplicate cell id '" + c.id + "'");
    if (!(c.mass >= 0.0)) throw ConfigError("cell '" + c.id + "' has negative mass");
    if (!(c.truth >= 0.0 && c.truth <= 1.0)) {
      throw ConfigError("cell '" + c.id + "' truth must lie in [0,1]");
    }
    total += c.mass;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ConfigError("cell masses must sum to 1");
}

std::optional<std::size_t> SubgroupSpace::find(std::string_view id) const {
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    if (cells_[i].id == id) return i;
  }
  return std::nullopt;
}

std::size_t SubgroupSpace::index_of(std::string_view id) const {
  if (auto i = find(id)) return *i;
  throw DomainError("unknown cell '" + std::string(id) + "'");
}

double SubgroupSpace::mass_below(double q) const {
  double m = 0.0;
  for (const Cell& c : cells_) {
    if (c.truth < q) m += c.mass;
  }
  return m;
}

std::string_view to_string(Degradation d) noexcept {
  switch (d) {
    case Degradation::None: return "None";
    case Degradation::Small: return "Small";
    case Degradation::Medium: return "Medium";
    case Degradation::Large: return "Large";
  }
  return "?";
}

Degradation parse_degradation(std::string_view name) {
  for (Degradation d : {Degradation::None, Degradation::Small, Degradation::Medium,
                        Degradation::Large}) {
    if (name == to_string(d)) return d;
  }
  throw ConfigError("unknown degradation level '" + std::string(name) + "'");
}

namespace {

struct Domain {
  const char* name;
  int questions;
};

constexpr std::array<Domain, 3> kDomains{{{"chemistry", 187}, {"biology", 142}, {"physics", 119}}};
constexpr std::array<const char*, 4> kLevels{
    {"easy_undergraduate", "hard_undergraduate", "hard_graduate", "post_graduate"}};
constexpr double kQuestions = 448.0;
constexpr double kOtherDomainTruth = 0.90;
constexpr double kNoneTruth = 0.94;

std::vector<Cell> gpqa_layout() {
  std::vector<Cell> cells;
  for (const Domain& d : kDomains) {
    for (const char* level : kLevels) {
      Cell c;
      c.id = std::string(d.name) + "/" + level;
      c.mass = d.questions / kQuestions / static_cast<double>(kLevels.size());
      c.tag = std::string(d.name) + " x " + level;
      cells.push_back(std::move(c));
    }
  }
  return cells;
}

}  // namespace

SubgroupSpace load_degradation_table(Degradation level, double epsilon) {
  std::vector<Cell> cells = gpqa_layout();
  if (level == Degradation::None) {
    for (Cell& c : cells) c.truth = kNoneTruth;
    return SubgroupSpace(std::move(cells), epsilon);
  }
  double lo = 0.0;
  double hi = 0.0;
  switch (level) {
    case Degradation::Large: lo = 0.25; hi = 0.40; break;
    case Degradation::Medium: lo = 0.50; hi = 0.75; break;
    case Degradation::Small: lo = 0.60; hi = 0.77; break;
    case Degradation::None: break;
  }
  const double steps = static_cast<double>(kLevels.size() - 1);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const std::size_t level_index = i % kLevels.size();
    if (i < kLevels.size()) {
      // Chemistry block; the easiest level gets the top of the range.
      cells[i].truth = level_index == kLevels.size() - 1
                           ? lo
                           : hi - (hi - lo) * static_cast<double>(level_index) / steps;
    } else {
      cells[i].truth = kOtherDomainTruth;
    }
  }
  return SubgroupSpace(std::move(cells), epsilon);
}

SubgroupSpace load_uniform_table(double truth, double epsilon) {
  std::vector<Cell> cells = gpqa_layout();
  for (Cell& c : cells) c.truth = truth;
  return SubgroupSpace(std::move(cells), epsilon);
}

Score draw_score(const SubgroupSpace& space, std::size_t cell, Rng& rng) {
  return Score(bernoulli(rng, space.cell(cell).truth));
}

Score draw_score(const SubgroupSpace& space, std::string_view cell_id, Rng& rng) {
  return draw_score(space, space.index_of(cell_id), rng);
}

nlohmann::json space_to_json(const SubgroupSpace& space) {
  nlohmann::json cells = nlohmann::json::array();
  for (const Cell& c : space.cells()) {
    cells.push_back({{"id", c.id}, {"mass", c.mass}, {"truth", c.truth}});
  }
  return {{"cells", cells}, {"epsilon", space.epsilon()}};
}

SubgroupSpace space_from_json(const nlohmann::json& j) {
  try {
    std::vector<Cell> cells;
    for (const auto& jc : j.at("cells")) {
      Cell c;
      c.id = jc.at("id").get<std::string>();
      c.mass = jc.at("mass").get<double>();
      c.truth = jc.at("truth").get<double>();
      if (jc.contains("tag")) c.tag = jc.at("tag").get<std::string>();
      cells.push_back(std::move(c));
    }
    const double epsilon = j.contains("epsilon") ? j.at("epsilon").get<double>() : 0.05;
    return SubgroupSpace(std::move(cells), epsilon);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed truth table: ") + e.what());
  }
}

std::string_view to_string(ScenarioMode m) noexcept {
  return m == ScenarioMode::Generator ? "generator" : "finite_pool";
}

ScenarioMode parse_scenario_mode(std::string_view name) {
  if (name == "generator") return ScenarioMode::Generator;
  if (name == "finite_pool") return ScenarioMode::FinitePool;
  throw ConfigError("unknown scenario mode '" + std::string(name) + "'");
}

std::vector<PoolItem> default_pool(const SubgroupSpace& space, std::size_t total) {
  const std::size_t n = space.size();
  std::vector<std::size_t> counts(n);
  std::vector<double> remainder(n);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double exact = space.cell(i).mass * static_cast<double>(total);
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    remainder[i] = exact - std::floor(exact);
    assigned += counts[i];
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < total && k < n; ++k, ++assigned) ++counts[order[k]];

  std::vector<PoolItem> pool;
  pool.reserve(total);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < counts[i]; ++k) {
      pool.push_back({space.cell(i).id + "#" + std::to_string(k), space.cell(i).id});
    }
  }
  return pool;
}

AuditEnvironment::AuditEnvironment(const SubgroupSpace& space, ScenarioMode mode,
                                   std::vector<PoolItem> pool, std::uint64_t seed)
    : space_(&space), mode_(mode), rng_(seed), available_(space.size(), true) {
  if (mode_ == ScenarioMode::FinitePool) {
    if (pool.empty()) pool = default_pool(space);
    items_.resize(space.size());
    for (PoolItem& item : pool) {
      const auto cell = space.find(item.cell_id);
      if (!cell) throw ConfigError("pool item '" + item.item_id + "' names unknown cell");
      items_[*cell].push_back(std::move(item.item_id));
    }
    for (std::size_t i = 0; i < items_.size(); ++i) available_[i] = !items_[i].empty();
  }
}

AuditEnvironment::AuditEnvironment(const SubgroupSpace& space, const ScenarioConfig& scenario)
    : AuditEnvironment(space, scenario.mode, scenario.pool, scenario.seed) {}

bool AuditEnvironment::exhausted() const noexcept {
  return std::none_of(available_.begin(), available_.end(), [](bool b) { return b; });
}

std::size_t AuditEnvironment::remaining(std::size_t cell) const {
  if (mode_ == ScenarioMode::Generator) return static_cast<std::size_t>(-1);
  return items_.at(cell).size();
}

AuditEnvironment::Draw AuditEnvironment::sample(std::size_t cell) {
  if (!available_.at(cell)) {
    throw StateError("cell '" + space_->cell(cell).id + "' has no items left");
  }
  Draw d{std::string(), Score(false)};
  if (mode_ == ScenarioMode::Generator) {
    d.item_id = space_->cell(cell).id + "@" + std::to_string(generated_++);
  } else {
    auto& bucket = items_[cell];
    const std::size_t k = uniform_index(rng_, bucket.size());
    d.item_id = std::move(bucket[k]);
    bucket[k] = std::move(bucket.back());
    bucket.pop_back();
    if (bucket.empty()) available_[cell] = false;
  }
  d.score = draw_score(*space_, cell, rng_);
  return d;
}

}  // namespace savi
