#include "savi/auditors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace savi {

std::string_view to_string(StrategyKind k) noexcept {
  switch (k) {
    case StrategyKind::Stratified: return "Stratified";
    case StrategyKind::Prelearned: return "Prelearned";
    case StrategyKind::Oracle: return "Oracle";
    case StrategyKind::Adaptive: return "Adaptive";
  }
  return "?";
}

StrategyKind parse_strategy_kind(std::string_view name) {
  for (StrategyKind k : {StrategyKind::Stratified, StrategyKind::Prelearned, StrategyKind::Oracle,
                         StrategyKind::Adaptive}) {
    if (name == to_string(k)) return k;
  }
  throw ConfigError("unknown strategy '" + std::string(name) + "'");
}

void StrategyParams::validate() const {
  if (n_init < 0) throw ConfigError("n_init must be nonnegative");
  if (!(ucb_c >= 0.0)) throw ConfigError("ucb_c must be nonnegative");
  if (!(exploration_quantile > 0.0 && exploration_quantile <= 1.0)) {
    throw ConfigError("exploration_quantile must lie in (0,1]");
  }
  if (!(explore_rate >= 0.0 && explore_rate <= 1.0)) {
    throw ConfigError("explore_rate must lie in [0,1]");
  }
  if (pretrain_budget < 0) throw ConfigError("pretrain_budget must be nonnegative");
  if (!(prior_alpha > 0.0 && prior_beta > 0.0)) throw ConfigError("Beta prior must be positive");
}

StrategyState::StrategyState(StrategyParams p, std::size_t cells)
    : params(p), per_cell_stats(cells) {
  params.validate();
  if (cells == 0) throw ConfigError("strategy needs a nonempty subgroup space");
}

std::int64_t StrategyState::observations() const {
  std::int64_t total = 0;
  for (const CellStats& s : per_cell_stats) total += s.n;
  return total;
}

double StrategyState::posterior_mean(std::size_t cell) const {
  const CellStats& s = per_cell_stats.at(cell);
  return (params.prior_alpha + static_cast<double>(s.successes)) /
         (params.prior_alpha + params.prior_beta + static_cast<double>(s.n));
}

double lower_confidence_bound(const StrategyState& state, std::size_t cell) {
  const double t = static_cast<double>(state.observations());
  const double n = static_cast<double>(state.per_cell_stats.at(cell).n);
  return state.posterior_mean(cell) - state.params.ucb_c * std::sqrt(std::log(t + 1.0) / (n + 1.0));
}

void record_observation(StrategyState& state, std::size_t cell, Score y) {
  CellStats& s = state.per_cell_stats.at(cell);
  ++s.n;
  if (y.correct()) ++s.successes;
}

namespace {

std::vector<std::size_t> open_cells(const SubgroupSpace& space, const std::vector<bool>* available) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (!available || (*available)[i]) out.push_back(i);
  }
  if (out.empty()) throw StateError("no subgroup is available to bet on");
  return out;
}

// Smallest key, ties by cell id.
template <typename Key>
std::size_t argmin_by(const std::vector<std::size_t>& cells, const SubgroupSpace& space, Key key) {
  return *std::min_element(cells.begin(), cells.end(), [&](std::size_t a, std::size_t b) {
    const double ka = key(a);
    const double kb = key(b);
    if (ka != kb) return ka < kb;
    return space.cell(a).id < space.cell(b).id;
  });
}

std::size_t mass_weighted(const std::vector<std::size_t>& cells, const SubgroupSpace& space,
                          Rng& rng) {
  double total = 0.0;
  for (std::size_t c : cells) total += space.cell(c).mass;
  if (!(total > 0.0)) return cells[uniform_index(rng, cells.size())];
  double u = uniform01(rng) * total;
  for (std::size_t c : cells) {
    u -= space.cell(c).mass;
    if (u < 0.0) return c;
  }
  return cells.back();
}

std::size_t stratified(StrategyState& st, const SubgroupSpace& space,
                       const std::vector<bool>* available) {
  for (std::size_t k = 0; k < space.size(); ++k) {
    const std::size_t c = (st.round_robin_cursor + k) % space.size();
    if (!available || (*available)[c]) {
      st.round_robin_cursor = (c + 1) % space.size();
      return c;
    }
  }
  throw StateError("no subgroup is available to bet on");
}

std::size_t prelearned(StrategyState& st, const SubgroupSpace& space,
                       const std::vector<std::size_t>& cells, Rng& rng) {
  if (!st.pretrained) {
    std::vector<CellStats> pre(space.size());
    std::vector<std::size_t> all(space.size());
    std::iota(all.begin(), all.end(), 0);
    for (std::int64_t i = 0; i < st.params.pretrain_budget; ++i) {
      const std::size_t c = mass_weighted(all, space, rng);
      ++pre[c].n;
      if (draw_score(space, c, rng).correct()) ++pre[c].successes;
    }
    st.pretrained_means.resize(space.size());
    for (std::size_t c = 0; c < space.size(); ++c) {
      st.pretrained_means[c] = (st.params.prior_alpha + static_cast<double>(pre[c].successes)) /
                               (st.params.prior_alpha + st.params.prior_beta +
                                static_cast<double>(pre[c].n));
    }
    st.pretrained = true;
  }
  return argmin_by(cells, space, [&](std::size_t c) { return st.pretrained_means[c]; });
}

std::size_t adaptive(StrategyState& st, const SubgroupSpace& space, const AuditConfig& cfg,
                     const std::vector<std::size_t>& cells, Rng& rng) {
  if (st.observations() < st.params.n_init) return mass_weighted(cells, space, rng);
  if (st.params.explore_rate > 0.0 && bernoulli(rng, st.params.explore_rate)) {
    return cells[uniform_index(rng, cells.size())];
  }

  double below_mass = 0.0;
  std::vector<std::size_t> below;
  for (std::size_t c : cells) {
    if (st.posterior_mean(c) < cfg.q) {
      below.push_back(c);
      below_mass += space.cell(c).mass;
    }
  }
  if (!below.empty() && below_mass >= space.epsilon()) {
    return argmin_by(below, space, [&](std::size_t c) { return st.posterior_mean(c); });
  }

  std::vector<std::pair<double, std::size_t>> ranked;
  ranked.reserve(cells.size());
  for (std::size_t c : cells) ranked.emplace_back(lower_confidence_bound(st, c), c);
  std::sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return space.cell(a.second).id < space.cell(b.second).id;
  });
  const auto keep = std::max<std::size_t>(
      1, static_cast<std::size_t>(
             std::ceil(st.params.exploration_quantile * static_cast<double>(ranked.size()))));
  return ranked[uniform_index(rng, std::min(keep, ranked.size()))].second;
}

}  // namespace

std::size_t next_bet(StrategyState& state, const SubgroupSpace& space, const AuditConfig& cfg,
                     Rng& rng, const std::vector<bool>* available) {
  if (state.per_cell_stats.size() != space.size()) {
    throw StateError("strategy state does not match the subgroup space");
  }
  if (state.params.kind == StrategyKind::Stratified) return stratified(state, space, available);

  const std::vector<std::size_t> cells = open_cells(space, available);
  switch (state.params.kind) {
    case StrategyKind::Oracle:
      return argmin_by(cells, space, [&](std::size_t c) { return space.cell(c).truth; });
    case StrategyKind::Prelearned: return prelearned(state, space, cells, rng);
    case StrategyKind::Adaptive: return adaptive(state, space, cfg, cells, rng);
    case StrategyKind::Stratified: break;
  }
  return cells.front();
}

}  // namespace savi
