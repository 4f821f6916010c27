#ifndef SAVI_AUDITORS_HPP
#define SAVI_AUDITORS_HPP

#include <cstdint>
#include <string_view>
#include <vector>

#include "savi/config.hpp"
#include "savi/rng.hpp"
#include "savi/simulation.hpp"

namespace savi {

enum class StrategyKind { Stratified, Prelearned, Oracle, Adaptive };

std::string_view to_string(StrategyKind k) noexcept;
StrategyKind parse_strategy_kind(std::string_view name);

struct StrategyParams {
  StrategyKind kind = StrategyKind::Adaptive;
  std::int64_t n_init = 2;            // Adaptive: mass-weighted random bets first
  double ucb_c = 1.0;                 // Adaptive: width of the lower confidence bound
  double exploration_quantile = 0.5;  // Adaptive: fraction of cells kept when exploring
  double explore_rate = 0.05;         // Adaptive: epsilon-greedy uniform bet probability
  std::int64_t pretrain_budget = 30;  // Prelearned: held-out draws before the audit
  double prior_alpha = 1.0;           // Beta prior pseudo-successes
  double prior_beta = 1.0;            // Beta prior pseudo-failures

  void validate() const;
};

struct CellStats {
  std::int64_t n = 0;
  std::int64_t successes = 0;
};

/// Per-session state of an auditing strategy. Cell statistics only ever
/// reflect observations passed to record_observation().
struct StrategyState {
  StrategyParams params;
  std::vector<CellStats> per_cell_stats;
  std::size_t round_robin_cursor = 0;
  bool pretrained = false;
  std::vector<double> pretrained_means;

  StrategyState(StrategyParams p, std::size_t cells);

  std::int64_t observations() const;
  /// Beta posterior mean (alpha0 + successes) / (alpha0 + beta0 + n).
  double posterior_mean(std::size_t cell) const;
};

/**
 * Picks the next cell to bet on.
 *
 * Stratified cycles over cells. Oracle always takes the lowest true score.
 * Prelearned fits Beta posterior means to `pretrain_budget` mass-weighted
 * draws on its first call and then always bets the lowest fitted mean.
 * Adaptive bets the lowest posterior mean when the cells with posterior mean
 * below q carry mass >= epsilon; otherwise it ranks cells by
 * mean - c * sqrt(ln(t + 1) / (n + 1)) and samples uniformly from the bottom
 * exploration_quantile of that ranking.
 *
 * `available` (optional) masks out exhausted cells. Ties go to the
 * lexicographically smallest cell id. Throws StateError if no cell is
 * available.
 */
std::size_t next_bet(StrategyState& state, const SubgroupSpace& space, const AuditConfig& cfg,
                     Rng& rng, const std::vector<bool>* available = nullptr);

void record_observation(StrategyState& state, std::size_t cell, Score y);

/// Lower confidence bound used by the Adaptive exploration rule.
double lower_confidence_bound(const StrategyState& state, std::size_t cell);

}  // namespace savi

#endif  // SAVI_AUDITORS_HPP
