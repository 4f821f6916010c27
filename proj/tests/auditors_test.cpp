#include <cmath>
#include <map>
#include <set>

#include "doctest.h"
#include "savi/auditors.hpp"
#include "savi/rng.hpp"
#include "savi/simulation.hpp"

using namespace savi;

namespace {

StrategyParams params_for(StrategyKind kind) {
  StrategyParams p;
  p.kind = kind;
  return p;
}

}  // namespace

TEST_SUITE("strategies") {
  TEST_CASE("oracle bets the worst cell") {
    auto space = load_degradation_table(Degradation::Large);
    AuditConfig cfg;
    StrategyState st(params_for(StrategyKind::Oracle), space.size());
    Rng rng(1);
    for (int i = 0; i < 5; ++i) {
      CHECK(space.cell(next_bet(st, space, cfg, rng)).id == "chemistry/post_graduate");
    }
  }

  TEST_CASE("oracle breaks ties by id") {
    auto space = load_degradation_table(Degradation::None);
    AuditConfig cfg;
    StrategyState st(params_for(StrategyKind::Oracle), space.size());
    Rng rng(1);
    CHECK(space.cell(next_bet(st, space, cfg, rng)).id == "biology/easy_undergraduate");
  }

  TEST_CASE("stratified visits every cell once per cycle") {
    auto space = load_degradation_table(Degradation::Medium);
    AuditConfig cfg;
    StrategyState st(params_for(StrategyKind::Stratified), space.size());
    Rng rng(2);
    for (int cycle = 0; cycle < 3; ++cycle) {
      std::set<std::size_t> seen;
      for (std::size_t i = 0; i < space.size(); ++i) seen.insert(next_bet(st, space, cfg, rng));
      CHECK(seen.size() == space.size());
    }
  }

  TEST_CASE("stratified skips unavailable cells") {
    auto space = load_degradation_table(Degradation::Medium);
    AuditConfig cfg;
    StrategyState st(params_for(StrategyKind::Stratified), space.size());
    Rng rng(2);
    std::vector<bool> avail(space.size(), false);
    avail[3] = true;
    avail[7] = true;
    for (int i = 0; i < 10; ++i) {
      auto c = next_bet(st, space, cfg, rng, &avail);
      CHECK((c == 3 || c == 7));
    }
    std::vector<bool> none(space.size(), false);
    CHECK_THROWS_AS(next_bet(st, space, cfg, rng, &none), StateError);
  }

  TEST_CASE("adaptive goes greedy on a cell with repeated failures") {
    auto space = load_degradation_table(Degradation::Large);
    AuditConfig cfg;
    auto p = params_for(StrategyKind::Adaptive);
    p.explore_rate = 0.0;
    StrategyState st(p, space.size());
    const std::size_t target = space.index_of("physics/hard_graduate");
    for (std::size_t c = 0; c < space.size(); ++c) {
      for (int i = 0; i < 10; ++i) record_observation(st, c, Score(c != target));
    }
    CHECK(st.posterior_mean(target) == doctest::Approx(1.0 / 12.0));
    Rng rng(3);
    for (int i = 0; i < 20; ++i) CHECK(next_bet(st, space, cfg, rng) == target);
  }

  TEST_CASE("adaptive greedy needs epsilon mass") {
    auto space = load_degradation_table(Degradation::Large, 0.5);
    AuditConfig cfg;
    cfg.epsilon = 0.5;
    auto p = params_for(StrategyKind::Adaptive);
    p.explore_rate = 0.0;
    StrategyState st(p, space.size());
    for (std::size_t c = 0; c < space.size(); ++c) {
      for (int i = 0; i < 20; ++i) record_observation(st, c, Score(c != 0));
    }
    // only one suspicious cell, far below the mass requirement: explore over
    // the bottom half of the LCB ranking
    Rng rng(4);
    std::set<std::size_t> picks;
    for (int i = 0; i < 300; ++i) picks.insert(next_bet(st, space, cfg, rng));
    CHECK(picks.size() == 6);
    CHECK(picks.count(0) == 1);
  }

  TEST_CASE("adaptive starts with mass-weighted bets") {
    auto space = load_degradation_table(Degradation::Large);
    AuditConfig cfg;
    auto p = params_for(StrategyKind::Adaptive);
    StrategyState st(p, space.size());
    Rng rng(5);
    auto c = next_bet(st, space, cfg, rng);
    CHECK(c < space.size());
  }

  TEST_CASE("lcb shrinks with fewer observations") {
    auto space = load_degradation_table(Degradation::Large);
    StrategyState st(params_for(StrategyKind::Adaptive), space.size());
    for (int i = 0; i < 5; ++i) record_observation(st, 0, Score(true));
    for (int i = 0; i < 5; ++i) record_observation(st, 1, Score(true));
    for (int i = 0; i < 50; ++i) record_observation(st, 1, Score(true));
    CHECK(lower_confidence_bound(st, 0) < lower_confidence_bound(st, 1));
    const double t = static_cast<double>(st.observations());
    CHECK(lower_confidence_bound(st, 0) ==
          doctest::Approx(6.0 / 7.0 - std::sqrt(std::log(t + 1.0) / 6.0)));
  }

  TEST_CASE("adaptive exploration set is never empty") {
    for (std::size_t cells : {std::size_t{1}, std::size_t{2}, std::size_t{3}}) {
      std::vector<Cell> cs;
      for (std::size_t i = 0; i < cells; ++i) {
        cs.push_back({"c" + std::to_string(i), 1.0 / static_cast<double>(cells), 0.95, ""});
      }
      SubgroupSpace space(cs, 1.0);
      AuditConfig cfg;
      auto p = params_for(StrategyKind::Adaptive);
      p.n_init = 0;
      p.exploration_quantile = 0.01;
      StrategyState st(p, space.size());
      for (std::size_t c = 0; c < cells; ++c) record_observation(st, c, Score(true));
      Rng rng(6);
      CHECK(next_bet(st, space, cfg, rng) < cells);
    }
  }

  TEST_CASE("prelearned bets the lowest fitted mean") {
    auto space = load_degradation_table(Degradation::Large);
    AuditConfig cfg;
    auto p = params_for(StrategyKind::Prelearned);
    p.pretrain_budget = 5000;
    StrategyState st(p, space.size());
    Rng rng(7);
    auto c = next_bet(st, space, cfg, rng);
    CHECK(st.pretrained);
    CHECK(st.observations() == 0);
    CHECK(space.cell(c).id.rfind("chemistry/", 0) == 0);
    CHECK(next_bet(st, space, cfg, rng) == c);
  }

  TEST_CASE("parameter validation") {
    StrategyParams p;
    p.exploration_quantile = 0.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = StrategyParams{};
    p.explore_rate = 1.5;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    CHECK(parse_strategy_kind("Oracle") == StrategyKind::Oracle);
    CHECK_THROWS_AS(parse_strategy_kind("oracle"), ConfigError);
  }
}
