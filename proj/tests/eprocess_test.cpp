#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "savi/eprocess.hpp"

using namespace savi;

namespace {

const Score kPass{true};
const Score kFail{false};

AuditConfig config_with(double q, double delta, double delta_prime, std::int64_t m = 40) {
  AuditConfig cfg;
  cfg.q = q;
  cfg.delta = delta;
  cfg.delta_prime = delta_prime;
  cfg.m = m;
  return cfg;
}

}  // namespace

TEST_SUITE("bernoulli_log_pmf") {
  TEST_CASE("hand-evaluated values") {
    CHECK(bernoulli_log_pmf(kPass, 0.5) == doctest::Approx(-0.6931471805599453).epsilon(1e-14));
    CHECK(bernoulli_log_pmf(kFail, 0.85) == doctest::Approx(-1.8971199848858813).epsilon(1e-14));
    CHECK(bernoulli_log_pmf(kPass, 0.85) == doctest::Approx(-0.16251892949777494).epsilon(1e-14));
  }

  TEST_CASE("parameter outside (0,1) is a domain error") {
    CHECK_THROWS_AS(bernoulli_log_pmf(kPass, 0.0), DomainError);
    CHECK_THROWS_AS(bernoulli_log_pmf(kPass, 1.0), DomainError);
    CHECK_THROWS_AS(bernoulli_log_pmf(kFail, -0.2), DomainError);
    CHECK_THROWS_AS(bernoulli_log_pmf(kFail, std::nan("")), DomainError);
  }

  TEST_CASE("score parsing") {
    CHECK(Score::from_int(1).correct());
    CHECK_FALSE(Score::from_int(0).correct());
    CHECK_THROWS_AS(Score::from_int(2), DomainError);
    CHECK_THROWS_AS(Score::from_int(-1), DomainError);
  }
}

TEST_SUITE("config") {
  TEST_CASE("defaults are valid") { CHECK_NOTHROW(AuditConfig{}.validate()); }

  TEST_CASE("degenerate alternatives are rejected at construction") {
    CHECK_THROWS_AS(config_with(0.3, 0.3, 0.1).validate(), ConfigError);
    CHECK_THROWS_AS(config_with(0.85, 0.35, 0.15).validate(), ConfigError);
    AuditConfig cfg;
    cfg.m = 300;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = AuditConfig{};
    cfg.alpha = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = AuditConfig{};
    cfg.sr_rho = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }

  TEST_CASE("threshold is exactly 1/alpha") {
    AuditConfig cfg;
    CHECK(cfg.threshold() == 20.0);
  }
}

TEST_SUITE("model-side LR") {
  const AuditConfig cfg = config_with(0.85, 0.35, 0.10);

  TEST_CASE("empty sequence has unit wealth") {
    const auto s = EProcessState::initial(Variant::LR, Side::Model);
    CHECK(s.wealth() == 1.0);
    CHECK(s.step_count == 0);
  }

  TEST_CASE("one failure multiplies by 0.50/0.15") {
    auto s = lr_model_update(EProcessState::initial(Variant::LR, Side::Model), kFail, cfg);
    CHECK(s.wealth() == doctest::Approx(10.0 / 3.0).epsilon(1e-12));
    CHECK(s.step_count == 1);
  }

  TEST_CASE("sequence (0,1) gives (0.50/0.15)(0.50/0.85)") {
    auto s = EProcessState::initial(Variant::LR, Side::Model);
    s = lr_model_update(s, kFail, cfg);
    s = lr_model_update(s, kPass, cfg);
    CHECK(s.wealth() == doctest::Approx(1.9607843137254903).epsilon(1e-12));
  }

  TEST_CASE("kind mismatch is a precondition error") {
    CHECK_THROWS_AS(lr_model_update(EProcessState::initial(Variant::LR_UI, Side::Model), kFail, cfg),
                    PreconditionError);
    CHECK_THROWS_AS(lr_model_update(EProcessState::initial(Variant::LR, Side::Auditor), kFail, cfg),
                    PreconditionError);
  }
}

TEST_SUITE("model-side LR-UI") {
  const AuditConfig cfg = config_with(0.85, 0.35, 0.10);

  TEST_CASE("hand-evaluated ratios") {
    const auto init = EProcessState::initial(Variant::LR_UI, Side::Model);
    CHECK(lr_ui_model_update(init, kFail, 0.5, cfg).wealth() ==
          doctest::Approx(10.0 / 3.0).epsilon(1e-12));
    CHECK(lr_ui_model_update(init, kPass, 0.7, cfg).wealth() ==
          doctest::Approx(0.8235294117647058).epsilon(1e-12));
  }

  TEST_CASE("forecast at or above q breaks the contract") {
    const auto init = EProcessState::initial(Variant::LR_UI, Side::Model);
    CHECK_THROWS_AS(lr_ui_model_update(init, kFail, 0.85, cfg), PreconditionError);
    CHECK_THROWS_AS(lr_ui_model_update(init, kFail, 0.9, cfg), PreconditionError);
    CHECK_THROWS_AS(lr_ui_model_update(init, kFail, 0.0, cfg), PreconditionError);
  }

  TEST_CASE("constant forecast q - delta reproduces LR bit for bit") {
    std::mt19937_64 gen(7);
    auto lr = EProcessState::initial(Variant::LR, Side::Model);
    auto ui = EProcessState::initial(Variant::LR_UI, Side::Model);
    for (int t = 0; t < 200; ++t) {
      const Score y(gen() % 3 != 0);
      lr = lr_model_update(lr, y, cfg);
      ui = lr_ui_model_update(ui, y, cfg.q - cfg.delta, cfg);
      REQUIRE(lr.log_wealth == ui.log_wealth);
    }
  }
}

TEST_SUITE("Shiryaev-Roberts") {
  TEST_CASE("w1 = 0.5, w2 = 0.25 with constant factor 2 gives 2.5") {
    AuditConfig cfg;
    cfg.sr_rho = 0.5;
    auto s = EProcessState::initial(Variant::SR_LR, Side::Model);
    s = sr_update(s, std::log(2.0), cfg);
    s = sr_update(s, std::log(2.0), cfg);
    CHECK(s.wealth() == doctest::Approx(2.5).epsilon(1e-14));
    CHECK(oracle::sr_brute_force({2.0, 2.0}, 0.5) == doctest::Approx(2.5).epsilon(1e-14));
  }

  TEST_CASE("unit factors keep the wealth below one") {
    AuditConfig cfg;
    auto s = EProcessState::initial(Variant::SR_LR, Side::Model);
    double partial = 0.0;
    for (int t = 1; t <= 500; ++t) {
      s = sr_update(s, 0.0, cfg);
      partial += (1.0 - cfg.sr_rho) * std::pow(cfg.sr_rho, t - 1);
      REQUIRE(s.wealth() < 1.0);
      REQUIRE(oracle::relative_error(s.wealth(), partial) < 1e-12);
    }
  }

  TEST_CASE("single step with rho = 0.98") {
    AuditConfig cfg;
    auto s = sr_update(EProcessState::initial(Variant::SR_LR, Side::Model), std::log(10.0 / 3.0), cfg);
    CHECK(s.wealth() == doctest::Approx(0.06666666666666667).epsilon(1e-12));
  }

  TEST_CASE("recursion matches the explicit double sum") {
    std::mt19937_64 gen(2024);
    std::uniform_real_distribution<double> factor(0.1, 10.0);
    std::uniform_real_distribution<double> rho(0.05, 0.995);
    for (int rep = 0; rep < 300; ++rep) {
      AuditConfig cfg;
      cfg.sr_rho = rho(gen);
      const std::size_t len = 1 + gen() % 20;
      std::vector<double> factors;
      auto s = EProcessState::initial(Variant::SR_LR_UI, Side::Model);
      for (std::size_t t = 0; t < len; ++t) {
        factors.push_back(factor(gen));
        s = sr_update(s, std::log(factors.back()), cfg);
        REQUIRE(oracle::relative_error(s.wealth(), oracle::sr_brute_force(factors, cfg.sr_rho)) < 1e-12);
      }
    }
  }

  TEST_CASE("model-side sr_update refuses auditor states") {
    CHECK_THROWS_AS(sr_update(EProcessState::initial(Variant::SR_LR, Side::Auditor), 0.0, AuditConfig{}),
                    PreconditionError);
  }
}

TEST_SUITE("auditor side") {
  const AuditConfig cfg = config_with(0.85, 0.35, 0.10, 5);

  TEST_CASE("wealth is exactly one before m") {
    for (Variant v : {Variant::LR, Variant::LR_UI, Variant::SR_LR, Variant::SR_LR_UI}) {
      auto s = EProcessState::initial(v, Side::Auditor);
      for (int t = 1; t < cfg.m; ++t) {
        s = advance(s, Score(t % 2 == 0), 0.95, cfg);
        REQUIRE(s.log_wealth == 0.0);
        REQUIRE_FALSE(s.active);
        REQUIRE(s.step_count == t);
      }
      s = advance(s, kPass, 0.95, cfg);
      CHECK(s.active);
      CHECK(s.log_wealth != 0.0);
    }
  }

  TEST_CASE("first factor is applied at t = m") {
    auto s = EProcessState::initial(Variant::LR, Side::Auditor);
    for (int t = 1; t < cfg.m; ++t) s = lr_auditor_update(s, kPass, cfg);
    s = lr_auditor_update(s, kPass, cfg);
    CHECK(s.wealth() == doctest::Approx(1.1176470588235294).epsilon(1e-12));
    auto f = lr_auditor_update(EProcessState::initial(Variant::LR, Side::Auditor),
                               kFail, config_with(0.85, 0.35, 0.10, 1));
    CHECK(f.wealth() == doctest::Approx(0.33333333333333337).epsilon(1e-12));
  }

  TEST_CASE("LR-UI with (1,1) at 0.95 after m") {
    auto s = EProcessState::initial(Variant::LR_UI, Side::Auditor);
    for (int t = 1; t < cfg.m; ++t) s = lr_ui_auditor_update(s, kFail, 0.95, cfg);
    s = lr_ui_auditor_update(s, kPass, 0.95, cfg);
    s = lr_ui_auditor_update(s, kPass, 0.95, cfg);
    CHECK(s.wealth() == doctest::Approx(1.2491349480968859).epsilon(1e-12));
  }

  TEST_CASE("LR-UI with constant q + delta' reduces to LR") {
    std::mt19937_64 gen(3);
    auto lr = EProcessState::initial(Variant::LR, Side::Auditor);
    auto ui = EProcessState::initial(Variant::LR_UI, Side::Auditor);
    for (int t = 0; t < 100; ++t) {
      const Score y(gen() % 4 != 0);
      lr = lr_auditor_update(lr, y, cfg);
      ui = lr_ui_auditor_update(ui, y, cfg.q + cfg.delta_prime, cfg);
      REQUIRE(lr.log_wealth == ui.log_wealth);
    }
  }

  TEST_CASE("forecast below q is rejected only once active") {
    auto s = EProcessState::initial(Variant::LR_UI, Side::Auditor);
    CHECK_NOTHROW(s = lr_ui_auditor_update(s, kPass, 0.5, cfg));
    for (int t = 2; t < cfg.m; ++t) s = lr_ui_auditor_update(s, kPass, 0.95, cfg);
    CHECK_THROWS_AS(lr_ui_auditor_update(s, kPass, 0.80, cfg), PreconditionError);
  }

  TEST_CASE("SR weights restart at m") {
    AuditConfig c = cfg;
    c.sr_rho = 0.5;
    auto s = EProcessState::initial(Variant::SR_LR, Side::Auditor);
    for (int t = 1; t < c.m; ++t) s = sr_auditor_update(s, std::log(2.0), c);
    CHECK(s.log_wealth == 0.0);
    s = sr_auditor_update(s, std::log(2.0), c);
    s = sr_auditor_update(s, std::log(2.0), c);
    CHECK(s.wealth() == doctest::Approx(2.5).epsilon(1e-14));
  }

  TEST_CASE("SR auditor null behaviour") {
    auto s = EProcessState::initial(Variant::SR_LR, Side::Auditor);
    for (int t = 1; t < 300; ++t) {
      s = sr_auditor_update(s, 0.0, cfg);
      if (t >= cfg.m) REQUIRE(s.wealth() < 1.0);
    }
  }
}

TEST_CASE("log-domain wealth matches the direct product") {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const AuditConfig cfg;
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t len = 1 + gen() % 50;
    std::vector<int> ys;
    std::vector<double> alts;
    auto s = EProcessState::initial(Variant::LR_UI, Side::Model);
    for (std::size_t t = 0; t < len; ++t) {
      ys.push_back(unit(gen) < 0.6 ? 1 : 0);
      alts.push_back(0.01 + 0.83 * unit(gen));
      s = lr_ui_model_update(s, Score(ys.back() == 1), alts.back(), cfg);
    }
    REQUIRE(oracle::relative_error(s.wealth(), oracle::lr_product(ys, alts, cfg.q)) < 1e-9);
  }
}

TEST_CASE("forecast clamping keeps bets on the right side of q") {
  CHECK(clamp_forecast(Side::Model, 0.9, 0.85) == doctest::Approx(0.849));
  CHECK(clamp_forecast(Side::Model, 0.0, 0.85) == kForecastMin);
  CHECK(clamp_forecast(Side::Auditor, 0.5, 0.85) == doctest::Approx(0.851));
  CHECK(clamp_forecast(Side::Auditor, 1.0, 0.85) == kForecastMax);
  CHECK(clamp_forecast(Side::Model, 0.4, 0.85) == 0.4);
}

TEST_CASE("variant names round-trip") {
  for (Variant v : {Variant::LR, Variant::LR_UI, Variant::SR_LR, Variant::SR_LR_UI}) {
    CHECK(parse_variant(to_string(v)) == v);
  }
  CHECK_THROWS_AS(parse_variant("LRUI"), ConfigError);
}
