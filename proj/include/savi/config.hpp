#ifndef SAVI_CONFIG_HPP
#define SAVI_CONFIG_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace savi {

/// Invalid configuration, rejected at construction time.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A value outside its mathematical domain (probability, score, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An operation was called on a state that does not admit it.
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A documented precondition of an update rule was violated by the caller.
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Binary outcome of one evaluated response. 1 = correct/acceptable.
class Score {
 public:
  constexpr explicit Score(bool correct) noexcept : correct_(correct) {}

  /// Throws DomainError unless v is 0 or 1.
  static Score from_int(std::int64_t v);

  constexpr bool correct() const noexcept { return correct_; }
  constexpr int value() const noexcept { return correct_ ? 1 : 0; }

  friend constexpr bool operator==(Score, Score) noexcept = default;

 private:
  bool correct_;
};

/**
 * Scalar hyperparameters of one audit.
 *
 * The model-side alternative is q - delta and the auditor-side alternative
 * is q + delta_prime; both must be valid Bernoulli parameters. Rejection
 * happens when an e-process reaches 1/alpha.
 */
struct AuditConfig {
  double q = 0.85;
  double epsilon = 0.05;
  double alpha = 0.05;
  std::int64_t m = 40;
  double delta = 0.35;
  double delta_prime = 0.10;
  std::int64_t max_budget = 250;
  double sr_rho = 0.98;

  /// Throws ConfigError describing the first violated invariant.
  void validate() const;

  double threshold() const noexcept { return 1.0 / alpha; }
  double log_threshold() const;
};

}  // namespace savi

#endif  // SAVI_CONFIG_HPP
