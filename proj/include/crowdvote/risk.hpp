#pragma once

// Frequentist risk of decision rules under 0-1 loss.
//
// A Coin action contributes an expected loss of exactly 1/2 for either state,
// so exact risks never sample the coin. Only monte_carlo_risk flips it.

#include "crowdvote/likelihood.hpp"
#include "crowdvote/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace crowdvote {

template <typename Scalar = double>
Scalar expected_loss(Action a, int theta) {
  switch (a) {
    case Action::Zero: return theta == 1 ? Scalar(1) : Scalar(0);
    case Action::One: return theta == 0 ? Scalar(1) : Scalar(0);
    case Action::Coin: return Scalar(0.5);
  }
  return Scalar(0);
}

namespace detail {

inline void require_theta(int theta) {
  if (theta != 0 && theta != 1) throw InvalidArgument("theta must be 0 or 1");
}

}  // namespace detail

// R(rule, theta) = sum over patterns of P(y | theta, gamma) * loss(rule(y), theta).
template <typename Derived>
typename Derived::Scalar risk_exact(const DecisionRule& rule, int theta, const Eigen::MatrixBase<Derived>& gammas) {
  using Scalar = typename Derived::Scalar;
  detail::require_theta(theta);
  detail::require_accuracies(gammas);
  detail::require_length(gammas, rule.n(), "accuracy vector");
  Scalar risk(0);
  for (std::uint64_t p = 0; p < rule.num_patterns(); ++p) {
    const Action a = rule[p];
    if (a == Action::One && theta == 1) continue;
    if (a == Action::Zero && theta == 0) continue;
    risk += pattern_likelihood(gammas, theta, p) * expected_loss<Scalar>(a, theta);
  }
  return risk;
}

// |R(rule, 0) - R(rule, 1)|; zero for rules with constant risk.
template <typename Derived>
typename Derived::Scalar constant_risk_gap(const DecisionRule& rule, const Eigen::MatrixBase<Derived>& gammas) {
  return std::abs(risk_exact(rule, 0, gammas) - risk_exact(rule, 1, gammas));
}

// Accuracies that reproduce the model's marginal pattern distribution given
// theta. For Beta priors the Bernoulli likelihood integrates to the Beta
// means, so the marginal is exact.
template <typename Scalar>
VectorX<Scalar> marginal_accuracies(const AccuracyModel<Scalar>& model) {
  if (model.is_known()) return model.as_known().gamma;
  if (model.is_beta()) return beta_means(model.as_beta().alpha, model.as_beta().beta);
  throw InvalidModel("Bayes risk is undefined for an interval model");
}

template <typename Derived>
typename Derived::Scalar bayes_risk_known(const DecisionRule& rule, const ThetaPrior<typename Derived::Scalar>& prior,
                                          const Eigen::MatrixBase<Derived>& gammas) {
  return prior.mass(1) * risk_exact(rule, 1, gammas) + prior.mass(0) * risk_exact(rule, 0, gammas);
}

template <typename Scalar>
Scalar bayes_risk(const DecisionRule& rule, const ThetaPrior<Scalar>& prior, const AccuracyModel<Scalar>& model) {
  return bayes_risk_known(rule, prior, marginal_accuracies(model));
}

template <typename Derived>
RiskReport<typename Derived::Scalar> risk_report(const DecisionRule& rule, const Eigen::MatrixBase<Derived>& gammas,
                                                 std::optional<typename Derived::Scalar> bayes = std::nullopt) {
  return RiskReport<typename Derived::Scalar>::make(risk_exact(rule, 0, gammas), risk_exact(rule, 1, gammas), bayes);
}

// ---------------------------------------------------------------------------
// Parameter boxes and worst-case risk
// ---------------------------------------------------------------------------

// {theta in theta_values} x prod_i [lo_i, hi_i].
template <typename Scalar = double>
class ParameterBox {
 public:
  ParameterBox(std::vector<int> theta_values, VectorX<Scalar> lo, VectorX<Scalar> hi)
      : theta_values_(std::move(theta_values)), lo_(std::move(lo)), hi_(std::move(hi)) {
    std::sort(theta_values_.begin(), theta_values_.end());
    theta_values_.erase(std::unique(theta_values_.begin(), theta_values_.end()), theta_values_.end());
    if (theta_values_.empty()) throw InvalidArgument("parameter box needs at least one theta value");
    for (int t : theta_values_) detail::require_theta(t);
    detail::require_accuracies(lo_);
    detail::require_length(hi_, lo_.size(), "upper accuracy bound");
    detail::require_accuracies(hi_);
    if ((lo_.array() > hi_.array()).any()) throw InvalidArgument("parameter box has lo > hi");
  }

  // [0,1]^n for both states.
  static ParameterBox full(int n) {
    return ParameterBox({0, 1}, VectorX<Scalar>::Zero(n), VectorX<Scalar>::Ones(n));
  }

  // Both states at a single accuracy vector.
  static ParameterBox point(VectorX<Scalar> gammas) { return ParameterBox({0, 1}, gammas, gammas); }

  // Experts at least epsilon_i better than a coin flip.
  static ParameterBox better_than_coin(const VectorX<Scalar>& epsilon) {
    VectorX<Scalar> lo = (epsilon.array() + Scalar(0.5)).matrix();
    return ParameterBox({0, 1}, lo, VectorX<Scalar>::Ones(epsilon.size()));
  }

  int n() const { return static_cast<int>(lo_.size()); }
  const std::vector<int>& theta_values() const { return theta_values_; }
  const VectorX<Scalar>& lo() const { return lo_; }
  const VectorX<Scalar>& hi() const { return hi_; }

  bool degenerate() const { return (lo_.array() == hi_.array()).all(); }

  // Vertex v takes hi_i where bit i of v is set, lo_i otherwise.
  VectorX<Scalar> vertex(std::uint64_t v) const {
    VectorX<Scalar> g(lo_.size());
    for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = vote_of(v, static_cast<int>(i)) ? hi_[i] : lo_[i];
    return g;
  }

  std::uint64_t num_vertices() const { return degenerate() ? 1 : pattern_count(n()); }

  // Accuracy closest to 1/2 in each interval. Two states at this point give
  // the reduction used for the lower bound on the minimax risk.
  VectorX<Scalar> closest_to_coin() const {
    return lo_.cwiseMax(VectorX<Scalar>::Constant(lo_.size(), Scalar(0.5))).cwiseMin(hi_);
  }

 private:
  std::vector<int> theta_values_;
  VectorX<Scalar> lo_;
  VectorX<Scalar> hi_;
};

template <typename Scalar = double>
struct SupRisk {
  Scalar value{};
  int theta = 0;
  VectorX<Scalar> gamma;
};

// Exact supremum of R(rule, (theta, gamma)) over the box. The risk is affine
// in each gamma_i separately, so the supremum is attained at a vertex. The
// first maximizing (theta, vertex) in enumeration order is reported.
template <typename Scalar>
SupRisk<Scalar> sup_risk_box(const DecisionRule& rule, const ParameterBox<Scalar>& box) {
  if (box.n() != rule.n()) throw InvalidArgument("parameter box and rule have different panel sizes");
  SupRisk<Scalar> best{Scalar(-1), 0, {}};
  for (int theta : box.theta_values()) {
    for (std::uint64_t v = 0; v < box.num_vertices(); ++v) {
      VectorX<Scalar> g = box.vertex(v);
      const Scalar r = risk_exact(rule, theta, g);
      if (r > best.value) best = SupRisk<Scalar>{r, theta, std::move(g)};
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Monte Carlo validation
// ---------------------------------------------------------------------------

template <typename Scalar = double>
struct MonteCarloEstimate {
  Scalar estimate{};
  Scalar std_error{};
  std::uint64_t trials = 0;
};

// sqrt(p (1 - p) / trials) for an empirical 0/1 loss mean p.
template <typename Scalar>
Scalar binomial_standard_error(Scalar p, std::uint64_t trials) {
  if (trials == 0) throw InvalidArgument("standard error needs at least one trial");
  return std::sqrt(p * (Scalar(1) - p) / static_cast<Scalar>(trials));
}

namespace detail {

// Uniform double in [0, 1) from the top 53 bits.
inline double unit_uniform(std::mt19937_64& engine) { return static_cast<double>(engine() >> 11) * 0x1.0p-53; }

}  // namespace detail

// Draws `trials` opinion vectors from P(y | theta, gamma), applies the rule and
// physically flips the fair coin on Coin entries. Deterministic given seed.
template <typename Derived>
MonteCarloEstimate<typename Derived::Scalar> monte_carlo_risk(const DecisionRule& rule, int theta,
                                                              const Eigen::MatrixBase<Derived>& gammas,
                                                              std::uint64_t trials, std::uint64_t seed) {
  using Scalar = typename Derived::Scalar;
  detail::require_theta(theta);
  detail::require_accuracies(gammas);
  detail::require_length(gammas, rule.n(), "accuracy vector");
  if (trials < 1) throw InvalidArgument("Monte Carlo risk needs at least one trial");

  std::mt19937_64 engine(seed);
  std::uint64_t errors = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    std::uint64_t pattern = 0;
    for (Eigen::Index i = 0; i < gammas.size(); ++i) {
      const bool correct = detail::unit_uniform(engine) < static_cast<double>(gammas[i]);
      const int vote = correct ? theta : 1 - theta;
      pattern |= static_cast<std::uint64_t>(vote) << i;
    }
    int decision = 0;
    switch (rule[pattern]) {
      case Action::Zero: decision = 0; break;
      case Action::One: decision = 1; break;
      case Action::Coin: decision = static_cast<int>(engine() >> 63); break;
    }
    errors += decision != theta ? 1 : 0;
  }
  const Scalar p = static_cast<Scalar>(errors) / static_cast<Scalar>(trials);
  return {p, binomial_standard_error(p, trials), trials};
}

}  // namespace crowdvote
