#pragma once

// Posteriors over the hidden state and the Bayes decision rules built from
// them, for known expert accuracies and for independent Beta priors on the
// accuracies. Under 0-1 loss the Bayes action for a pattern is the more
// probable state, with the fair coin when both states are equally likely.

#include "crowdvote/likelihood.hpp"
#include "crowdvote/model.hpp"

#include <array>
#include <cmath>
#include <limits>

namespace crowdvote {

// Weighted vote sum_i w_i y_i compared against a cutoff C. Weights and
// cutoff are in log-odds units; sum - C is the posterior log-odds.
template <typename Scalar = double>
struct WeightedVoteRule {
  VectorX<Scalar> weights;
  Scalar cutoff{};

  int n() const { return static_cast<int>(weights.size()); }

  // Posterior log-odds of theta = 1 for the pattern. Only the experts voting
  // 1 contribute, so an infinite weight on a 0 vote never produces NaN.
  Scalar score(std::uint64_t pattern) const {
    Scalar sum(0);
    for (Eigen::Index i = 0; i < weights.size(); ++i)
      if (vote_of(pattern, static_cast<int>(i)) == 1) sum += weights[i];
    return sum - cutoff;
  }

  Scalar score(const OpinionVector& y) const {
    if (y.size() != n()) throw InvalidArgument("opinion vector length does not match the weights");
    return score(pattern_index(y));
  }

  Action decide(std::uint64_t pattern, Scalar tie_tolerance) const {
    const Scalar s = score(pattern);
    if (s > tie_tolerance) return Action::One;
    if (s < -tie_tolerance) return Action::Zero;
    return Action::Coin;
  }

  Action decide(const OpinionVector& y, Scalar tie_tolerance) const { return decide(pattern_index(y), tie_tolerance); }

  DecisionRule to_rule(Scalar tie_tolerance) const {
    std::vector<Action> table(pattern_count(n()));
    for (std::uint64_t p = 0; p < table.size(); ++p) table[p] = decide(p, tie_tolerance);
    return DecisionRule(n(), std::move(table));
  }
};

// A Bayes rule together with the patterns that cannot occur under either
// state. Those patterns carry Coin.
struct BayesRule {
  DecisionRule rule;
  std::vector<bool> unreachable;

  bool any_unreachable() const {
    for (bool u : unreachable)
      if (u) return true;
    return false;
  }
};

namespace detail {

template <typename Scalar>
Scalar prior_log_odds_cutoff(const ThetaPrior<Scalar>& prior) {
  return std::log((Scalar(1) - prior.c()) / prior.c());
}

template <typename Scalar>
Action action_from_log_odds(Scalar log_odds, Scalar tie_tolerance) {
  if (log_odds > tie_tolerance) return Action::One;
  if (log_odds < -tie_tolerance) return Action::Zero;
  return Action::Coin;
}

template <typename Scalar>
void require_tolerance(Scalar tie_tolerance) {
  if (!(tie_tolerance >= Scalar(0))) throw InvalidArgument("tie tolerance must be nonnegative");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Known accuracies
// ---------------------------------------------------------------------------

// Joint terms {(1-c) P(y | theta=0), c P(y | theta=1)} evaluated in
// probability space, so certain experts (gamma in {0,1}) are exact.
template <typename Derived>
std::array<typename Derived::Scalar, 2> joint_known(const ThetaPrior<typename Derived::Scalar>& prior,
                                                    const Eigen::MatrixBase<Derived>& gammas, const OpinionVector& y) {
  detail::require_accuracies(gammas);
  detail::require_length(gammas, y.size(), "accuracy vector");
  const auto pattern = pattern_index(y);
  return {prior.mass(0) * pattern_likelihood(gammas, 0, pattern), prior.mass(1) * pattern_likelihood(gammas, 1, pattern)};
}

// {P(theta=0 | y), P(theta=1 | y)}.
template <typename Derived>
std::array<typename Derived::Scalar, 2> state_posterior_known(const ThetaPrior<typename Derived::Scalar>& prior,
                                                              const Eigen::MatrixBase<Derived>& gammas,
                                                              const OpinionVector& y) {
  using Scalar = typename Derived::Scalar;
  const auto joint = joint_known(prior, gammas, y);
  const Scalar total = joint[0] + joint[1];
  if (total == Scalar(0))
    throw ZeroProbabilityObservation("opinion pattern has probability zero under both states");
  return {joint[0] / total, joint[1] / total};
}

// P(theta = 1 | y) for known accuracies.
template <typename Derived>
typename Derived::Scalar posterior_known(const ThetaPrior<typename Derived::Scalar>& prior,
                                         const Eigen::MatrixBase<Derived>& gammas, const OpinionVector& y) {
  return state_posterior_known(prior, gammas, y)[1];
}

// w_i = 2 log(gamma_i / (1 - gamma_i)); +inf for gamma_i = 1, -inf for 0.
template <typename Derived>
auto weights_known(const Eigen::MatrixBase<Derived>& gammas) {
  using Scalar = typename Derived::Scalar;
  detail::require_accuracies(gammas);
  VectorX<Scalar> w(gammas.size());
  for (Eigen::Index i = 0; i < gammas.size(); ++i) {
    const Scalar g = gammas[i];
    if (g == Scalar(1)) w[i] = std::numeric_limits<Scalar>::infinity();
    else if (g == Scalar(0)) w[i] = -std::numeric_limits<Scalar>::infinity();
    else w[i] = Scalar(2) * std::log(g / (Scalar(1) - g));
  }
  return w;
}

// Weighted vote with cutoff C = log((1-c)/c) + sum_i w_i / 2. Requires
// 0 < c < 1 for a finite cutoff.
template <typename Derived>
WeightedVoteRule<typename Derived::Scalar> weighted_vote_known(const ThetaPrior<typename Derived::Scalar>& prior,
                                                               const Eigen::MatrixBase<Derived>& gammas) {
  using Scalar = typename Derived::Scalar;
  VectorX<Scalar> w = weights_known(gammas);
  const Scalar cutoff = detail::prior_log_odds_cutoff(prior) + w.sum() / Scalar(2);
  return {std::move(w), cutoff};
}

// Bayes action for one pattern. Certain experts (gamma_i in {0,1}) are
// handled from the joint terms directly; a pattern impossible under both
// states gets Coin.
template <typename Derived>
Action bayes_action_known(const ThetaPrior<typename Derived::Scalar>& prior, const Eigen::MatrixBase<Derived>& gammas,
                          std::uint64_t pattern, typename Derived::Scalar tie_tolerance = 1e-9) {
  using Scalar = typename Derived::Scalar;
  if (prior.c() == Scalar(0)) return Action::Zero;
  if (prior.c() == Scalar(1)) return Action::One;
  const bool degenerate = ((gammas.array() == Scalar(0)) || (gammas.array() == Scalar(1))).any();
  if (!degenerate) return weighted_vote_known(prior, gammas).decide(pattern, tie_tolerance);

  const Scalar j0 = prior.mass(0) * pattern_likelihood(gammas, 0, pattern);
  const Scalar j1 = prior.mass(1) * pattern_likelihood(gammas, 1, pattern);
  if (j0 == Scalar(0) && j1 == Scalar(0)) return Action::Coin;
  if (j0 == Scalar(0)) return Action::One;
  if (j1 == Scalar(0)) return Action::Zero;
  return detail::action_from_log_odds(std::log(j1) - std::log(j0), tie_tolerance);
}

template <typename Derived>
Action bayes_action_known(const ThetaPrior<typename Derived::Scalar>& prior, const Eigen::MatrixBase<Derived>& gammas,
                          const OpinionVector& y, typename Derived::Scalar tie_tolerance = 1e-9) {
  detail::require_accuracies(gammas);
  detail::require_tolerance(tie_tolerance);
  detail::require_length(gammas, y.size(), "accuracy vector");
  return bayes_action_known(prior, gammas, pattern_index(y), tie_tolerance);
}

template <typename Derived>
BayesRule bayes_rule_known_detailed(const ThetaPrior<typename Derived::Scalar>& prior,
                                    const Eigen::MatrixBase<Derived>& gammas,
                                    typename Derived::Scalar tie_tolerance = 1e-9) {
  using Scalar = typename Derived::Scalar;
  detail::require_accuracies(gammas);
  detail::require_tolerance(tie_tolerance);
  const int n = static_cast<int>(gammas.size());
  const std::uint64_t patterns = pattern_count(n);

  std::vector<bool> unreachable(patterns, false);
  std::vector<Action> table(patterns);
  for (std::uint64_t p = 0; p < patterns; ++p) {
    unreachable[p] = pattern_likelihood(gammas, 0, p) == Scalar(0) && pattern_likelihood(gammas, 1, p) == Scalar(0);
    table[p] = bayes_action_known(prior, gammas, p, tie_tolerance);
  }
  return {DecisionRule(n, std::move(table)), std::move(unreachable)};
}

// Bayes rule under 0-1 loss for known accuracies.
template <typename Derived>
DecisionRule bayes_rule_known(const ThetaPrior<typename Derived::Scalar>& prior, const Eigen::MatrixBase<Derived>& gammas,
                              typename Derived::Scalar tie_tolerance = 1e-9) {
  return bayes_rule_known_detailed(prior, gammas, tie_tolerance).rule;
}

// ---------------------------------------------------------------------------
// Beta priors on the accuracies
// ---------------------------------------------------------------------------

namespace detail {

template <typename DerivedA, typename DerivedB>
void require_beta_parameters(const Eigen::MatrixBase<DerivedA>& alpha, const Eigen::MatrixBase<DerivedB>& beta) {
  using Scalar = typename DerivedA::Scalar;
  if (alpha.size() < 1 || alpha.size() > kMaxPanelSize) throw InvalidArgument("alpha vector has invalid length");
  require_length(beta, alpha.size(), "beta vector");
  if (!((alpha.array() > Scalar(0)).all() && (beta.array() > Scalar(0)).all()))
    throw InvalidArgument("Beta parameters must be positive");
}

}  // namespace detail

// w_i = 2 log(alpha_i / beta_i).
template <typename DerivedA, typename DerivedB>
auto weights_beta(const Eigen::MatrixBase<DerivedA>& alpha, const Eigen::MatrixBase<DerivedB>& beta) {
  using Scalar = typename DerivedA::Scalar;
  detail::require_beta_parameters(alpha, beta);
  return VectorX<Scalar>(Scalar(2) * (alpha.array() / beta.array()).log());
}

template <typename DerivedA, typename DerivedB>
WeightedVoteRule<typename DerivedA::Scalar> weighted_vote_beta(const ThetaPrior<typename DerivedA::Scalar>& prior,
                                                               const Eigen::MatrixBase<DerivedA>& alpha,
                                                               const Eigen::MatrixBase<DerivedB>& beta) {
  using Scalar = typename DerivedA::Scalar;
  VectorX<Scalar> w = weights_beta(alpha, beta);
  const Scalar cutoff = detail::prior_log_odds_cutoff(prior) + w.sum() / Scalar(2);
  return {std::move(w), cutoff};
}

// P(theta = 1 | y) with gamma_i ~ Beta(alpha_i, beta_i) independently.
// The log-odds is sum_i g_i(y_i) - log((1-c)/c) with g_i(1) = log(alpha_i/beta_i)
// and g_i(0) = -g_i(1).
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar posterior_beta(const ThetaPrior<typename DerivedA::Scalar>& prior,
                                         const Eigen::MatrixBase<DerivedA>& alpha,
                                         const Eigen::MatrixBase<DerivedB>& beta, const OpinionVector& y) {
  using Scalar = typename DerivedA::Scalar;
  detail::require_beta_parameters(alpha, beta);
  detail::require_length(alpha, y.size(), "alpha vector");
  if (prior.c() == Scalar(0) || prior.c() == Scalar(1)) return prior.c();

  Scalar log_odds = -detail::prior_log_odds_cutoff(prior);
  for (int i = 0; i < y.size(); ++i) {
    const Scalar g = std::log(alpha[i] / beta[i]);
    log_odds += y[i] == 1 ? g : -g;
  }
  // logistic, written to avoid overflow on either tail
  if (log_odds >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-log_odds));
  const Scalar e = std::exp(log_odds);
  return e / (Scalar(1) + e);
}

template <typename DerivedA, typename DerivedB>
Action bayes_action_beta(const ThetaPrior<typename DerivedA::Scalar>& prior, const Eigen::MatrixBase<DerivedA>& alpha,
                         const Eigen::MatrixBase<DerivedB>& beta, const OpinionVector& y,
                         typename DerivedA::Scalar tie_tolerance = 1e-9) {
  using Scalar = typename DerivedA::Scalar;
  detail::require_beta_parameters(alpha, beta);
  detail::require_tolerance(tie_tolerance);
  detail::require_length(alpha, y.size(), "alpha vector");
  if (prior.c() == Scalar(0)) return Action::Zero;
  if (prior.c() == Scalar(1)) return Action::One;
  return weighted_vote_beta(prior, alpha, beta).decide(y, tie_tolerance);
}

template <typename DerivedA, typename DerivedB>
DecisionRule bayes_rule_beta(const ThetaPrior<typename DerivedA::Scalar>& prior, const Eigen::MatrixBase<DerivedA>& alpha,
                             const Eigen::MatrixBase<DerivedB>& beta, typename DerivedA::Scalar tie_tolerance = 1e-9) {
  using Scalar = typename DerivedA::Scalar;
  detail::require_beta_parameters(alpha, beta);
  detail::require_tolerance(tie_tolerance);
  const int n = static_cast<int>(alpha.size());
  if (prior.c() == Scalar(0)) return DecisionRule::constant(n, Action::Zero);
  if (prior.c() == Scalar(1)) return DecisionRule::constant(n, Action::One);
  return weighted_vote_beta(prior, alpha, beta).to_rule(tie_tolerance);
}

// Dispatch on the accuracy model. Interval models have no prior over the
// accuracies and are rejected.
template <typename Scalar>
DecisionRule bayes_rule(const ThetaPrior<Scalar>& prior, const AccuracyModel<Scalar>& model, Scalar tie_tolerance = 1e-9) {
  if (model.is_known()) return bayes_rule_known(prior, model.as_known().gamma, tie_tolerance);
  if (model.is_beta()) return bayes_rule_beta(prior, model.as_beta().alpha, model.as_beta().beta, tie_tolerance);
  throw InvalidModel("Bayes rule requires a known-accuracy or Beta-prior model");
}

template <typename Scalar>
Action bayes_action(const ThetaPrior<Scalar>& prior, const AccuracyModel<Scalar>& model, const OpinionVector& y,
                    Scalar tie_tolerance = 1e-9) {
  if (model.is_known()) return bayes_action_known(prior, model.as_known().gamma, y, tie_tolerance);
  if (model.is_beta()) return bayes_action_beta(prior, model.as_beta().alpha, model.as_beta().beta, y, tie_tolerance);
  throw InvalidModel("Bayes action requires a known-accuracy or Beta-prior model");
}

template <typename Scalar>
Scalar posterior(const ThetaPrior<Scalar>& prior, const AccuracyModel<Scalar>& model, const OpinionVector& y) {
  if (model.is_known()) return posterior_known(prior, model.as_known().gamma, y);
  if (model.is_beta()) return posterior_beta(prior, model.as_beta().alpha, model.as_beta().beta, y);
  throw InvalidModel("posterior requires a known-accuracy or Beta-prior model");
}

}  // namespace crowdvote
