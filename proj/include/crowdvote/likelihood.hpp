#pragma once

#include "crowdvote/model.hpp"

namespace crowdvote {

// P(Y = pattern | theta, gamma) under conditionally independent, symmetric
// experts: a vote matches theta with probability gamma_i.
template <typename Derived>
typename Derived::Scalar pattern_likelihood(const Eigen::MatrixBase<Derived>& gammas, int theta, std::uint64_t pattern) {
  using Scalar = typename Derived::Scalar;
  Scalar p(1);
  for (Eigen::Index i = 0; i < gammas.size(); ++i) {
    const bool matches = vote_of(pattern, static_cast<int>(i)) == theta;
    p *= matches ? gammas[i] : Scalar(1) - gammas[i];
  }
  return p;
}

template <typename Derived>
typename Derived::Scalar pattern_likelihood(const Eigen::MatrixBase<Derived>& gammas, int theta, const OpinionVector& y) {
  detail::require_length(gammas, y.size(), "accuracy vector");
  return pattern_likelihood(gammas, theta, pattern_index(y));
}

// Column p holds P(pattern p | theta) for p in [0, 2^n).
template <typename Derived>
auto likelihood_table(const Eigen::MatrixBase<Derived>& gammas, int theta) {
  using Scalar = typename Derived::Scalar;
  const int n = static_cast<int>(gammas.size());
  VectorX<Scalar> probs(static_cast<Eigen::Index>(pattern_count(n)));
  for (Eigen::Index p = 0; p < probs.size(); ++p) probs[p] = pattern_likelihood(gammas, theta, static_cast<std::uint64_t>(p));
  return probs;
}

}  // namespace crowdvote
