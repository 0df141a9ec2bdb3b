#pragma once

// Named rules, exhaustive Bayes and minimax search over the full space of
// deterministic-or-coin rules, and least favorable prior checks.
//
// The rule space is {Zero, One, Coin}^(2^n), indexed in base 3 with pattern 0
// in the least significant digit (see rule_from_index).

#include "crowdvote/bayes.hpp"
#include "crowdvote/likelihood.hpp"
#include "crowdvote/model.hpp"
#include "crowdvote/risk.hpp"

#include <algorithm>
#include <limits>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace crowdvote {

// ---------------------------------------------------------------------------
// Named rules
// ---------------------------------------------------------------------------

// One iff more than half of the experts vote 1. Odd panels only.
inline DecisionRule majority_rule(int n) {
  if (n < 1) throw InvalidArgument("majority rule needs at least one expert");
  if (n % 2 == 0) throw EvenPanel("majority rule is undefined for an even panel (n=" + std::to_string(n) + ")");
  std::vector<Action> table(pattern_count(n));
  for (std::uint64_t p = 0; p < table.size(); ++p)
    table[p] = 2 * pattern_from_index(p, n).ones() > n ? Action::One : Action::Zero;
  return DecisionRule(n, std::move(table));
}

inline DecisionRule coin_flip_rule(int n) {
  if (n < 1) throw InvalidArgument("coin flip rule needs at least one expert");
  return DecisionRule::constant(n, Action::Coin);
}

// Bayes rule for c = 1/2 at the least accurate admissible experts,
// gamma_i = 1/2 + epsilon_i. Minimax when each expert is known to be at
// least epsilon_i better than a coin flip.
template <typename Derived>
DecisionRule interval_minimax_rule(const Eigen::MatrixBase<Derived>& epsilons,
                                   typename Derived::Scalar tie_tolerance = 1e-9) {
  using Scalar = typename Derived::Scalar;
  const auto model = AccuracyModel<Scalar>::interval(epsilons);  // validates 0 < eps < 1/2
  const VectorX<Scalar> gammas = (model.as_interval().epsilon.array() + Scalar(0.5)).matrix();
  return bayes_rule_known(ThetaPrior<Scalar>(Scalar(0.5)), gammas, tie_tolerance);
}

// ---------------------------------------------------------------------------
// Exhaustive search
// ---------------------------------------------------------------------------

template <typename Scalar = double>
struct SearchOptions {
  int max_n = 3;
  Scalar witness_tolerance = Scalar(1e-12);
  // 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;
};

template <typename Scalar = double>
struct SearchResult {
  Scalar optimum{};
  // Rule indices attaining the optimum within tolerance, ascending.
  std::vector<std::uint64_t> witnesses;
  std::uint64_t enumerated = 0;

  bool has_witness(const DecisionRule& rule) const {
    return std::binary_search(witnesses.begin(), witnesses.end(), rule_index(rule));
  }
};

namespace detail {

inline std::string enumeration_cost(int n) {
  // 3^(2^n) rules, each scored over 2^n patterns
  std::string msg = "exhaustive search over n=" + std::to_string(n) + " experts needs 3^(2^" + std::to_string(n) +
                    ") = 3^" + std::to_string(pattern_count(n)) + " rules";
  if (auto size = rule_space_size(n)) msg += " (" + std::to_string(*size) + ")";
  return msg;
}

template <typename Scalar>
std::uint64_t require_enumerable(int n, const SearchOptions<Scalar>& options) {
  if (n > options.max_n)
    throw PanelTooLarge(enumeration_cost(n) + "; panel exceeds max_n=" + std::to_string(options.max_n));
  const auto size = rule_space_size(n);
  if (!size) throw PanelTooLarge(enumeration_cost(n) + "; rule count overflows 64 bits");
  return *size;
}

// Scores every rule against each row of `contrib`. Row r, column 3p+a holds
// the loss contribution of action a on pattern p for scenario r; a rule's
// score is the maximum over rows of the summed contributions. One row gives
// the Bayes risk, several rows give the worst case over scenarios.
template <typename Scalar>
SearchResult<Scalar> enumerate_rules(int n, const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& contrib,
                                     const SearchOptions<Scalar>& options) {
  const std::uint64_t total = require_enumerable(n, options);
  const auto patterns = static_cast<Eigen::Index>(pattern_count(n));
  const Eigen::Index rows = contrib.rows();

  unsigned workers = options.threads ? options.threads : std::max(1U, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, std::max<std::uint64_t>(1, total / 4096)));

  struct Partial {
    Scalar best = std::numeric_limits<Scalar>::infinity();
    std::vector<std::pair<std::uint64_t, Scalar>> near_best;
  };
  std::vector<Partial> partials(workers);

  auto scan = [&](unsigned w) {
    const std::uint64_t begin = total / workers * w + std::min<std::uint64_t>(w, total % workers);
    const std::uint64_t end = begin + total / workers + (w < total % workers ? 1 : 0);
    Partial& out = partials[w];
    std::vector<int> digits(static_cast<std::size_t>(patterns));
    for (std::uint64_t index = begin; index < end; ++index) {
      std::uint64_t rest = index;
      for (auto& d : digits) {
        d = static_cast<int>(rest % 3);
        rest /= 3;
      }
      Scalar score = -std::numeric_limits<Scalar>::infinity();
      for (Eigen::Index r = 0; r < rows; ++r) {
        Scalar s(0);
        for (Eigen::Index p = 0; p < patterns; ++p) s += contrib(r, 3 * p + digits[static_cast<std::size_t>(p)]);
        score = std::max(score, s);
      }
      if (score < out.best) {
        out.best = score;
        std::erase_if(out.near_best, [&](const auto& e) { return e.second > score + options.witness_tolerance; });
      }
      if (score <= out.best + options.witness_tolerance) out.near_best.emplace_back(index, score);
    }
  };

  if (workers == 1) {
    scan(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(scan, w);
    for (auto& t : pool) t.join();
  }

  SearchResult<Scalar> result;
  result.enumerated = total;
  result.optimum = std::numeric_limits<Scalar>::infinity();
  for (const auto& part : partials) result.optimum = std::min(result.optimum, part.best);
  // chunks are in index order, so concatenation keeps witnesses ascending
  for (const auto& part : partials)
    for (const auto& [index, score] : part.near_best)
      if (score <= result.optimum + options.witness_tolerance) result.witnesses.push_back(index);
  return result;
}

template <typename Scalar>
void add_scenario(Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& contrib, Eigen::Index row, int theta,
                  Scalar weight, const VectorX<Scalar>& gammas) {
  const auto patterns = static_cast<Eigen::Index>(pattern_count(static_cast<int>(gammas.size())));
  for (Eigen::Index p = 0; p < patterns; ++p) {
    const Scalar prob = weight * pattern_likelihood(gammas, theta, static_cast<std::uint64_t>(p));
    for (int a = 0; a < 3; ++a) contrib(row, 3 * p + a) += prob * expected_loss<Scalar>(static_cast<Action>(a), theta);
  }
}

}  // namespace detail

// Minimum Bayes risk over every rule, by enumeration.
template <typename Scalar>
SearchResult<Scalar> brute_force_bayes(const ThetaPrior<Scalar>& prior, const AccuracyModel<Scalar>& model,
                                       const SearchOptions<Scalar>& options = {}) {
  const int n = model.n();
  detail::require_enumerable(n, options);
  const VectorX<Scalar> gammas = marginal_accuracies(model);
  const auto patterns = static_cast<Eigen::Index>(pattern_count(n));
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> contrib =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(1, 3 * patterns);
  // theta = 1 first, matching bayes_risk_known's summation order
  detail::add_scenario(contrib, 0, 1, prior.mass(1), gammas);
  detail::add_scenario(contrib, 0, 0, prior.mass(0), gammas);
  return detail::enumerate_rules(n, contrib, options);
}

// Minimum over every rule of its worst-case risk over the box, by enumeration.
template <typename Scalar>
SearchResult<Scalar> brute_force_minimax(const ParameterBox<Scalar>& box, const SearchOptions<Scalar>& options = {}) {
  const int n = box.n();
  detail::require_enumerable(n, options);
  const auto patterns = static_cast<Eigen::Index>(pattern_count(n));
  const auto vertices = static_cast<Eigen::Index>(box.num_vertices());
  const auto rows = static_cast<Eigen::Index>(box.theta_values().size()) * vertices;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> contrib =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(rows, 3 * patterns);
  Eigen::Index row = 0;
  for (int theta : box.theta_values())
    for (Eigen::Index v = 0; v < vertices; ++v)
      detail::add_scenario(contrib, row++, theta, Scalar(1), box.vertex(static_cast<std::uint64_t>(v)));
  return detail::enumerate_rules(n, contrib, options);
}

// ---------------------------------------------------------------------------
// Upper/lower bound sandwich for restricted parameter spaces
// ---------------------------------------------------------------------------

template <typename Scalar = double>
struct MinimaxSandwich {
  DecisionRule candidate;
  // sup over the box of the candidate's risk
  Scalar upper{};
  // minimax value over the two-state reduction at the point closest to 1/2
  Scalar lower{};
  VectorX<Scalar> reduction_point;
  bool closes = false;
};

// Candidate: the c = 1/2 Bayes rule at the accuracies closest to a coin flip.
// The lower bound is the exhaustive minimax value over both states at that
// single accuracy vector; upper == lower certifies the candidate as minimax.
template <typename Scalar>
MinimaxSandwich<Scalar> minimax_sandwich(const ParameterBox<Scalar>& box, Scalar tie_tolerance = Scalar(1e-9),
                                         const SearchOptions<Scalar>& options = {}) {
  VectorX<Scalar> point = box.closest_to_coin();
  DecisionRule candidate = bayes_rule_known(ThetaPrior<Scalar>(Scalar(0.5)), point, tie_tolerance);
  const Scalar upper = sup_risk_box(candidate, box).value;
  const ParameterBox<Scalar> reduction(box.theta_values(), point, point);
  const Scalar lower = brute_force_minimax(reduction, options).optimum;
  const bool closes = upper <= lower + options.witness_tolerance;
  return {std::move(candidate), upper, lower, std::move(point), closes};
}

// ---------------------------------------------------------------------------
// Least favorable prior
// ---------------------------------------------------------------------------

// Interior grid {k * step : 0 < k * step < 1}. When 1/step is an integer N the
// points are computed as k / N so that 1/2 is hit exactly.
template <typename Scalar = double>
std::vector<Scalar> prior_grid(Scalar step) {
  if (!(step > Scalar(0) && step < Scalar(1))) throw InvalidArgument("grid step must lie in (0,1)");
  std::vector<Scalar> grid;
  const Scalar inverse = Scalar(1) / step;
  const Scalar rounded = std::round(inverse);
  if (std::abs(inverse - rounded) < Scalar(1e-9)) {
    const auto count = static_cast<long long>(rounded);
    for (long long k = 1; k < count; ++k) grid.push_back(static_cast<Scalar>(k) / rounded);
  } else {
    for (long long k = 1; static_cast<Scalar>(k) * step < Scalar(1); ++k) grid.push_back(static_cast<Scalar>(k) * step);
  }
  return grid;
}

template <typename Scalar = double>
struct LeastFavorableScan {
  Scalar c_star{};
  Scalar max_bayes_risk{};
  std::vector<Scalar> grid;
  std::vector<Scalar> bayes_risk;
  // grid points whose Bayes risk is within tolerance of the maximum
  std::vector<std::size_t> peak;

  bool flat_peak() const { return peak.size() > 1; }
};

// Bayes risk of the Bayes rule at every grid prior. The curve can be flat
// where the Bayes rule has constant risk; c_star is the middle point of the
// maximizing set.
template <typename Derived>
LeastFavorableScan<typename Derived::Scalar> least_favorable_scan(const Eigen::MatrixBase<Derived>& gammas,
                                                                  std::vector<typename Derived::Scalar> grid,
                                                                  typename Derived::Scalar tie_tolerance = 1e-9,
                                                                  typename Derived::Scalar peak_tolerance = 1e-12) {
  using Scalar = typename Derived::Scalar;
  detail::require_accuracies(gammas);
  if (grid.empty()) throw InvalidArgument("least favorable prior scan needs a nonempty grid");
  LeastFavorableScan<Scalar> scan;
  scan.bayes_risk.reserve(grid.size());
  for (Scalar c : grid) {
    const ThetaPrior<Scalar> prior(c);
    const DecisionRule rule = bayes_rule_known(prior, gammas, tie_tolerance);
    scan.bayes_risk.push_back(bayes_risk_known(rule, prior, gammas));
  }
  scan.grid = std::move(grid);
  scan.max_bayes_risk = *std::max_element(scan.bayes_risk.begin(), scan.bayes_risk.end());
  for (std::size_t i = 0; i < scan.bayes_risk.size(); ++i)
    if (scan.bayes_risk[i] >= scan.max_bayes_risk - peak_tolerance) scan.peak.push_back(i);
  scan.c_star = scan.grid[scan.peak[(scan.peak.size() - 1) / 2]];
  return scan;
}

// ---------------------------------------------------------------------------
// Constant-risk Bayes certificate
// ---------------------------------------------------------------------------

template <typename Scalar = double>
struct ConstantRiskCertificate {
  bool certified = false;
  Scalar bayes_risk{};
  Scalar optimum{};
  Scalar risk_gap{};

  explicit operator bool() const { return certified; }
};

// A rule that is Bayes for some prior and has constant risk is minimax.
// Bayes-ness is checked against the exhaustive optimum.
template <typename Derived>
ConstantRiskCertificate<typename Derived::Scalar> verify_constant_risk_bayes(
    const DecisionRule& rule, const ThetaPrior<typename Derived::Scalar>& prior, const Eigen::MatrixBase<Derived>& gammas,
    const SearchOptions<typename Derived::Scalar>& options = {}) {
  using Scalar = typename Derived::Scalar;
  const auto model = AccuracyModel<Scalar>::known(gammas);
  const SearchResult<Scalar> search = brute_force_bayes(prior, model, options);
  ConstantRiskCertificate<Scalar> cert;
  cert.bayes_risk = bayes_risk_known(rule, prior, gammas);
  cert.optimum = search.optimum;
  cert.risk_gap = constant_risk_gap(rule, gammas);
  cert.certified = cert.bayes_risk <= cert.optimum + options.witness_tolerance && cert.risk_gap <= Scalar(1e-12);
  return cert;
}

}  // namespace crowdvote
