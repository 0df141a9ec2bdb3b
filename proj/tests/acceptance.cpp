// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fail.

#include "crowdvote/crowdvote.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace crowdvote;
using Vec = VectorX<double>;

namespace {

// Tolerances and fixed inputs.
constexpr double kTol = 1e-12;
constexpr double kGoldenSeconds = 1.0;
constexpr double kNormalFormSeconds = 10.0;
constexpr std::uint64_t kSuiteSeed = 20240917;
constexpr std::uint64_t kMonteCarloSeed = 42;
constexpr std::uint64_t kMonteCarloTrials = 100000;
constexpr double kMonteCarloSigmas = 4.0;

struct Outcome {
  bool pass;
  std::string detail;
};

char buf[512];

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

std::vector<int> oracle_actions(const DecisionRule& rule) {
  std::vector<int> out;
  for (std::uint64_t p = 0; p < rule.num_patterns(); ++p) out.push_back(static_cast<int>(rule[p]));
  return out;
}

Outcome golden_rules() {
  const auto t0 = std::chrono::steady_clock::now();
  // rows in pattern-index order; 2 marks a 0/1 cell
  struct Case {
    Vec alpha, beta;
    std::vector<int> expected;
  };
  const std::vector<Case> cases = {
      {vec({5, 1, 1}), vec({2, 1, 1}), {0, 1, 0, 1, 0, 1, 0, 1}},
      {vec({5, 5, 1}), vec({2, 2, 1}), {0, 2, 2, 1, 0, 2, 2, 1}},
      {vec({5, 5, 2}), vec({2, 2, 5}), {0, 1, 1, 1, 0, 0, 0, 1}},
  };
  int matched = 0;
  for (const auto& c : cases) {
    const auto rule = bayes_rule_beta(ThetaPrior<double>(0.5), c.alpha, c.beta);
    for (std::uint64_t p = 0; p < 8; ++p) matched += static_cast<int>(rule[p]) == c.expected[p];
  }
  const double secs = seconds_since(t0);
  return {matched == 24 && secs < kGoldenSeconds, fmt("%d/24 cells match, %.4f s", matched, secs)};
}

Outcome normal_form() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(kSuiteSeed + 2);
  std::uniform_real_distribution<double> unit(0.0, 1.0), hyper(0.5, 6.0);
  int ok = 0;
  double worst = -1.0;
  for (int k = 0; k < 100; ++k) {
    const int n = k % 2 == 0 ? 1 : 3;
    const ThetaPrior<double> prior(unit(rng));
    AccuracyModel<double> model = [&] {
      Vec a(n), b(n);
      if ((k / 2) % 2 == 0) {
        for (int i = 0; i < n; ++i) a[i] = unit(rng);
        return AccuracyModel<double>::known(a);
      }
      for (int i = 0; i < n; ++i) a[i] = hyper(rng), b[i] = hyper(rng);
      return AccuracyModel<double>::beta(a, b);
    }();
    const double risk = bayes_risk(bayes_rule(prior, model), prior, model);
    const double best = brute_force_bayes(prior, model).optimum;
    worst = std::max(worst, risk - best);
    ok += risk <= best + kTol;
  }
  const double secs = seconds_since(t0);
  return {ok == 100 && secs < kNormalFormSeconds,
          fmt("%d/100 within 1e-12 of the optimum, worst excess %.3g, %.3f s", ok, worst, secs)};
}

Outcome constant_risk() {
  std::mt19937_64 rng(kSuiteSeed + 3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int ok = 0;
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const Vec g = vec({unit(rng), unit(rng), unit(rng)});
    const double gap = constant_risk_gap(bayes_rule_known(ThetaPrior<double>(0.5), g), g);
    worst = std::max(worst, gap);
    ok += gap <= kTol;
  }
  return {ok == 100, fmt("%d/100 gaps <= 1e-12, worst %.3g", ok, worst)};
}

Outcome full_space() {
  const auto box = ParameterBox<double>::full(3);
  const auto search = brute_force_minimax(box);
  const auto coin = rule_index(coin_flip_rule(3));
  const bool unique = search.witnesses.size() == 1 && search.witnesses[0] == coin;

  std::uint64_t deterministic = 0, at_one = 0;
  for (std::uint64_t idx = 0; idx < 6561; ++idx) {
    const auto rule = rule_from_index(idx, 3);
    if (!rule.has_deterministic_entry()) continue;
    ++deterministic;
    at_one += sup_risk_box(rule, box).value == 1.0;
  }
  const bool pass = std::abs(search.optimum - 0.5) <= kTol && unique && at_one == deterministic && deterministic == 6560;
  return {pass, fmt("value %.17g, %zu witness(es), all-coin unique: %s, sup risk exactly 1 for %llu/%llu rules",
                    search.optimum, search.witnesses.size(), unique ? "yes" : "no",
                    static_cast<unsigned long long>(at_one), static_cast<unsigned long long>(deterministic))};
}

Outcome restricted() {
  // independent value: risk of majority voting when each expert is right w.p. 0.6
  const double expected = 3 * 0.4 * 0.4 * 0.6 + 0.4 * 0.4 * 0.4;
  const auto majority = majority_rule(3);
  const std::vector<double> g{0.6, 0.6, 0.6};
  const bool oracle_ok = std::abs(oracle::risk(oracle_actions(majority), 0, g) - expected) <= kTol &&
                         std::abs(oracle::risk(oracle_actions(majority), 1, g) - expected) <= kTol;

  const auto box = ParameterBox<double>::better_than_coin(vec({0.1, 0.1, 0.1}));
  const auto search = brute_force_minimax(box);
  bool among = false;
  for (auto w : search.witnesses) among = among || w == rule_index(majority);
  const double sup = sup_risk_box(majority, box).value;
  const auto sandwich = minimax_sandwich(box);
  const bool pass = oracle_ok && std::abs(search.optimum - expected) <= kTol && among &&
                    std::abs(sup - search.optimum) <= kTol && sandwich.closes;
  return {pass, fmt("value %.17g (oracle %.17g), majority among %zu witness(es): %s, sup_risk_box(majority) %.17g, "
                    "sandwich [%.17g, %.17g]",
                    search.optimum, expected, search.witnesses.size(), among ? "yes" : "no", sup, sandwich.lower,
                    sandwich.upper)};
}

Outcome least_favorable() {
  const auto scan = least_favorable_scan(vec({0.8, 0.8, 0.8}), prior_grid(0.01));
  const bool pass = std::abs(scan.c_star - 0.5) <= kTol;
  return {pass, fmt("c* = %.17g, max Bayes risk %.17g, %zu grid points on the peak (%.2f..%.2f)", scan.c_star,
                    scan.max_bayes_risk, scan.peak.size(), scan.grid[scan.peak.front()], scan.grid[scan.peak.back()])};
}

Outcome beta_known() {
  std::mt19937_64 rng(kSuiteSeed + 7);
  std::uniform_real_distribution<double> unit(0.0, 1.0), hyper(0.5, 6.0);
  int ok = 0;
  for (int k = 0; k < 100; ++k) {
    const int n = 1 + 2 * (k % 3);
    Vec a(n), b(n);
    for (int i = 0; i < n; ++i) a[i] = hyper(rng), b[i] = hyper(rng);
    const ThetaPrior<double> prior(unit(rng));
    const Vec means = (a.array() / (a.array() + b.array())).matrix();
    ok += bayes_rule_beta(prior, a, b) == bayes_rule_known(prior, means);
  }
  return {ok == 100, fmt("%d/100 tables identical", ok)};
}

Outcome monte_carlo() {
  const auto majority = majority_rule(3);
  const Vec g = vec({0.8, 0.8, 0.8});
  bool pass = true;
  std::string detail = fmt("seed %llu, %llu trials:", static_cast<unsigned long long>(kMonteCarloSeed),
                           static_cast<unsigned long long>(kMonteCarloTrials));
  for (int theta : {0, 1}) {
    const auto mc = monte_carlo_risk(majority, theta, g, kMonteCarloTrials, kMonteCarloSeed);
    const double z = (mc.estimate - 0.104) / mc.std_error;
    pass = pass && std::abs(z) <= kMonteCarloSigmas;
    detail += fmt(" theta=%d estimate %.5f (se %.5f, z %+.2f)", theta, mc.estimate, mc.std_error, z);
  }
  return {pass, detail};
}

Outcome affinity() {
  std::mt19937_64 rng(kSuiteSeed + 9);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> panel(1, 5), action(0, 2), state(0, 1);
  int ok = 0;
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const int n = panel(rng);
    std::vector<Action> table(std::size_t{1} << n);
    for (auto& a : table) a = static_cast<Action>(action(rng));
    const DecisionRule rule(n, table);
    const int theta = state(rng);
    Vec g(n);
    for (int i = 0; i < n; ++i) g[i] = unit(rng);
    const int i = std::uniform_int_distribution<int>(0, n - 1)(rng);
    double t[3] = {unit(rng), unit(rng), unit(rng)};
    std::sort(t, t + 3);
    double r[3];
    for (int j = 0; j < 3; ++j) {
      g[i] = t[j];
      r[j] = risk_exact(rule, theta, g);
    }
    // middle value against the chord through the outer two
    const double chord = r[0] + (r[2] - r[0]) * (t[1] - t[0]) / (t[2] - t[0]);
    const double dev = std::abs(r[1] - chord);
    worst = std::max(worst, dev);
    ok += dev <= kTol;
  }
  return {ok == 50, fmt("%d/50 triples collinear to 1e-12, worst deviation %.3g", ok, worst)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"Beta-prior golden rules", golden_rules},
      {"extensive form equals normal form", normal_form},
      {"constant risk at c=1/2", constant_risk},
      {"full-space minimax", full_space},
      {"restricted minimax eps=0.1", restricted},
      {"least favorable prior", least_favorable},
      {"Beta/known reduction", beta_known},
      {"Monte Carlo consistency", monte_carlo},
      {"risk affine in each accuracy", affinity},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("criterion %zu %s: %s (%s)\n", k + 1, o.pass ? "PASS" : "FAIL", criteria[k].first, o.detail.c_str());
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
