#pragma once

// Domain types for binary expert aggregation: opinion patterns, accuracy
// models, the prior on the hidden state, decision rules and risk reports.
//
// Scalar-dependent types are templated on the floating point type; the rest
// of the library deduces Scalar from the Eigen expressions it is handed.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace crowdvote {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Largest panel for which a pattern index fits comfortably in 64 bits.
inline constexpr int kMaxPanelSize = 62;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

// Invariant violation at construction time.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The observed pattern has probability zero under both states.
class ZeroProbabilityObservation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class EvenPanel : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidModel : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class PanelTooLarge : public std::length_error {
 public:
  using std::length_error::length_error;
};

// ---------------------------------------------------------------------------
// Opinion patterns
// ---------------------------------------------------------------------------

class OpinionVector {
 public:
  explicit OpinionVector(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
    if (bits_.empty()) throw InvalidArgument("opinion vector must hold at least one vote");
    if (static_cast<int>(bits_.size()) > kMaxPanelSize)
      throw InvalidArgument("opinion vector longer than " + std::to_string(kMaxPanelSize));
    for (std::size_t i = 0; i < bits_.size(); ++i) {
      if (bits_[i] > 1)
        throw InvalidArgument("vote " + std::to_string(i + 1) + " is not 0 or 1");
    }
  }

  OpinionVector(std::initializer_list<int> bits) : OpinionVector(narrow(bits)) {}

  int size() const { return static_cast<int>(bits_.size()); }
  std::uint8_t operator[](int i) const { return bits_[static_cast<std::size_t>(i)]; }
  const std::vector<std::uint8_t>& bits() const { return bits_; }

  int ones() const {
    int k = 0;
    for (auto b : bits_) k += b;
    return k;
  }

  // Fraction of experts voting 1.
  template <typename Scalar = double>
  Scalar mean() const {
    return static_cast<Scalar>(ones()) / static_cast<Scalar>(size());
  }

  template <typename Scalar = double>
  VectorX<Scalar> as_vector() const {
    VectorX<Scalar> v(size());
    for (int i = 0; i < size(); ++i) v[i] = static_cast<Scalar>(bits_[static_cast<std::size_t>(i)]);
    return v;
  }

  OpinionVector complement() const {
    std::vector<std::uint8_t> flipped(bits_.size());
    for (std::size_t i = 0; i < bits_.size(); ++i) flipped[i] = static_cast<std::uint8_t>(1 - bits_[i]);
    return OpinionVector(std::move(flipped));
  }

  friend bool operator==(const OpinionVector&, const OpinionVector&) = default;

 private:
  static std::vector<std::uint8_t> narrow(std::initializer_list<int> bits) {
    std::vector<std::uint8_t> out;
    out.reserve(bits.size());
    for (int b : bits) {
      if (b != 0 && b != 1) throw InvalidArgument("votes must be 0 or 1");
      out.push_back(static_cast<std::uint8_t>(b));
    }
    return out;
  }

  std::vector<std::uint8_t> bits_;
};

inline std::uint64_t pattern_count(int n) {
  if (n < 1 || n > kMaxPanelSize) throw InvalidArgument("panel size out of range: " + std::to_string(n));
  return std::uint64_t{1} << n;
}

// Expert 1 is the least significant bit.
inline std::uint64_t pattern_index(const OpinionVector& y) {
  std::uint64_t index = 0;
  for (int i = 0; i < y.size(); ++i) index |= static_cast<std::uint64_t>(y[i]) << i;
  return index;
}

inline OpinionVector pattern_from_index(std::uint64_t index, int n) {
  if (index >= pattern_count(n))
    throw InvalidArgument("pattern index " + std::to_string(index) + " out of range for n=" + std::to_string(n));
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) bits[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>((index >> i) & 1U);
  return OpinionVector(std::move(bits));
}

// Bit of expert i in pattern `index`.
inline int vote_of(std::uint64_t index, int i) { return static_cast<int>((index >> i) & 1U); }

// ---------------------------------------------------------------------------
// Prior on the hidden state and expert accuracy models
// ---------------------------------------------------------------------------

template <typename Scalar = double>
class ThetaPrior {
 public:
  explicit ThetaPrior(Scalar c) : c_(c) {
    if (!(c >= Scalar(0) && c <= Scalar(1))) throw InvalidArgument("prior P(theta=1) must lie in [0,1]");
  }
  // P(theta = 1)
  Scalar c() const { return c_; }
  Scalar mass(int theta) const { return theta == 1 ? c_ : Scalar(1) - c_; }

 private:
  Scalar c_;
};

namespace detail {

template <typename Derived>
void require_length(const Eigen::MatrixBase<Derived>& v, Eigen::Index n, const char* what) {
  if (v.size() != n)
    throw InvalidArgument(std::string(what) + " has length " + std::to_string(v.size()) + ", expected " +
                          std::to_string(n));
}

template <typename Derived>
void require_accuracies(const Eigen::MatrixBase<Derived>& gammas) {
  using Scalar = typename Derived::Scalar;
  if (gammas.size() < 1 || gammas.size() > kMaxPanelSize) throw InvalidArgument("accuracy vector has invalid length");
  for (Eigen::Index i = 0; i < gammas.size(); ++i) {
    if (!(gammas[i] >= Scalar(0) && gammas[i] <= Scalar(1)))
      throw InvalidArgument("accuracy of expert " + std::to_string(i + 1) + " outside [0,1]");
  }
}

}  // namespace detail

template <typename Scalar = double>
struct KnownAccuracy {
  VectorX<Scalar> gamma;
};

template <typename Scalar = double>
struct BetaAccuracy {
  VectorX<Scalar> alpha;
  VectorX<Scalar> beta;
};

template <typename Scalar = double>
struct IntervalAccuracy {
  VectorX<Scalar> epsilon;
};

template <typename Scalar = double>
class AccuracyModel {
 public:
  using Variant = std::variant<KnownAccuracy<Scalar>, BetaAccuracy<Scalar>, IntervalAccuracy<Scalar>>;

  static AccuracyModel known(VectorX<Scalar> gamma) {
    detail::require_accuracies(gamma);
    return AccuracyModel(KnownAccuracy<Scalar>{std::move(gamma)});
  }

  static AccuracyModel beta(VectorX<Scalar> alpha, VectorX<Scalar> beta) {
    if (alpha.size() < 1 || alpha.size() > kMaxPanelSize) throw InvalidArgument("alpha vector has invalid length");
    detail::require_length(beta, alpha.size(), "beta vector");
    for (Eigen::Index i = 0; i < alpha.size(); ++i) {
      if (!(alpha[i] > Scalar(0)) || !(beta[i] > Scalar(0)) || !std::isfinite(static_cast<double>(alpha[i])) ||
          !std::isfinite(static_cast<double>(beta[i])))
        throw InvalidArgument("Beta parameters of expert " + std::to_string(i + 1) + " must be finite and positive");
    }
    return AccuracyModel(BetaAccuracy<Scalar>{std::move(alpha), std::move(beta)});
  }

  static AccuracyModel interval(VectorX<Scalar> epsilon) {
    if (epsilon.size() < 1 || epsilon.size() > kMaxPanelSize) throw InvalidArgument("epsilon vector has invalid length");
    for (Eigen::Index i = 0; i < epsilon.size(); ++i) {
      if (!(epsilon[i] > Scalar(0) && epsilon[i] < Scalar(0.5)))
        throw InvalidArgument("epsilon of expert " + std::to_string(i + 1) + " must lie in (0, 1/2)");
    }
    return AccuracyModel(IntervalAccuracy<Scalar>{std::move(epsilon)});
  }

  int n() const {
    return std::visit(
        [](const auto& m) -> int {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, KnownAccuracy<Scalar>>) return static_cast<int>(m.gamma.size());
          else if constexpr (std::is_same_v<M, BetaAccuracy<Scalar>>) return static_cast<int>(m.alpha.size());
          else return static_cast<int>(m.epsilon.size());
        },
        value_);
  }

  bool is_known() const { return std::holds_alternative<KnownAccuracy<Scalar>>(value_); }
  bool is_beta() const { return std::holds_alternative<BetaAccuracy<Scalar>>(value_); }
  bool is_interval() const { return std::holds_alternative<IntervalAccuracy<Scalar>>(value_); }

  const KnownAccuracy<Scalar>& as_known() const { return std::get<KnownAccuracy<Scalar>>(value_); }
  const BetaAccuracy<Scalar>& as_beta() const { return std::get<BetaAccuracy<Scalar>>(value_); }
  const IntervalAccuracy<Scalar>& as_interval() const { return std::get<IntervalAccuracy<Scalar>>(value_); }

  const Variant& variant() const { return value_; }

 private:
  explicit AccuracyModel(Variant v) : value_(std::move(v)) {}
  Variant value_;
};

// Expected accuracies alpha_i / (alpha_i + beta_i).
template <typename DerivedA, typename DerivedB>
auto beta_means(const Eigen::MatrixBase<DerivedA>& alpha, const Eigen::MatrixBase<DerivedB>& beta) {
  using Scalar = typename DerivedA::Scalar;
  return VectorX<Scalar>(alpha.array() / (alpha.array() + beta.array()));
}

// ---------------------------------------------------------------------------
// Decision rules
// ---------------------------------------------------------------------------

// Coin means "output the fair coin flip".
enum class Action : std::uint8_t { Zero = 0, One = 1, Coin = 2 };

inline const char* to_string(Action a) {
  switch (a) {
    case Action::Zero: return "0";
    case Action::One: return "1";
    case Action::Coin: return "coin";
  }
  return "?";
}

// Total table from the 2^n opinion patterns to actions.
class DecisionRule {
 public:
  DecisionRule(int n, std::vector<Action> table) : n_(n), table_(std::move(table)) {
    if (table_.size() != pattern_count(n))
      throw InvalidArgument("rule table has " + std::to_string(table_.size()) + " entries, expected 2^" +
                            std::to_string(n));
    for (auto a : table_) {
      if (a != Action::Zero && a != Action::One && a != Action::Coin) throw InvalidArgument("unknown action in rule table");
    }
  }

  static DecisionRule constant(int n, Action a) {
    return DecisionRule(n, std::vector<Action>(pattern_count(n), a));
  }

  int n() const { return n_; }
  std::uint64_t num_patterns() const { return table_.size(); }
  Action operator[](std::uint64_t index) const { return table_[index]; }
  Action action(const OpinionVector& y) const {
    if (y.size() != n_) throw InvalidArgument("opinion vector length does not match rule panel size");
    return table_[pattern_index(y)];
  }
  const std::vector<Action>& table() const { return table_; }

  bool has_deterministic_entry() const {
    for (auto a : table_)
      if (a != Action::Coin) return true;
    return false;
  }

  friend bool operator==(const DecisionRule&, const DecisionRule&) = default;

 private:
  int n_;
  std::vector<Action> table_;
};

// Number of rules in {Zero, One, Coin}^(2^n); nullopt when it overflows 64 bits.
inline std::optional<std::uint64_t> rule_space_size(int n) {
  const std::uint64_t patterns = pattern_count(n);
  std::uint64_t total = 1;
  for (std::uint64_t p = 0; p < patterns; ++p) {
    if (total > UINT64_MAX / 3) return std::nullopt;
    total *= 3;
  }
  return total;
}

// Base-3 encoding, pattern 0 in the least significant digit.
inline DecisionRule rule_from_index(std::uint64_t index, int n) {
  std::vector<Action> table(pattern_count(n));
  for (auto& a : table) {
    a = static_cast<Action>(index % 3);
    index /= 3;
  }
  if (index != 0) throw InvalidArgument("rule index out of range");
  return DecisionRule(n, std::move(table));
}

inline std::uint64_t rule_index(const DecisionRule& rule) {
  if (!rule_space_size(rule.n())) throw InvalidArgument("rule space too large to index");
  std::uint64_t index = 0;
  for (auto it = rule.table().rbegin(); it != rule.table().rend(); ++it) index = index * 3 + static_cast<std::uint64_t>(*it);
  return index;
}

// ---------------------------------------------------------------------------
// Risk report and panel configuration
// ---------------------------------------------------------------------------

template <typename Scalar = double>
struct RiskReport {
  Scalar risk0{};
  Scalar risk1{};
  Scalar sup_risk{};
  std::optional<Scalar> bayes_risk;

  static RiskReport make(Scalar r0, Scalar r1, std::optional<Scalar> bayes = std::nullopt) {
    auto in_unit = [](Scalar v) { return v >= Scalar(0) && v <= Scalar(1); };
    if (!in_unit(r0) || !in_unit(r1) || (bayes && !in_unit(*bayes)))
      throw InvalidArgument("risk values must lie in [0,1]");
    return RiskReport{r0, r1, std::max(r0, r1), bayes};
  }
};

template <typename Scalar = double>
struct PanelConfig {
  int n = 0;
  AccuracyModel<Scalar> model;
  ThetaPrior<Scalar> prior{Scalar(0.5)};
  Scalar tie_tolerance = Scalar(1e-9);
  std::uint64_t seed = 0;

  PanelConfig(int n_, AccuracyModel<Scalar> model_, ThetaPrior<Scalar> prior_, Scalar tie_tolerance_ = Scalar(1e-9),
              std::uint64_t seed_ = 0)
      : n(n_), model(std::move(model_)), prior(prior_), tie_tolerance(tie_tolerance_), seed(seed_) {
    if (model.n() != n)
      throw InvalidArgument("panel size n=" + std::to_string(n) + " does not match model length " +
                            std::to_string(model.n()));
    if (!(tie_tolerance >= Scalar(0))) throw InvalidArgument("tie tolerance must be nonnegative");
  }
};

}  // namespace crowdvote
