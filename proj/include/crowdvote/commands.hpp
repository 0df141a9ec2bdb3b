#pragma once

// Subcommands of the crowdvote tool. Each returns a process exit status and
// writes diagnostics to `err`.

#include "crowdvote/io.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

namespace crowdvote::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kConfigError = 2,
  kDataError = 3,
  kInfeasible = 4,
};

struct CommonArgs {
  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
};

struct AggregateArgs {
  CommonArgs common;
  std::string votes_path;
  // Optional companion rendering of the rule with ties as `0/1`.
  std::string table_path;
};

struct RiskArgs {
  CommonArgs common;
  std::string rule = "bayes";
  // Optional rule table file in the re-ingestible format.
  std::string table_path;
};

struct MinimaxArgs {
  CommonArgs common;
};

struct LfpArgs {
  CommonArgs common;
};

struct SimulateArgs {
  CommonArgs common;
  std::string rule = "bayes";
  std::uint64_t trials = 100000;
};

int run_aggregate(const AggregateArgs& args, std::ostream& err);
int run_risk(const RiskArgs& args, std::ostream& err);
int run_minimax(const MinimaxArgs& args, std::ostream& err);
int run_lfp(const LfpArgs& args, std::ostream& out, std::ostream& err);
int run_simulate(const SimulateArgs& args, std::ostream& err);

// Rule named by `spec`: bayes, majority, coinflip, interval-minimax, or a
// path to a rule table file.
DecisionRule resolve_rule(const io::Config& config, const std::string& spec);

// Accuracies at which conditional risks are evaluated: gamma for known
// models, the Beta means, or 1/2 + epsilon for interval models.
VectorX<double> evaluation_accuracies(const io::Config& config);

// Fair coin bit for row `row` of the seeded stream.
int coin_bit(std::uint64_t seed, std::uint64_t row);

}  // namespace crowdvote::cli
