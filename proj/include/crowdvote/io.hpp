#pragma once

// File formats used by the command line front end.
//
// Panel config (JSON):
//   {
//     "n": 3,
//     "model": {"type": "known", "gamma": [0.8, 0.8, 0.8]}
//            | {"type": "beta", "alpha": [...], "beta": [...]}
//            | {"type": "interval", "epsilon": [...]},
//     "c": 0.5,                  // P(theta = 1), default 0.5
//     "tie_tolerance": 1e-9,     // default 1e-9
//     "seed": 0,                 // default 0
//     "lfp_grid_step": 0.01,     // default 0.01
//     "max_n": 3,                // default 3
//     "box": {"theta": [0, 1], "gamma_lo": [...], "gamma_hi": [...]}  // optional
//   }
//
// Votes (CSV): header `item_id,<expert labels...>`, then one row per item with
// cells exactly `0` or `1`.
//
// Rule table: 2^n lines `pattern_bits,action`, action in {0, 1, coin}, lines
// ordered by pattern index. pattern_bits lists expert 1 first.

#include "crowdvote/model.hpp"
#include "crowdvote/risk.hpp"

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace crowdvote::io {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Config {
  PanelConfig<double> panel;
  double lfp_grid_step = 0.01;
  int max_n = 3;
  std::optional<ParameterBox<double>> box;
};

Config parse_config(std::istream& in);
Config load_config(const std::string& path);

struct VoteMatrix {
  std::vector<std::string> item_ids;
  std::vector<std::string> experts;
  std::vector<OpinionVector> votes;
};

// `expected_n` is the config panel size; a mismatched header is a DataError.
VoteMatrix parse_votes(std::istream& in, int expected_n);
VoteMatrix load_votes(const std::string& path, int expected_n);

// Expert 1 first, e.g. "100" for pattern index 1 with n = 3.
std::string pattern_bits(std::uint64_t index, int n);

void write_rule_table(std::ostream& out, const DecisionRule& rule);
DecisionRule parse_rule_table(std::istream& in);
DecisionRule load_rule_table(const std::string& path);

// Same layout as the rule table with ties written as `0/1`.
void write_decision_table(std::ostream& out, const DecisionRule& rule);

// Shortest decimal representation that round-trips.
std::string format_double(double v);

}  // namespace crowdvote::io
