#include "crowdvote/commands.hpp"

#include "crowdvote/bayes.hpp"
#include "crowdvote/minimax.hpp"
#include "crowdvote/risk.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <random>

namespace crowdvote::cli {

namespace {

using nlohmann::ordered_json;

// Largest panel for which a full rule table is written.
constexpr int kMaxTablePanel = 20;

class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw OutputError("cannot write '" + path + "'");
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw OutputError("write to '" + path + "' failed");
}

io::Config load(const CommonArgs& args) {
  io::Config config = io::load_config(args.config_path);
  if (args.seed) config.panel.seed = *args.seed;
  return config;
}

ordered_json table_json(const DecisionRule& rule) {
  ordered_json lines = ordered_json::array();
  for (std::uint64_t p = 0; p < rule.num_patterns(); ++p)
    lines.push_back(io::pattern_bits(p, rule.n()) + "," + to_string(rule[p]));
  return lines;
}

ordered_json vector_json(const VectorX<double>& v) {
  ordered_json arr = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

// Box for worst-case risk: explicit bounds win, then the interval model.
std::optional<ParameterBox<double>> configured_box(const io::Config& config) {
  if (config.box) return config.box;
  if (config.panel.model.is_interval()) return ParameterBox<double>::better_than_coin(config.panel.model.as_interval().epsilon);
  return std::nullopt;
}

// Maps exceptions onto exit codes.
template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const io::ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const EvenPanel& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const InvalidModel& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const PanelTooLarge& e) {
    err << "infeasible search: " << e.what() << '\n';
    return kInfeasible;
  } catch (const io::DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const OutputError& e) {
    err << "output error: " << e.what() << '\n';
    return kDataError;
  } catch (const InvalidArgument& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  }
}

}  // namespace

VectorX<double> evaluation_accuracies(const io::Config& config) {
  const auto& model = config.panel.model;
  if (model.is_interval()) return (model.as_interval().epsilon.array() + 0.5).matrix();
  return marginal_accuracies(model);
}

DecisionRule resolve_rule(const io::Config& config, const std::string& spec) {
  const auto& panel = config.panel;
  if (panel.n > kMaxTablePanel)
    throw io::ConfigError("rule tables need n <= " + std::to_string(kMaxTablePanel) + " (config has n=" +
                          std::to_string(panel.n) + ")");
  DecisionRule rule = [&] {
    if (spec == "bayes") return bayes_rule(panel.prior, panel.model, panel.tie_tolerance);
    if (spec == "majority") return majority_rule(panel.n);
    if (spec == "coinflip") return coin_flip_rule(panel.n);
    if (spec == "interval-minimax") {
      if (!panel.model.is_interval()) throw io::ConfigError("rule interval-minimax needs an interval model");
      return interval_minimax_rule(panel.model.as_interval().epsilon, panel.tie_tolerance);
    }
    if (!std::filesystem::exists(spec))
      throw io::ConfigError("unknown rule '" + spec +
                            "' (expected bayes, majority, coinflip, interval-minimax or a rule table file)");
    return io::load_rule_table(spec);
  }();
  if (rule.n() != panel.n)
    throw io::ConfigError("rule has panel size " + std::to_string(rule.n()) + ", config has n=" + std::to_string(panel.n));
  return rule;
}

int coin_bit(std::uint64_t seed, std::uint64_t row) {
  std::mt19937_64 engine(seed);
  engine.discard(row);
  return static_cast<int>(engine() >> 63);
}

int run_aggregate(const AggregateArgs& args, std::ostream& err) {
  return guarded(err, [&] {
    const io::Config config = load(args.common);
    const auto& panel = config.panel;
    const auto votes = io::load_votes(args.votes_path, panel.n);

    // interval models decide with the minimax rule, the c = 1/2 Bayes rule at
    // gamma = 1/2 + epsilon, and report the posterior at that point
    const bool interval = panel.model.is_interval();
    const ThetaPrior<double> prior = interval ? ThetaPrior<double>(0.5) : panel.prior;
    const AccuracyModel<double> model =
        interval ? AccuracyModel<double>::known(evaluation_accuracies(config)) : panel.model;
    if (!args.table_path.empty() && panel.n > kMaxTablePanel)
      throw io::ConfigError("--table needs n <= " + std::to_string(kMaxTablePanel) + " (2^n lines)");

    auto out = open_output(args.common.out_path);
    out << "item_id,decision,posterior,tied,coin_outcome\n";
    std::mt19937_64 coins(panel.seed);
    for (std::size_t row = 0; row < votes.votes.size(); ++row) {
      const auto& y = votes.votes[row];
      // one draw per row keeps the stream position equal to the row index
      const int coin = static_cast<int>(coins() >> 63);
      double post = 0.0;
      try {
        post = posterior(prior, model, y);
      } catch (const ZeroProbabilityObservation& e) {
        throw io::DataError("row " + std::to_string(row + 2) + " (" + votes.item_ids[row] + "): " + e.what());
      }
      const Action a = bayes_action(prior, model, y, panel.tie_tolerance);
      const bool tied = a == Action::Coin;
      const int decision = tied ? coin : (a == Action::One ? 1 : 0);
      out << votes.item_ids[row] << ',' << decision << ',' << io::format_double(post) << ','
          << (tied ? "true" : "false") << ',';
      if (tied) out << coin;
      out << '\n';
    }
    finish(out, args.common.out_path);

    if (!args.table_path.empty()) {
      auto table = open_output(args.table_path);
      io::write_decision_table(table, bayes_rule(prior, model, panel.tie_tolerance));
      finish(table, args.table_path);
    }
    return int{kOk};
  });
}

int run_risk(const RiskArgs& args, std::ostream& err) {
  return guarded(err, [&] {
    const io::Config config = load(args.common);
    const auto& panel = config.panel;
    const DecisionRule rule = resolve_rule(config, args.rule);
    const VectorX<double> gammas = evaluation_accuracies(config);

    std::optional<double> bayes;
    if (!panel.model.is_interval()) bayes = bayes_risk(rule, panel.prior, panel.model);
    const auto report = risk_report(rule, gammas, bayes);

    ordered_json doc;
    doc["n"] = panel.n;
    doc["gamma"] = vector_json(gammas);
    doc["risk0"] = report.risk0;
    doc["risk1"] = report.risk1;
    doc["sup_risk"] = report.sup_risk;
    doc["bayes_risk"] = report.bayes_risk ? ordered_json(*report.bayes_risk) : ordered_json(nullptr);
    if (auto box = configured_box(config)) {
      const auto sup = sup_risk_box(rule, *box);
      doc["box_sup_risk"] = {{"value", sup.value}, {"theta", sup.theta}, {"gamma", vector_json(sup.gamma)}};
    }
    doc["table"] = table_json(rule);

    auto out = open_output(args.common.out_path);
    out << doc.dump(2) << '\n';
    finish(out, args.common.out_path);

    if (!args.table_path.empty()) {
      auto table = open_output(args.table_path);
      io::write_rule_table(table, rule);
      finish(table, args.table_path);
    }
    return int{kOk};
  });
}

int run_minimax(const MinimaxArgs& args, std::ostream& err) {
  return guarded(err, [&] {
    const io::Config config = load(args.common);
    const auto& panel = config.panel;
    auto box = configured_box(config);
    if (!box) {
      if (!panel.model.is_known())
        throw io::ConfigError("minimax needs an interval model, explicit box bounds, or a known-accuracy model");
      box = ParameterBox<double>::point(panel.model.as_known().gamma);
    }

    SearchOptions<double> options;
    options.max_n = config.max_n;
    const auto search = brute_force_minimax(*box, options);
    const auto sandwich = minimax_sandwich(*box, panel.tie_tolerance, options);

    ordered_json doc;
    doc["n"] = panel.n;
    doc["box"] = {{"theta", box->theta_values()}, {"gamma_lo", vector_json(box->lo())}, {"gamma_hi", vector_json(box->hi())}};
    doc["value"] = search.optimum;
    doc["enumerated"] = search.enumerated;
    ordered_json witnesses = ordered_json::array();
    for (auto index : search.witnesses) {
      const DecisionRule w = rule_from_index(index, panel.n);
      witnesses.push_back({{"index", index}, {"table", table_json(w)}});
    }
    doc["witness_count"] = search.witnesses.size();
    doc["witnesses"] = std::move(witnesses);
    doc["candidate"] = table_json(sandwich.candidate);
    doc["reduction_point"] = vector_json(sandwich.reduction_point);
    doc["upper_bound"] = sandwich.upper;
    doc["lower_bound"] = sandwich.lower;
    doc["sandwich_closes"] = sandwich.closes;

    auto out = open_output(args.common.out_path);
    out << doc.dump(2) << '\n';
    finish(out, args.common.out_path);
    return int{kOk};
  });
}

int run_lfp(const LfpArgs& args, std::ostream& out_summary, std::ostream& err) {
  return guarded(err, [&] {
    const io::Config config = load(args.common);
    const auto& panel = config.panel;
    if (!panel.model.is_known()) throw io::ConfigError("lfp needs a known-accuracy model");
    const auto scan = least_favorable_scan(panel.model.as_known().gamma, prior_grid(config.lfp_grid_step),
                                           panel.tie_tolerance);

    auto out = open_output(args.common.out_path);
    out << "c,bayes_risk,peak,argmax\n";
    std::size_t next_peak = 0;
    for (std::size_t i = 0; i < scan.grid.size(); ++i) {
      const bool peak = next_peak < scan.peak.size() && scan.peak[next_peak] == i;
      if (peak) ++next_peak;
      out << io::format_double(scan.grid[i]) << ',' << io::format_double(scan.bayes_risk[i]) << ',' << (peak ? 1 : 0)
          << ',' << (scan.grid[i] == scan.c_star ? 1 : 0) << '\n';
    }
    finish(out, args.common.out_path);

    ordered_json summary;
    summary["c_star"] = scan.c_star;
    summary["max_bayes_risk"] = scan.max_bayes_risk;
    summary["flat_peak"] = scan.flat_peak();
    summary["peak_count"] = scan.peak.size();
    out_summary << summary.dump() << '\n';
    return int{kOk};
  });
}

int run_simulate(const SimulateArgs& args, std::ostream& err) {
  return guarded(err, [&] {
    const io::Config config = load(args.common);
    if (args.trials < 1) throw io::ConfigError("--trials must be at least 1");
    const std::string spec =
        args.rule == "bayes" && config.panel.model.is_interval() ? std::string("interval-minimax") : args.rule;
    const DecisionRule rule = resolve_rule(config, spec);
    const VectorX<double> gammas = evaluation_accuracies(config);

    auto out = open_output(args.common.out_path);
    out << "theta,trials,estimate,std_error,exact,z\n";
    for (int theta : {0, 1}) {
      // distinct streams per state, both fixed by the seed
      const std::uint64_t seed = config.panel.seed * 2 + static_cast<std::uint64_t>(theta);
      const auto mc = monte_carlo_risk(rule, theta, gammas, args.trials, seed);
      const double exact = risk_exact(rule, theta, gammas);
      double z = 0.0;
      if (mc.std_error > 0.0) z = (mc.estimate - exact) / mc.std_error;
      else if (mc.estimate != exact) z = mc.estimate > exact ? INFINITY : -INFINITY;
      out << theta << ',' << args.trials << ',' << io::format_double(mc.estimate) << ','
          << io::format_double(mc.std_error) << ',' << io::format_double(exact) << ',' << io::format_double(z) << '\n';
    }
    finish(out, args.common.out_path);
    return int{kOk};
  });
}

}  // namespace crowdvote::cli
