#include "crowdvote/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

void add_common(CLI::App* sub, crowdvote::cli::CommonArgs& common) {
  sub->add_option("--config", common.config_path, "Panel config (JSON)")->required();
  sub->add_option("--out", common.out_path, "Output file")->required();
  sub->add_option("--seed", common.seed, "Override the config seed");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace crowdvote::cli;

  CLI::App app{"crowdvote: Bayes and minimax aggregation of binary expert votes"};
  app.require_subcommand(1);

  AggregateArgs aggregate;
  auto* agg = app.add_subcommand("aggregate", "Decide each item of a vote matrix");
  add_common(agg, aggregate.common);
  agg->add_option("--votes", aggregate.votes_path, "Vote CSV (item_id,<experts...>)")->required();
  agg->add_option("--table", aggregate.table_path, "Also write the rule table with ties as 0/1");

  RiskArgs risk;
  auto* rsk = app.add_subcommand("risk", "Exact conditional and Bayes risk of a rule");
  add_common(rsk, risk.common);
  rsk->add_option("--rule", risk.rule, "bayes | majority | coinflip | interval-minimax | <rule table file>");
  rsk->add_option("--table", risk.table_path, "Also write the rule table file");

  MinimaxArgs minimax;
  auto* mmx = app.add_subcommand("minimax", "Exhaustive minimax search with upper/lower bound check");
  add_common(mmx, minimax.common);

  LfpArgs lfp;
  auto* lf = app.add_subcommand("lfp", "Bayes risk of the Bayes rule across priors c");
  add_common(lf, lfp.common);

  SimulateArgs simulate;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo check of the exact risk");
  add_common(sim, simulate.common);
  sim->add_option("--rule", simulate.rule, "bayes | majority | coinflip | interval-minimax | <rule table file>");
  sim->add_option("--trials", simulate.trials, "Number of simulated items per state")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  if (agg->parsed()) return run_aggregate(aggregate, std::cerr);
  if (rsk->parsed()) return run_risk(risk, std::cerr);
  if (mmx->parsed()) return run_minimax(minimax, std::cerr);
  if (lf->parsed()) return run_lfp(lfp, std::cout, std::cerr);
  if (sim->parsed()) return run_simulate(simulate, std::cerr);
  return kUsage;
}
