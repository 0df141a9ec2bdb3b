#include "crowdvote/commands.hpp"
#include "crowdvote/crowdvote.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

using namespace crowdvote;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kData = CROWDVOTE_TEST_DATA;

// Fresh scratch directory per test case.
struct Scratch {
  fs::path dir;
  Scratch() {
    static int counter = 0;
    dir = fs::temp_directory_path() / ("crowdvote_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string path(const std::string& name) const { return (dir / name).string(); }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(dir / name, std::ios::binary) << text;
    return path(name);
  }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::string data(const std::string& name) { return (kData / name).string(); }

cli::CommonArgs common(const std::string& config, const std::string& out) { return {config, out, std::nullopt}; }

}  // namespace

TEST_CASE("aggregate reproduces the three Beta-prior tables") {
  Scratch s;
  std::ostringstream err;
  for (int prior : {1, 2, 3}) {
    const std::string tag = "beta_prior" + std::to_string(prior);
    cli::AggregateArgs args{common(data(tag + ".json"), s.path("out.csv")), data("all_patterns.csv"), s.path("t.csv")};
    REQUIRE(cli::run_aggregate(args, err) == cli::kOk);
    CHECK(slurp(s.path("t.csv")) == slurp(data(tag + ".expected")));
  }
}

TEST_CASE("aggregate rows: ties, decisions, determinism") {
  Scratch s;
  std::ostringstream err;

  cli::AggregateArgs p3{common(data("beta_prior3.json"), s.path("p3.csv")), data("all_patterns.csv"), ""};
  REQUIRE(cli::run_aggregate(p3, err) == cli::kOk);
  auto rows = lines_of(s.path("p3.csv"));
  REQUIRE(rows.size() == 9);
  CHECK(rows[0] == "item_id,decision,posterior,tied,coin_outcome");
  CHECK(rows[6].rfind("y101,0,", 0) == 0);
  CHECK(rows[6].find(",false,") != std::string::npos);

  cli::AggregateArgs p2{common(data("beta_prior2.json"), s.path("a.csv")), data("all_patterns.csv"), ""};
  REQUIRE(cli::run_aggregate(p2, err) == cli::kOk);
  rows = lines_of(s.path("a.csv"));
  // y100 is data row 1: tied, resolved by the seeded coin for that row
  const int coin = cli::coin_bit(2024, 1);
  CHECK(rows[2] == "y100," + std::to_string(coin) + ",0.5,true," + std::to_string(coin));

  p2.common.out_path = s.path("b.csv");
  REQUIRE(cli::run_aggregate(p2, err) == cli::kOk);
  CHECK(slurp(s.path("a.csv")) == slurp(s.path("b.csv")));

  // seed override changes only the coin stream
  p2.common.out_path = s.path("c.csv");
  p2.common.seed = 99;
  REQUIRE(cli::run_aggregate(p2, err) == cli::kOk);
  CHECK(lines_of(s.path("c.csv"))[2] == "y100," + std::to_string(cli::coin_bit(99, 1)) + ",0.5,true," +
                                            std::to_string(cli::coin_bit(99, 1)));
}

TEST_CASE("aggregate with certain experts") {
  Scratch s;
  std::ostringstream err;
  const auto votes = s.write("v.csv", "item_id,a,b,c\nx,1,1,1\n");
  cli::AggregateArgs args{common(data("known_certain.json"), s.path("o.csv")), votes, ""};
  REQUIRE(cli::run_aggregate(args, err) == cli::kOk);
  CHECK(lines_of(s.path("o.csv"))[1] == "x,1,1,false,");

  // a split vote cannot happen when every expert is always right
  const auto split = s.write("w.csv", "item_id,a,b,c\nx,1,1,1\nz,1,0,1\n");
  args.votes_path = split;
  CHECK(cli::run_aggregate(args, err) == cli::kDataError);
  CHECK(err.str().find("row 3") != std::string::npos);
}

TEST_CASE("data errors name the row and column") {
  Scratch s;
  std::ostringstream err;
  const auto votes = s.write("v.csv", "item_id,a,b,c\nx,1,0,1\ny,1,2,0\n");
  cli::AggregateArgs args{common(data("known_majority.json"), s.path("o.csv")), votes, ""};
  CHECK(cli::run_aggregate(args, err) == cli::kDataError);
  CHECK(err.str().find("row 3") != std::string::npos);
  CHECK(err.str().find("column 3") != std::string::npos);

  err.str("");
  args.votes_path = s.write("short.csv", "item_id,a,b,c\nx,1,0\n");
  CHECK(cli::run_aggregate(args, err) == cli::kDataError);

  err.str("");
  args.votes_path = s.path("missing.csv");
  CHECK(cli::run_aggregate(args, err) == cli::kDataError);
}

TEST_CASE("config errors exit with 2") {
  Scratch s;
  std::ostringstream err;
  const std::vector<std::string> bad = {
      "{",
      R"({"n": 3, "model": {"type": "known", "gamma": [0.8, 0.8]}})",
      R"({"n": 3, "model": {"type": "known", "gamma": [0.8, 0.8, 1.2]}})",
      R"({"n": 3, "model": {"type": "beta", "alpha": [1, 1, 0], "beta": [1, 1, 1]}})",
      R"({"n": 3, "model": {"type": "interval", "epsilon": [0.1, 0.5, 0.1]}})",
      R"({"n": 3, "model": {"type": "known", "gamma": [0.8, 0.8, 0.8]}, "c": 1.5})",
      R"({"n": 3, "model": {"type": "known", "gamma": [0.8, 0.8, 0.8]}, "colour": 1})",
      R"({"n": 3, "model": {"type": "known", "gamma": [0.8, 0.8, 0.8]}, "seed": -4})",
      R"({"n": 3, "model": {"type": "psychic"}})",
  };
  for (std::size_t i = 0; i < bad.size(); ++i) {
    CAPTURE(bad[i]);
    const auto cfg = s.write("c" + std::to_string(i) + ".json", bad[i]);
    cli::RiskArgs args{common(cfg, s.path("o.json")), "bayes", ""};
    CHECK(cli::run_risk(args, err) == cli::kConfigError);
  }
  cli::RiskArgs missing{common(s.path("nope.json"), s.path("o.json")), "bayes", ""};
  CHECK(cli::run_risk(missing, err) == cli::kConfigError);
}

TEST_CASE("majority on an even panel is a config error") {
  Scratch s;
  std::ostringstream err;
  const auto cfg = s.write("even.json", R"({"n": 2, "model": {"type": "known", "gamma": [0.8, 0.7]}})");
  cli::RiskArgs args{common(cfg, s.path("o.json")), "majority", ""};
  CHECK(cli::run_risk(args, err) == cli::kConfigError);
  CHECK(err.str().find("even panel") != std::string::npos);
}

TEST_CASE("minimax beyond the enumeration limit is infeasible") {
  Scratch s;
  std::ostringstream err;
  cli::MinimaxArgs args{common(data("full_box_n5.json"), s.path("o.json"))};
  CHECK(cli::run_minimax(args, err) == cli::kInfeasible);
  CHECK_FALSE(fs::exists(s.path("o.json")));
}

TEST_CASE("risk: Bayes and majority coincide at gamma 0.8") {
  Scratch s;
  std::ostringstream err;
  cli::RiskArgs bayes{common(data("known_majority.json"), s.path("bayes.json")), "bayes", s.path("bayes.rule")};
  cli::RiskArgs major{common(data("known_majority.json"), s.path("major.json")), "majority", s.path("major.rule")};
  REQUIRE(cli::run_risk(bayes, err) == cli::kOk);
  REQUIRE(cli::run_risk(major, err) == cli::kOk);
  CHECK(slurp(s.path("bayes.json")) == slurp(s.path("major.json")));
  CHECK(slurp(s.path("bayes.rule")) == slurp(s.path("major.rule")));

  const auto doc = json::parse(slurp(s.path("bayes.json")));
  CHECK(doc["risk0"].get<double>() == doctest::Approx(0.104).epsilon(1e-12));
  CHECK(doc["risk1"].get<double>() == doctest::Approx(0.104).epsilon(1e-12));
  CHECK(doc["bayes_risk"].get<double>() == doctest::Approx(0.104).epsilon(1e-12));

  cli::RiskArgs coin{common(data("known_majority.json"), s.path("coin.json")), "coinflip", ""};
  REQUIRE(cli::run_risk(coin, err) == cli::kOk);
  const auto c = json::parse(slurp(s.path("coin.json")));
  CHECK(c["risk0"].get<double>() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(c["risk1"].get<double>() == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("rule tables round-trip through --rule") {
  Scratch s;
  std::ostringstream err;
  cli::RiskArgs first{common(data("beta_prior2.json"), s.path("a.json")), "bayes", s.path("p2.rule")};
  REQUIRE(cli::run_risk(first, err) == cli::kOk);

  const auto config = io::load_config(data("beta_prior2.json"));
  const DecisionRule direct = cli::resolve_rule(config, "bayes");
  CHECK(cli::resolve_rule(config, s.path("p2.rule")) == direct);

  cli::RiskArgs second{common(data("beta_prior2.json"), s.path("b.json")), s.path("p2.rule"), s.path("again.rule")};
  REQUIRE(cli::run_risk(second, err) == cli::kOk);
  CHECK(slurp(s.path("a.json")) == slurp(s.path("b.json")));
  CHECK(slurp(s.path("p2.rule")) == slurp(s.path("again.rule")));

  // a table for the wrong panel size is refused
  const auto small = s.write("small.rule", "0,0\n1,1\n");
  CHECK(cli::run_risk({common(data("beta_prior2.json"), s.path("c.json")), small, ""}, err) == cli::kConfigError);
  CHECK(cli::run_risk({common(data("beta_prior2.json"), s.path("c.json")), "nonsense", ""}, err) == cli::kConfigError);
}

TEST_CASE("minimax reports") {
  Scratch s;
  std::ostringstream err;

  cli::MinimaxArgs interval{common(data("interval_eps01.json"), s.path("i.json"))};
  REQUIRE(cli::run_minimax(interval, err) == cli::kOk);
  auto doc = json::parse(slurp(s.path("i.json")));
  CHECK(doc["value"].get<double>() == doctest::Approx(0.352).epsilon(1e-12));
  const auto majority = rule_index(majority_rule(3));
  bool found = false;
  for (const auto& w : doc["witnesses"]) found = found || w["index"].get<std::uint64_t>() == majority;
  CHECK(found);
  CHECK(doc["sandwich_closes"].get<bool>());
  CHECK(doc["enumerated"].get<std::uint64_t>() == 6561);

  cli::MinimaxArgs full{common(data("full_box.json"), s.path("f.json"))};
  REQUIRE(cli::run_minimax(full, err) == cli::kOk);
  doc = json::parse(slurp(s.path("f.json")));
  CHECK(doc["value"].get<double>() == doctest::Approx(0.5).epsilon(1e-12));
  REQUIRE(doc["witness_count"].get<int>() == 1);
  CHECK(doc["witnesses"][0]["index"].get<std::uint64_t>() == rule_index(coin_flip_rule(3)));
  CHECK(doc["sandwich_closes"].get<bool>());

  // a Beta model carries no box to be minimax over
  CHECK(cli::run_minimax({common(data("beta_prior1.json"), s.path("b.json"))}, err) == cli::kConfigError);
}

TEST_CASE("lfp peaks at one half") {
  Scratch s;
  std::ostringstream out, err;
  REQUIRE(cli::run_lfp({common(data("known_majority.json"), s.path("lfp.csv"))}, out, err) == cli::kOk);
  const auto summary = json::parse(out.str());
  CHECK(summary["c_star"].get<double>() == 0.5);
  CHECK(summary["max_bayes_risk"].get<double>() == doctest::Approx(0.104).epsilon(1e-12));

  const auto rows = lines_of(s.path("lfp.csv"));
  REQUIRE(rows.size() == 100);
  CHECK(rows[0] == "c,bayes_risk,peak,argmax");
  int argmax = 0;
  for (const auto& r : rows)
    if (r.size() > 2 && r.substr(r.size() - 2) == ",1") {
      ++argmax;
      CHECK(r.rfind("0.5,", 0) == 0);
    }
  CHECK(argmax == 1);

  CHECK(cli::run_lfp({common(data("beta_prior1.json"), s.path("x.csv"))}, out, err) == cli::kConfigError);
}

TEST_CASE("simulate agrees with the exact risk") {
  Scratch s;
  std::ostringstream err;
  cli::SimulateArgs args{common(data("known_majority.json"), s.path("mc.csv")), "majority", 20000};
  REQUIRE(cli::run_simulate(args, err) == cli::kOk);
  const auto rows = lines_of(s.path("mc.csv"));
  REQUIRE(rows.size() == 3);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double z = std::stod(rows[i].substr(rows[i].rfind(',') + 1));
    CHECK(std::abs(z) <= 4.0);
  }
  args.common.out_path = s.path("again.csv");
  REQUIRE(cli::run_simulate(args, err) == cli::kOk);
  CHECK(slurp(s.path("mc.csv")) == slurp(s.path("again.csv")));

  args.trials = 0;
  CHECK(cli::run_simulate(args, err) == cli::kConfigError);
}
