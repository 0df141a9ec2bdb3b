#include "crowdvote/io.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace crowdvote::io {

namespace {

using nlohmann::json;

const std::set<std::string> kConfigKeys = {"n", "model", "c", "tie_tolerance", "seed", "lfp_grid_step", "max_n", "box"};

void require_known_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown field '" + key + "' in " + where);
  }
}

const json& require_field(const json& obj, const std::string& key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError("missing field '" + key + "' in " + where);
  return *it;
}

double number_field(const json& obj, const std::string& key, double fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number()) throw ConfigError("field '" + key + "' must be a number");
  return it->get<double>();
}

VectorX<double> vector_field(const json& obj, const std::string& key, const std::string& where) {
  const json& arr = require_field(obj, key, where);
  if (!arr.is_array() || arr.empty()) throw ConfigError("field '" + key + "' in " + where + " must be a nonempty array");
  VectorX<double> v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number())
      throw ConfigError("entry " + std::to_string(i + 1) + " of '" + key + "' in " + where + " is not a number");
    v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  }
  return v;
}

AccuracyModel<double> parse_model(const json& m) {
  if (!m.is_object()) throw ConfigError("field 'model' must be an object");
  const json& type = require_field(m, "type", "model");
  if (!type.is_string()) throw ConfigError("model.type must be a string");
  const auto kind = type.get<std::string>();
  if (kind == "known") {
    require_known_keys(m, {"type", "gamma"}, "model");
    return AccuracyModel<double>::known(vector_field(m, "gamma", "model"));
  }
  if (kind == "beta") {
    require_known_keys(m, {"type", "alpha", "beta"}, "model");
    return AccuracyModel<double>::beta(vector_field(m, "alpha", "model"), vector_field(m, "beta", "model"));
  }
  if (kind == "interval") {
    require_known_keys(m, {"type", "epsilon"}, "model");
    return AccuracyModel<double>::interval(vector_field(m, "epsilon", "model"));
  }
  throw ConfigError("model.type must be one of known, beta, interval (got '" + kind + "')");
}

ParameterBox<double> parse_box(const json& b) {
  if (!b.is_object()) throw ConfigError("field 'box' must be an object");
  require_known_keys(b, {"theta", "gamma_lo", "gamma_hi"}, "box");
  std::vector<int> thetas = {0, 1};
  if (auto it = b.find("theta"); it != b.end()) {
    if (!it->is_array()) throw ConfigError("box.theta must be an array");
    thetas.clear();
    for (const auto& t : *it) {
      if (!t.is_number_integer()) throw ConfigError("box.theta entries must be 0 or 1");
      thetas.push_back(t.get<int>());
    }
  }
  return ParameterBox<double>(thetas, vector_field(b, "gamma_lo", "box"), vector_field(b, "gamma_hi", "box"));
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::ifstream open_input(const std::string& path, bool config) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    const std::string msg = "cannot open '" + path + "'";
    if (config) throw ConfigError(msg);
    throw DataError(msg);
  }
  return in;
}

}  // namespace

Config parse_config(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  require_known_keys(doc, kConfigKeys, "config");

  try {
    const json& n_field = require_field(doc, "n", "config");
    if (!n_field.is_number_integer()) throw ConfigError("field 'n' must be an integer");
    const int n = n_field.get<int>();
    if (n < 1) throw ConfigError("field 'n' must be at least 1");

    auto model = parse_model(require_field(doc, "model", "config"));
    const ThetaPrior<double> prior(number_field(doc, "c", 0.5));
    const double tolerance = number_field(doc, "tie_tolerance", 1e-9);

    std::uint64_t seed = 0;
    if (auto it = doc.find("seed"); it != doc.end()) {
      if (!it->is_number_unsigned()) throw ConfigError("field 'seed' must be a nonnegative integer");
      seed = it->get<std::uint64_t>();
    }

    Config config{PanelConfig<double>(n, std::move(model), prior, tolerance, seed), 0.01, 3, std::nullopt};
    config.lfp_grid_step = number_field(doc, "lfp_grid_step", 0.01);
    if (!(config.lfp_grid_step > 0.0 && config.lfp_grid_step < 1.0))
      throw ConfigError("field 'lfp_grid_step' must lie in (0,1)");
    if (auto it = doc.find("max_n"); it != doc.end()) {
      if (!it->is_number_integer() || it->get<int>() < 1) throw ConfigError("field 'max_n' must be a positive integer");
      config.max_n = it->get<int>();
    }
    if (auto it = doc.find("box"); it != doc.end()) {
      config.box = parse_box(*it);
      if (config.box->n() != n) throw ConfigError("box bounds do not have length n=" + std::to_string(n));
    }
    return config;
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
}

Config load_config(const std::string& path) {
  auto in = open_input(path, true);
  try {
    return parse_config(in);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

VoteMatrix parse_votes(std::istream& in, int expected_n) {
  VoteMatrix m;
  std::string line;
  if (!std::getline(in, line)) throw DataError("vote file is empty");
  const auto header = split_commas(strip_cr(line));
  if (header.empty() || header[0] != "item_id") throw DataError("row 1, column 1: header must start with 'item_id'");
  if (static_cast<int>(header.size()) - 1 != expected_n)
    throw DataError("row 1: header lists " + std::to_string(header.size() - 1) + " experts, config has n=" +
                    std::to_string(expected_n));
  m.experts.assign(header.begin() + 1, header.end());

  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != header.size())
      throw DataError("row " + std::to_string(row) + ": expected " + std::to_string(header.size()) + " columns, found " +
                      std::to_string(cells.size()));
    if (cells[0].empty()) throw DataError("row " + std::to_string(row) + ", column 1: empty item_id");
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(expected_n));
    for (std::size_t col = 1; col < cells.size(); ++col) {
      if (cells[col] != "0" && cells[col] != "1")
        throw DataError("row " + std::to_string(row) + ", column " + std::to_string(col + 1) + " (" + header[col] +
                        "): vote must be 0 or 1, found '" + cells[col] + "'");
      bits[col - 1] = cells[col] == "1" ? 1 : 0;
    }
    m.item_ids.push_back(cells[0]);
    m.votes.emplace_back(std::move(bits));
  }
  return m;
}

VoteMatrix load_votes(const std::string& path, int expected_n) {
  auto in = open_input(path, false);
  try {
    return parse_votes(in, expected_n);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

std::string pattern_bits(std::uint64_t index, int n) {
  std::string bits(static_cast<std::size_t>(n), '0');
  for (int i = 0; i < n; ++i)
    if (vote_of(index, i)) bits[static_cast<std::size_t>(i)] = '1';
  return bits;
}

void write_rule_table(std::ostream& out, const DecisionRule& rule) {
  for (std::uint64_t p = 0; p < rule.num_patterns(); ++p)
    out << pattern_bits(p, rule.n()) << ',' << to_string(rule[p]) << '\n';
}

void write_decision_table(std::ostream& out, const DecisionRule& rule) {
  for (std::uint64_t p = 0; p < rule.num_patterns(); ++p) {
    out << pattern_bits(p, rule.n()) << ',';
    switch (rule[p]) {
      case Action::Zero: out << "0"; break;
      case Action::One: out << "1"; break;
      case Action::Coin: out << "0/1"; break;
    }
    out << '\n';
  }
}

DecisionRule parse_rule_table(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (!line.empty()) lines.push_back(line);
  }
  if (lines.empty()) throw ConfigError("rule table is empty");
  const auto first = split_commas(lines[0]);
  const int n = static_cast<int>(first[0].size());
  if (n < 1 || n > kMaxPanelSize) throw ConfigError("rule table line 1: invalid pattern '" + first[0] + "'");
  if (lines.size() != pattern_count(n))
    throw ConfigError("rule table has " + std::to_string(lines.size()) + " lines, expected 2^" + std::to_string(n));

  std::vector<Action> table(lines.size());
  for (std::size_t p = 0; p < lines.size(); ++p) {
    const auto cells = split_commas(lines[p]);
    const std::string where = "rule table line " + std::to_string(p + 1);
    if (cells.size() != 2) throw ConfigError(where + ": expected 'pattern_bits,action'");
    if (cells[0] != pattern_bits(p, n))
      throw ConfigError(where + ": expected pattern " + pattern_bits(p, n) + ", found '" + cells[0] + "'");
    if (cells[1] == "0") table[p] = Action::Zero;
    else if (cells[1] == "1") table[p] = Action::One;
    else if (cells[1] == "coin") table[p] = Action::Coin;
    else throw ConfigError(where + ": action must be 0, 1 or coin, found '" + cells[1] + "'");
  }
  return DecisionRule(n, std::move(table));
}

DecisionRule load_rule_table(const std::string& path) {
  auto in = open_input(path, true);
  try {
    return parse_rule_table(in);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) return std::to_string(v);
  return std::string(buf, ptr);
}

}  // namespace crowdvote::io
