#pragma once

// Flat key=value run configuration. Blank lines and lines starting with '#'
// are ignored; unknown keys are rejected.
//
// Distribution values accept a number, normal(mean,sd[,lo,hi]) or
// uniform(lo,hi).

#include <cmath>
#include <fstream>
#include <algorithm>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "obslearn/classify.hpp"
#include "obslearn/error.hpp"
#include "obslearn/estimate/kernel.hpp"
#include "obslearn/estimate/structural.hpp"
#include "obslearn/sim.hpp"

namespace obslearn {

struct RunConfig {
  SimConfig sim;
  std::string out_dir = "out";
  /// Analyze this panel instead of simulating one.
  std::optional<std::string> panel_path;
  double bandwidth = kDefaultBandwidth;
  PosteriorSource posterior_source = PosteriorSource::Reported;
  bool winsorize = false;
  bool include_bot_nls = false;
  double nls_upper = 20.0;
  ClassifyOptions classify;
  int verbosity = 0;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_number(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size() && std::isfinite(d)) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError(key + ": not a number: '" + v + "'");
}

inline long parse_integer(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long i = std::stol(v, &used);
    if (used == v.size()) return i;
  } catch (const std::exception&) {
  }
  throw ConfigError(key + ": not an integer: '" + v + "'");
}

inline std::uint64_t parse_seed(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const auto s = std::stoull(v, &used);
    if (used == v.size() && v[0] != '-') return s;
  } catch (const std::exception&) {
  }
  throw ConfigError(key + ": not a non-negative integer: '" + v + "'");
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

}  // namespace detail

inline ParamDist parse_distribution(const std::string& key, const std::string& text) {
  const std::string v = detail::trim(text);
  const auto open = v.find('(');
  if (open == std::string::npos) return ParamDist::point(detail::parse_number(key, v));
  if (v.back() != ')') throw ConfigError(key + ": unterminated distribution '" + v + "'");
  const std::string name = v.substr(0, open);
  std::vector<double> args;
  std::stringstream inner(v.substr(open + 1, v.size() - open - 2));
  std::string tok;
  while (std::getline(inner, tok, ',')) args.push_back(detail::parse_number(key, detail::trim(tok)));
  ParamDist d;
  if (name == "normal" && (args.size() == 2 || args.size() == 4)) {
    d = args.size() == 2 ? ParamDist::normal(args[0], args[1])
                         : ParamDist::normal(args[0], args[1], args[2], args[3]);
  } else if (name == "uniform" && args.size() == 2) {
    d = ParamDist::uniform(args[0], args[1]);
  } else {
    throw ConfigError(key + ": expected normal(m,sd[,lo,hi]) or uniform(lo,hi), got '" + v + "'");
  }
  d.validate(key);
  return d;
}

inline PosteriorSource parse_posterior_source(const std::string& key, const std::string& v) {
  if (v == "reported") return PosteriorSource::Reported;
  if (v == "bayes") return PosteriorSource::Bayesian;
  throw ConfigError(key + ": expected reported or bayes, got '" + v + "'");
}

inline AgentKind parse_agent_kind(const std::string& key, const std::string& v) {
  if (v == "structural") return AgentKind::Structural;
  if (v == "rational") return AgentKind::ExactBayesianRational;
  throw ConfigError(key + ": expected structural or rational, got '" + v + "'");
}

namespace detail {

using Setter = void (*)(RunConfig&, const std::string& key, const std::string& value);

inline void set_arm(RunConfig& rc, Treatment t, const std::string& key, const std::string& value) {
  const long n = parse_integer(key, value);
  if (n < 0) throw ConfigError(key + ": must be non-negative");
  auto& arms = rc.sim.arms;
  auto it = std::find_if(arms.begin(), arms.end(), [t](const auto& a) { return a.treatment == t; });
  if (n == 0) {
    if (it != arms.end()) arms.erase(it);
  } else if (it != arms.end()) {
    it->n_subjects = int(n);
  } else {
    arms.push_back({t, int(n)});
  }
}

inline PopulationSpec& pool_spec(RunConfig& rc) {
  if (!rc.sim.pool_population) rc.sim.pool_population = rc.sim.population;
  return *rc.sim.pool_population;
}

#define OBSLEARN_KEY(name, body) \
  {name, [](RunConfig& rc, const std::string& key, const std::string& v) { (void)key; body; }}

inline const std::map<std::string, Setter>& config_setters() {
  static const std::map<std::string, Setter> setters = {
      OBSLEARN_KEY("seed", rc.sim.master_seed = parse_seed(key, v)),
      OBSLEARN_KEY("threads", rc.sim.threads = unsigned(std::max(0L, parse_integer(key, v)))),
      OBSLEARN_KEY("rounds_per_condition", rc.sim.rounds_per_condition = int(parse_integer(key, v))),
      OBSLEARN_KEY("pool_size", rc.sim.pool_size = int(parse_integer(key, v))),
      OBSLEARN_KEY("neighbor_with_replacement", rc.sim.neighbor_with_replacement = parse_bool(key, v)),
      OBSLEARN_KEY("order_randomization", rc.sim.order_randomization = parse_bool(key, v)),
      OBSLEARN_KEY("fixed_order", {
        const auto o = parse_condition_order(v);
        if (!o) throw ConfigError(key + ": expected IND_FIRST or SOC_FIRST");
        rc.sim.fixed_order = *o;
      }),
      OBSLEARN_KEY("stake", rc.sim.stake.dollars = parse_number(key, v)),
      OBSLEARN_KEY("n_base", set_arm(rc, Treatment::Base, key, v)),
      OBSLEARN_KEY("n_demo", set_arm(rc, Treatment::Demographics, key, v)),
      OBSLEARN_KEY("n_bot", set_arm(rc, Treatment::Bot, key, v)),
      OBSLEARN_KEY("n_ball", set_arm(rc, Treatment::Ball, key, v)),
      OBSLEARN_KEY("agent_kind", rc.sim.population.kind = parse_agent_kind(key, v)),
      OBSLEARN_KEY("c", rc.sim.population.c = parse_distribution(key, v)),
      OBSLEARN_KEY("beta", rc.sim.population.beta = parse_distribution(key, v)),
      OBSLEARN_KEY("beta_tilde", rc.sim.population.beta_tilde = parse_distribution(key, v)),
      OBSLEARN_KEY("c_tilde", rc.sim.population.c_tilde = parse_distribution(key, v)),
      OBSLEARN_KEY("report_noise_sd", rc.sim.population.report_noise_sd = parse_distribution(key, v)),
      OBSLEARN_KEY("beta_tilde_bot", rc.sim.population.beta_tilde_bot = parse_number(key, v)),
      OBSLEARN_KEY("probstat_beta_boost", rc.sim.population.probstat_beta_boost = parse_number(key, v)),
      OBSLEARN_KEY("neighbor_probstat_beta_tilde_boost",
                   rc.sim.population.neighbor_probstat_beta_tilde_boost = parse_number(key, v)),
      OBSLEARN_KEY("pool_agent_kind", pool_spec(rc).kind = parse_agent_kind(key, v)),
      OBSLEARN_KEY("pool_c", pool_spec(rc).c = parse_distribution(key, v)),
      OBSLEARN_KEY("pool_beta", pool_spec(rc).beta = parse_distribution(key, v)),
      OBSLEARN_KEY("pool_report_noise_sd", pool_spec(rc).report_noise_sd = parse_distribution(key, v)),
      OBSLEARN_KEY("covariates", rc.sim.covariates.enabled = parse_bool(key, v)),
      OBSLEARN_KEY("female_rate", rc.sim.covariates.female_rate = parse_number(key, v)),
      OBSLEARN_KEY("prob_stat_rate", rc.sim.covariates.prob_stat_rate = parse_number(key, v)),
      OBSLEARN_KEY("education_mean", rc.sim.covariates.education_mean = parse_number(key, v)),
      OBSLEARN_KEY("education_sd", rc.sim.covariates.education_sd = parse_number(key, v)),
      OBSLEARN_KEY("age_mean", rc.sim.covariates.age_mean = parse_number(key, v)),
      OBSLEARN_KEY("age_sd", rc.sim.covariates.age_sd = parse_number(key, v)),
      OBSLEARN_KEY("out", rc.out_dir = v),
      OBSLEARN_KEY("panel", rc.panel_path = v),
      OBSLEARN_KEY("bandwidth", rc.bandwidth = parse_number(key, v)),
      OBSLEARN_KEY("posterior_source", rc.posterior_source = parse_posterior_source(key, v)),
      OBSLEARN_KEY("winsorize", rc.winsorize = parse_bool(key, v)),
      OBSLEARN_KEY("include_bot_nls", rc.include_bot_nls = parse_bool(key, v)),
      OBSLEARN_KEY("nls_upper", rc.nls_upper = parse_number(key, v)),
      OBSLEARN_KEY("fifty_rule", {
        if (v == "posterior") rc.classify.at_fifty = FiftyRule::PosteriorError;
        else if (v == "reasoning") rc.classify.at_fifty = FiftyRule::ReasoningError;
        else throw ConfigError(key + ": expected posterior or reasoning");
      }),
      OBSLEARN_KEY("verbosity", rc.verbosity = int(parse_integer(key, v))),
  };
  return setters;
}

#undef OBSLEARN_KEY

}  // namespace detail

/// Applies one key=value setting. Throws ConfigError on unknown keys or bad
/// values.
inline void apply_setting(RunConfig& rc, const std::string& key, const std::string& value) {
  const auto& setters = detail::config_setters();
  auto it = setters.find(key);
  if (it == setters.end()) throw ConfigError("unknown configuration key '" + key + "'");
  it->second(rc, key, value);
}

inline void validate(const RunConfig& rc) {
  validate(rc.sim);
  if (!(rc.bandwidth > 0.0)) throw ConfigError("bandwidth must be positive");
  if (!(rc.nls_upper > 0.0)) throw ConfigError("nls_upper must be positive");
  if (rc.out_dir.empty()) throw ConfigError("out must not be empty");
}

inline RunConfig parse_config(std::istream& is, const std::string& source = "<config>") {
  RunConfig rc;
  std::string line;
  int line_no = 0;
  std::map<std::string, int> seen;
  struct Deferred {
    std::string key, value;
    int line_no;
  };
  std::vector<Deferred> deferred;
  auto apply_at = [&](const std::string& key, const std::string& value, int at) {
    try {
      apply_setting(rc, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(at) + ": " + e.what());
    }
  };
  while (std::getline(is, line)) {
    ++line_no;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = detail::trim(t.substr(0, eq));
    const std::string value = detail::trim(t.substr(eq + 1));
    if (seen.count(key)) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    seen[key] = line_no;
    // pool overrides start from the final subject population
    if (key.rfind("pool_", 0) == 0 && key != "pool_size") {
      deferred.push_back({key, value, line_no});
      continue;
    }
    apply_at(key, value, line_no);
  }
  for (const auto& d : deferred) apply_at(d.key, d.value, d.line_no);
  return rc;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path);
  return parse_config(is, path);
}

}  // namespace obslearn
