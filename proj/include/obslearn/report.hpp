#pragma once

// Subcommand orchestration: builds every output artifact in memory as text,
// then writes them under the output directory.

#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <set>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "obslearn/classify.hpp"
#include "obslearn/config.hpp"
#include "obslearn/error.hpp"
#include "obslearn/estimate/kernel.hpp"
#include "obslearn/estimate/regression.hpp"
#include "obslearn/estimate/structural.hpp"
#include "obslearn/panel_io.hpp"
#include "obslearn/sim.hpp"
#include "obslearn/stats.hpp"
#include "obslearn/version.hpp"

namespace obslearn {

struct Artifact {
  std::string name;
  std::string content;
};

/// Fixed-format number; NA for NaN, Inf/-Inf for infinities.
inline std::string fmt(double v, int digits = 10) {
  if (std::isnan(v)) return "NA";
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

inline std::string fmt_fixed(double v, int decimals = 6) {
  if (std::isnan(v)) return "NA";
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

/// The panel a command works on: read from rc.panel_path or simulated.
inline Panel obtain_panel(const RunConfig& rc) {
  if (rc.panel_path) {
    Panel p = read_panel(*rc.panel_path);
    validate_panel(p);
    return p;
  }
  return simulate_experiment(rc.sim);
}

inline Artifact panel_artifact(const Panel& panel) {
  std::ostringstream os;
  write_panel(panel, os);
  return {"panel.csv", os.str()};
}

// ---------------------------------------------------------------- classify

inline std::vector<Artifact> classify_artifacts(const Panel& panel, const RunConfig& rc) {
  const RateTables tables = rate_tables(panel, rc.classify);
  std::vector<Artifact> out;
  for (const RateTable* t : tables.all()) {
    std::ostringstream os;
    os << csv_comment_header("rates/" + t->name, panel.master_seed);
    for (const auto& k : t->key_columns) os << k << ",";
    os << "n,irrational,posterior_error,reasoning_error,rate,rate_se,posterior_rate,reasoning_rate\n";
    for (const auto& [key, c] : t->cells) {
      for (const auto& k : key) os << k << ",";
      os << c.n << "," << c.irrational << "," << c.posterior_err << "," << c.reasoning_err << ","
         << fmt_fixed(c.rate()) << "," << fmt_fixed(c.rate_se()) << ","
         << fmt_fixed(c.posterior_rate()) << "," << fmt_fixed(c.reasoning_rate()) << "\n";
    }
    out.push_back({"rates_" + t->name + ".csv", os.str()});
  }
  return out;
}

// ---------------------------------------------------------------- estimate

struct NamedEstimate {
  std::string parameter;
  std::string condition;
  std::string source;
  EstimationResult result;
};

inline std::vector<NamedEstimate> structural_estimates(const Panel& panel, const RunConfig& rc) {
  FitOptions fo;
  fo.winsorize = rc.winsorize;
  fo.stake = rc.sim.stake;
  std::vector<NamedEstimate> out;
  const EstimationResult c_ind = fit_c_ols(panel, Condition::Individual, fo);
  out.push_back({"c", "IND", "reported", c_ind});
  out.push_back({"c", "SOC", "rational_neighbor", fit_c_ols(panel, Condition::Social, fo)});
  out.push_back({"beta", "IND", "reported",
                 fit_beta_logit(panel, Condition::Individual, PosteriorSource::Reported, fo)});
  out.push_back({"beta", "IND", "bayes",
                 fit_beta_logit(panel, Condition::Individual, PosteriorSource::Bayesian, fo)});
  const bool bayes = rc.posterior_source == PosteriorSource::Bayesian;
  out.push_back({"beta", "SOC", bayes ? "bayes" : "reported",
                 fit_beta_logit(panel, Condition::Social, rc.posterior_source, fo)});
  NlsOptions no;
  no.winsorize = rc.winsorize;
  no.include_bot = rc.include_bot_nls;
  no.upper = rc.nls_upper;
  out.push_back({"beta_tilde", "SOC", "nls",
                 fit_beta_tilde_nls(panel, c_ind.estimate, rc.sim.stake, no)});
  return out;
}

inline std::string estimates_csv(const std::vector<NamedEstimate>& ests,
                                 std::optional<std::uint64_t> seed) {
  std::ostringstream os;
  os << csv_comment_header("estimates", seed);
  os << "parameter,condition,source,estimate,std_error,n_used,n_dropped,converged,iterations,"
        "objective,fit_r2,at_bound,note\n";
  for (const auto& e : ests) {
    const auto& r = e.result;
    os << e.parameter << "," << e.condition << "," << e.source << "," << fmt(r.estimate) << ","
       << fmt(r.std_error) << "," << r.n_used << "," << r.n_dropped << "," << (r.converged ? 1 : 0)
       << "," << r.iterations << "," << fmt(r.objective_at_optimum) << "," << fmt(r.fit_r2) << ","
       << (r.at_bound ? 1 : 0) << "," << r.note << "\n";
  }
  return os.str();
}

inline std::string regression_csv(const std::string& kind, const RegressionFit& f, bool logit,
                                  std::optional<std::uint64_t> seed) {
  std::ostringstream os;
  os << csv_comment_header("regression/" + kind, seed);
  os << "# n=" << f.n << " covariance=" << to_code(f.cov_type);
  if (f.n_clusters) os << " clusters=" << f.n_clusters;
  if (logit) {
    os << " log_likelihood=" << fmt(f.log_likelihood) << " pseudo_r2=" << fmt(f.pseudo_r_squared);
  } else {
    os << " r2=" << fmt(f.r_squared) << " adj_r2=" << fmt(f.adj_r_squared);
  }
  os << "\nterm,estimate,std_error,statistic,p_value" << (logit ? ",ame" : "") << "\n";
  const double df = double(f.n - f.coef.size());
  for (Eigen::Index j = 0; j < f.coef.size(); ++j) {
    const double se = f.std_error(j);
    const double stat = se > 0.0 ? f.coef(j) / se : std::numeric_limits<double>::quiet_NaN();
    double p = std::numeric_limits<double>::quiet_NaN();
    if (!std::isnan(stat)) {
      p = logit ? normal_two_sided_p(stat)
                : 2.0 * boost::math::cdf(boost::math::complement(
                            boost::math::students_t(df), std::abs(stat)));
    }
    os << f.names[std::size_t(j)] << "," << fmt(f.coef(j)) << "," << fmt(se) << "," << fmt(stat)
       << "," << fmt(p);
    if (logit) os << "," << fmt(f.ame(j));
    os << "\n";
  }
  return os.str();
}

inline std::string skipped_csv(const std::string& kind, const std::string& why,
                               std::optional<std::uint64_t> seed) {
  return csv_comment_header("regression/" + kind, seed) + "# skipped: " + why + "\n" +
         "term,estimate,std_error,statistic,p_value\n";
}

struct RegressionOutputs {
  std::vector<Artifact> files;
  std::vector<std::string> notes;
};

/// Covariate regressions. A regression that cannot be fitted (no outcome
/// variation, rank deficiency, no Demographics records) is written as a
/// skipped table rather than failing the run.
inline RegressionOutputs regression_artifacts(const Panel& panel, const RunConfig& rc) {
  RegressionOutputs out;
  const RateTables tables = rate_tables(panel, rc.classify);
  const auto covs = subject_covariates(panel);
  auto attempt = [&](const std::string& kind, bool logit, auto&& fit) {
    const std::string file = "regression_" + kind + ".csv";
    try {
      out.files.push_back({file, regression_csv(kind, fit(), logit, panel.master_seed)});
    } catch (const DataError& e) {
      out.files.push_back({file, skipped_csv(kind, e.what(), panel.master_seed)});
      out.notes.push_back(kind + " skipped: " + e.what());
    } catch (const NumericalError& e) {
      out.files.push_back({file, skipped_csv(kind, e.what(), panel.master_seed)});
      out.notes.push_back(kind + " skipped: " + e.what());
    }
  };
  attempt("ols_IND", false,
          [&] { return fit_subject_ols(tables.by_subject, covs, Condition::Individual); });
  attempt("ols_SOC", false, [&] { return fit_subject_ols(tables.by_subject, covs, Condition::Social); });
  attempt("logit_subject", true, [&] { return fit_irrationality_logit(panel, false, true, rc.classify); });
  attempt("logit_neighbor", true, [&] { return fit_irrationality_logit(panel, true, true, rc.classify); });
  return out;
}

// ---------------------------------------------------------------- kernel

inline std::vector<Artifact> kernel_artifacts(const Panel& panel, const RunConfig& rc) {
  std::vector<Artifact> out;
  for (CurveKind k : {CurveKind::BeliefIndividual, CurveKind::BeliefSocial,
                      CurveKind::ChoiceIndividual, CurveKind::ChoiceSocial}) {
    const CurvePoints pts = curve_inputs(panel, k, {}, rc.classify);
    std::ostringstream os;
    os << csv_comment_header("curve/" + to_code(k), panel.master_seed);
    os << "# bandwidth=" << fmt(rc.bandwidth) << " kernel=gaussian n=" << pts.xs.size() << "\n";
    os << "grid,estimate,sd,n_effective,total_weight\n";
    if (!pts.xs.empty()) {
      const KernelCurve c = kernel_regression(pts.xs, pts.ys, rc.bandwidth);
      for (std::size_t i = 0; i < c.grid.size(); ++i) {
        os << fmt(c.grid[i]) << "," << fmt(c.estimates[i]) << "," << fmt(c.sd[i]) << ","
           << fmt(c.n_effective[i]) << "," << fmt(c.total_weight[i]) << "\n";
      }
    }
    out.push_back({"curve_" + to_code(k) + ".csv", os.str()});
  }
  return out;
}

// ---------------------------------------------------------------- test

struct NamedTest {
  std::string comparison;
  std::optional<TestResult> result;
  std::string note;
};

inline std::vector<NamedTest> hypothesis_tests(const Panel& panel, const RunConfig& rc) {
  std::vector<NamedTest> out;
  auto attempt = [&](const std::string& name, auto&& run) {
    try {
      out.push_back({name, run(), ""});
    } catch (const DataError& e) {
      out.push_back({name, std::nullopt, e.what()});
    }
  };
  const RateTables t = rate_tables(panel, rc.classify);
  auto cell = [&](const RateTable& table, std::vector<std::string> key) {
    const RateCell* c = table.find(key);
    return c ? *c : RateCell{};
  };
  auto subject_rates = [&](Treatment tr, Condition cond) {
    std::vector<double> v;
    for (const auto& [key, c] : t.by_subject.cells) {
      if (key[1] == to_code(tr) && key[2] == to_code(cond) && c.n > 0) v.push_back(c.rate());
    }
    return v;
  };

  // within-subject individual vs social, neighbor treatments only
  const std::set<Treatment> social_arms{Treatment::Base, Treatment::Demographics, Treatment::Bot};
  const PairedSubjectRates paired = paired_subject_rates(panel, rc.classify, social_arms);
  attempt("SOC_vs_IND/paired", [&] { return paired_rate_test(paired.social, paired.individual); });
  attempt("SOC_vs_IND/anderson_darling",
          [&] { return anderson_darling_2(paired.social, paired.individual); });
  RateCell ind, soc;
  for (Treatment tr : social_arms) {
    const RateCell a = cell(t.by_treatment_condition, {to_code(tr), "IND"});
    const RateCell b = cell(t.by_treatment_condition, {to_code(tr), "SOC"});
    ind.n += a.n;
    ind.irrational += a.irrational;
    soc.n += b.n;
    soc.irrational += b.irrational;
  }
  attempt("SOC_vs_IND/pooled",
          [&] { return two_prop_test(soc.irrational, soc.n, ind.irrational, ind.n); });

  const RateCell bs_ind = cell(t.between_subject, {"ALL", "IND"});
  const RateCell bs_soc = cell(t.between_subject, {"ALL", "SOC"});
  attempt("SOC_vs_IND/between_subject",
          [&] { return two_prop_test(bs_soc.irrational, bs_soc.n, bs_ind.irrational, bs_ind.n); });

  const std::pair<Treatment, Treatment> pairs[] = {{Treatment::Base, Treatment::Demographics},
                                                   {Treatment::Base, Treatment::Bot},
                                                   {Treatment::Demographics, Treatment::Bot},
                                                   {Treatment::Bot, Treatment::Ball}};
  for (const auto& [a, b] : pairs) {
    const RateCell ca = cell(t.by_treatment_condition, {to_code(a), "SOC"});
    const RateCell cb = cell(t.by_treatment_condition, {to_code(b), "SOC"});
    if (ca.n == 0 || cb.n == 0) continue;
    const std::string name = to_code(a) + "_vs_" + to_code(b) + "/SOC";
    attempt(name + "/pooled", [&] { return two_prop_test(ca.irrational, ca.n, cb.irrational, cb.n); });
    attempt(name + "/anderson_darling", [&] {
      return anderson_darling_2(subject_rates(a, Condition::Social), subject_rates(b, Condition::Social));
    });
  }
  const RateCell ball_soc = cell(t.by_treatment_condition, {"BALL", "SOC"});
  const RateCell ball_ind = cell(t.by_treatment_condition, {"BALL", "IND"});
  if (ball_soc.n > 0 && ball_ind.n > 0) {
    attempt("BALL/SOC_vs_IND/pooled", [&] {
      return two_prop_test(ball_soc.irrational, ball_soc.n, ball_ind.irrational, ball_ind.n);
    });
  }

  for (Condition cond : {Condition::Individual, Condition::Social}) {
    long k = 0, n = 0;
    for (const TrialRecord* r : panel.subject_records(cond)) {
      ++n;
      k += r->choice == State::X ? 1 : 0;
    }
    if (n > 0) {
      attempt("choice_X_share/" + to_code(cond), [&] { return prop_test_one(k, n, 0.5); });
    }
  }
  return out;
}

inline std::string tests_csv(const std::vector<NamedTest>& tests, std::optional<std::uint64_t> seed) {
  std::ostringstream os;
  os << csv_comment_header("tests", seed);
  os << "comparison,method,statistic,p_value,n1,n2,degenerate,note\n";
  for (const auto& t : tests) {
    if (t.result) {
      const auto& r = *t.result;
      os << t.comparison << "," << to_code(r.method) << "," << fmt(r.statistic) << ","
         << fmt(r.p_value) << "," << r.n1 << "," << r.n2 << "," << (r.degenerate ? 1 : 0) << ",\n";
    } else {
      os << t.comparison << ",NA,NA,NA,NA,NA,NA," << t.note << "\n";
    }
  }
  return os.str();
}

// ---------------------------------------------------------------- summary

inline std::string summary_text(const Panel& panel, const RunConfig& rc,
                                const std::vector<NamedEstimate>& ests,
                                const std::vector<NamedTest>& tests,
                                const std::vector<std::string>& notes) {
  std::ostringstream os;
  os << "obslearn " << kVersion << "\n";
  os << "master_seed " << (panel.master_seed ? std::to_string(*panel.master_seed) : "NA") << "\n";
  long n_pool = 0;
  for (const auto& r : panel.records) n_pool += r.is_pool() ? 1 : 0;
  os << "records " << panel.size() - std::size_t(n_pool) << " (plus " << n_pool << " pool)\n\n";

  const RateTables t = rate_tables(panel, rc.classify);
  os << "Irrationality rates (rate / posterior error / reasoning error)\n";
  for (const auto& [key, c] : t.by_condition.cells) {
    os << "  " << key[0] << "  n=" << c.n << "  " << fmt_fixed(c.rate(), 3) << " / "
       << fmt_fixed(c.posterior_rate(), 3) << " / " << fmt_fixed(c.reasoning_rate(), 3) << "\n";
  }
  os << "By treatment\n";
  for (const auto& [key, c] : t.by_treatment_condition.cells) {
    os << "  " << key[0] << " " << key[1] << "  n=" << c.n << "  " << fmt_fixed(c.rate(), 3)
       << " / " << fmt_fixed(c.posterior_rate(), 3) << " / " << fmt_fixed(c.reasoning_rate(), 3)
       << "\n";
  }
  os << "\nStructural estimates\n";
  for (const auto& e : ests) {
    os << "  " << e.parameter << " " << e.condition << " " << e.source << "  "
       << fmt(e.result.estimate, 6) << " (se " << fmt(e.result.std_error, 4) << ", n "
       << e.result.n_used << ")";
    if (!e.result.note.empty()) os << " [" << e.result.note << "]";
    os << "\n";
  }
  os << "\nTests\n";
  for (const auto& tr : tests) {
    os << "  " << tr.comparison << "  ";
    if (tr.result) {
      os << to_code(tr.result->method) << " stat " << fmt(tr.result->statistic, 4) << " p "
         << fmt(tr.result->p_value, 4) << (tr.result->degenerate ? " [degenerate]" : "") << "\n";
    } else {
      os << "NA (" << tr.note << ")\n";
    }
  }
  if (!notes.empty()) {
    os << "\nNotes\n";
    for (const auto& n : notes) os << "  " << n << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------- dispatch

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = {"simulate", "classify", "estimate",
                                                 "kernel",   "test",     "report"};
  return names;
}

/// All artifacts one subcommand produces, in a fixed order.
inline std::vector<Artifact> build_artifacts(const std::string& command, const RunConfig& rc) {
  validate(rc);
  const Panel panel = obtain_panel(rc);
  std::vector<Artifact> out;
  auto append = [&](std::vector<Artifact> more) {
    for (auto& a : more) out.push_back(std::move(a));
  };
  if (command == "simulate") {
    out.push_back(panel_artifact(panel));
  } else if (command == "classify") {
    append(classify_artifacts(panel, rc));
  } else if (command == "estimate") {
    out.push_back({"estimates.csv", estimates_csv(structural_estimates(panel, rc), panel.master_seed)});
    append(regression_artifacts(panel, rc).files);
  } else if (command == "kernel") {
    append(kernel_artifacts(panel, rc));
  } else if (command == "test") {
    out.push_back({"tests.csv", tests_csv(hypothesis_tests(panel, rc), panel.master_seed)});
  } else if (command == "report") {
    if (!rc.panel_path) out.push_back(panel_artifact(panel));
    append(classify_artifacts(panel, rc));
    const auto ests = structural_estimates(panel, rc);
    out.push_back({"estimates.csv", estimates_csv(ests, panel.master_seed)});
    RegressionOutputs regs = regression_artifacts(panel, rc);
    append(std::move(regs.files));
    append(kernel_artifacts(panel, rc));
    const auto tests = hypothesis_tests(panel, rc);
    out.push_back({"tests.csv", tests_csv(tests, panel.master_seed)});
    out.push_back({"summary.txt", summary_text(panel, rc, ests, tests, regs.notes)});
  } else {
    throw ConfigError("unknown subcommand '" + command + "'");
  }
  return out;
}

inline void write_artifacts(const std::string& dir, const std::vector<Artifact>& artifacts) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory " + dir + ": " + ec.message());
  for (const auto& a : artifacts) {
    const auto path = std::filesystem::path(dir) / a.name;
    std::ofstream os(path, std::ios::binary);
    os << a.content;
    if (!os) throw DataError("write failed: " + path.string());
  }
}

/// Runs a subcommand and returns the process exit status: 0 on success, 2 for
/// configuration errors, 3 for data errors, 4 for numerical failures.
inline int run(const std::string& command, const RunConfig& rc, std::ostream& err = std::cerr) {
  try {
    write_artifacts(rc.out_dir, build_artifacts(command, rc));
    return 0;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return 3;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return 4;
  }
}

}  // namespace obslearn
