// Command-line front end: obslearn <simulate|classify|estimate|kernel|test|report> [options]

#include <CLI11.hpp>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "obslearn/config.hpp"
#include "obslearn/error.hpp"
#include "obslearn/report.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Simulation and structural estimation of learning from a neighbor's choice"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string panel_path;
  std::optional<double> bandwidth;
  std::string posterior_source;
  bool winsorize = false;
  bool include_bot = false;

  const std::map<std::string, std::string> about = {
      {"simulate", "write a simulated panel"},
      {"classify", "irrationality rate tables"},
      {"estimate", "structural estimates and regressions"},
      {"kernel", "kernel-smoothed belief and choice curves"},
      {"test", "hypothesis tests on irrationality rates"},
      {"report", "everything above plus a text summary"}};
  for (const auto& name : obslearn::subcommands()) {
    CLI::App* sub = app.add_subcommand(name, about.at(name));
    sub->add_option("--config", config_path, "key=value configuration file");
    sub->add_option("--seed", seed, "master seed (overrides the config)");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--panel", panel_path, "analyze this panel CSV instead of simulating");
    sub->add_option("--bandwidth", bandwidth, "kernel bandwidth on the 0-100 scale");
    sub->add_option("--posterior-source", posterior_source, "reported|bayes")
        ->check(CLI::IsMember({"reported", "bayes"}));
    sub->add_flag("--winsorize", winsorize, "clamp reported 0/100 to 1/99 instead of dropping");
    sub->add_flag("--include-bot-nls", include_bot, "add Bot records to the beta_tilde fit");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  obslearn::RunConfig rc;
  try {
    if (!config_path.empty()) rc = obslearn::load_config(config_path);
    if (seed) rc.sim.master_seed = *seed;
    if (!out_dir.empty()) rc.out_dir = out_dir;
    if (!panel_path.empty()) rc.panel_path = panel_path;
    if (bandwidth) rc.bandwidth = *bandwidth;
    if (!posterior_source.empty()) {
      rc.posterior_source = obslearn::parse_posterior_source("--posterior-source", posterior_source);
    }
    if (winsorize) rc.winsorize = true;
    if (include_bot) rc.include_bot_nls = true;
  } catch (const obslearn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  return obslearn::run(app.get_subcommands().front()->get_name(), rc);
}
