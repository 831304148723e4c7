#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "obslearn/config.hpp"
#include "obslearn/panel_io.hpp"
#include "obslearn/report.hpp"

using namespace obslearn;

namespace {

SimConfig small_config() {
  SimConfig cfg;
  cfg.arms = {{Treatment::Base, 3}, {Treatment::Demographics, 3}, {Treatment::Bot, 2}, {Treatment::Ball, 2}};
  cfg.pool_size = 5;
  cfg.master_seed = 99;
  return cfg;
}

std::string panel_text(const Panel& p) {
  std::ostringstream os;
  write_panel(p, os);
  return os.str();
}

std::string replace_first(std::string s, const std::string& from, const std::string& to) {
  s.replace(s.find(from), from.size(), to);
  return s;
}

}  // namespace

TEST(PanelIo, RoundTrip) {
  const Panel p = simulate_experiment(small_config());
  std::istringstream is(panel_text(p));
  const Panel q = read_panel(is);
  EXPECT_EQ(p, q);
  EXPECT_EQ(q.master_seed, std::optional<std::uint64_t>(99));
}

TEST(PanelIo, HeaderLine) {
  const std::string text = panel_text(simulate_experiment(small_config()));
  EXPECT_EQ(text.rfind("# obslearn 0.1.0 panel schema=1 master_seed=99\nsession_id,subject_id,", 0), 0u);
}

TEST(PanelIo, ColumnOrderIsFree) {
  Panel p = simulate_experiment(small_config());
  p.records.resize(3);
  // swap the first two columns everywhere
  std::istringstream in(panel_text(p));
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    if (line[0] == '#') {
      out << line << "\n";
      continue;
    }
    const auto a = line.find(','), b = line.find(',', a + 1);
    out << line.substr(a + 1, b - a - 1) << "," << line.substr(0, a) << line.substr(b) << "\n";
  }
  std::istringstream is(out.str());
  EXPECT_EQ(read_panel(is), p);
}

TEST(PanelIo, MissingColumnIsNamed) {
  const std::string text = replace_first(panel_text(simulate_experiment(small_config())),
                                         ",neighbor_prob_stat\n", "\n");
  std::istringstream is(text);
  try {
    read_panel(is);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("neighbor_prob_stat"), std::string::npos);
  }
}

TEST(PanelIo, UnknownColumnRejected) {
  const std::string text =
      replace_first(panel_text(simulate_experiment(small_config())), "session_id,", "sessionid,");
  std::istringstream is(text);
  EXPECT_THROW(read_panel(is), DataError);
}

TEST(PanelIo, SchemaChecked) {
  const std::string text = panel_text(simulate_experiment(small_config()));
  std::istringstream wrong(replace_first(text, "schema=1", "schema=2"));
  EXPECT_THROW(read_panel(wrong), DataError);
  std::istringstream missing(text.substr(text.find('\n') + 1));
  EXPECT_THROW(read_panel(missing), DataError);
}

TEST(PanelIo, BadValueReportsLine) {
  std::string text = panel_text(simulate_experiment(small_config()));
  // third line is the first record; corrupt its round field
  const auto rec = text.find('\n', text.find('\n') + 1) + 1;
  std::size_t pos = rec;
  for (int i = 0; i < 5; ++i) pos = text.find(',', pos) + 1;
  text.replace(pos, text.find(',', pos) - pos, "x");
  std::istringstream is(text);
  try {
    read_panel(is, "p.csv");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("p.csv:3:", 0), 0u) << e.what();
  }
}

TEST(PanelIo, InvalidRecordRejected) {
  std::string text = panel_text(simulate_experiment(small_config()));
  const auto rec = text.find('\n', text.find('\n') + 1) + 1;
  std::size_t pos = rec;
  for (int i = 0; i < 14; ++i) pos = text.find(',', pos) + 1;
  text.replace(pos, text.find(',', pos) - pos, "101");
  std::istringstream is(text);
  EXPECT_THROW(read_panel(is), DataError);
}

TEST(Config, ParsesKeys) {
  std::istringstream is(
      "# comment\n"
      "seed = 5\n"
      "n_bot = 0\n"
      "c = normal(0.9, 0.1, 0, 2)\n"
      "beta = uniform(0.2, 0.6)\n"
      "bandwidth = 10\n"
      "posterior_source = bayes\n"
      "fifty_rule = reasoning\n");
  const RunConfig rc = parse_config(is);
  EXPECT_EQ(rc.sim.master_seed, 5u);
  EXPECT_EQ(rc.sim.arms.size(), 3u);
  for (const auto& arm : rc.sim.arms) EXPECT_NE(arm.treatment, Treatment::Bot);
  EXPECT_EQ(rc.sim.population.c.kind, ParamDist::Kind::Normal);
  EXPECT_EQ(rc.sim.population.c.a, 0.9);
  EXPECT_EQ(rc.sim.population.c.hi, 2.0);
  EXPECT_EQ(rc.sim.population.beta.kind, ParamDist::Kind::Uniform);
  EXPECT_EQ(rc.bandwidth, 10.0);
  EXPECT_EQ(rc.posterior_source, PosteriorSource::Bayesian);
  EXPECT_EQ(rc.classify.at_fifty, FiftyRule::ReasoningError);
}

TEST(Config, Errors) {
  auto parse = [](const std::string& s) {
    std::istringstream is(s);
    return parse_config(is);
  };
  EXPECT_THROW(parse("colour = 1\n"), ConfigError);
  EXPECT_THROW(parse("seed = 1\nseed = 2\n"), ConfigError);
  EXPECT_THROW(parse("c = gamma(1, 2)\n"), ConfigError);
  EXPECT_THROW(parse("c = normal(1)\n"), ConfigError);
  EXPECT_THROW(parse("seed = -3\n"), ConfigError);
  EXPECT_THROW(parse("seed\n"), ConfigError);
  EXPECT_THROW(parse("winsorize = maybe\n"), ConfigError);
  try {
    parse("seed = 1\n\nbeta = x\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
  }
}

TEST(Config, PoolOverridesApplyAfterSubjectKeys) {
  std::istringstream is("pool_beta = 2\nc = 0.5\n");
  const RunConfig rc = parse_config(is);
  ASSERT_TRUE(rc.sim.pool_population.has_value());
  EXPECT_EQ(rc.sim.pool_population->beta.a, 2.0);
  EXPECT_EQ(rc.sim.pool_population->c.a, 0.5);
  EXPECT_EQ(rc.sim.population.beta.a, 0.472);
}

TEST(Report, ArtifactsAreDeterministic) {
  RunConfig rc;
  rc.sim = small_config();
  rc.sim.arms = {{Treatment::Base, 6}, {Treatment::Demographics, 6}, {Treatment::Bot, 6}, {Treatment::Ball, 6}};
  const auto a = build_artifacts("report", rc);
  const auto b = build_artifacts("report", rc);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].name, b[i].name);
    EXPECT_EQ(a[i].content, b[i].content) << a[i].name;
  }
  EXPECT_EQ(a.front().name, "panel.csv");
  EXPECT_EQ(a.back().name, "summary.txt");
}

TEST(Report, ExitCodes) {
  const auto dir = std::filesystem::temp_directory_path() / "obslearn_test_io";
  RunConfig rc;
  rc.sim = small_config();
  rc.out_dir = dir.string();
  std::ostringstream err;
  EXPECT_EQ(run("simulate", rc, err), 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "panel.csv"));
  EXPECT_EQ(run("nonsense", rc, err), 2);
  RunConfig bad = rc;
  bad.bandwidth = -1;
  EXPECT_EQ(run("kernel", bad, err), 2);
  RunConfig missing = rc;
  missing.panel_path = (dir / "absent.csv").string();
  EXPECT_EQ(run("classify", missing, err), 3);
  RunConfig from_file = rc;
  from_file.panel_path = (dir / "panel.csv").string();
  from_file.out_dir = (dir / "again").string();
  EXPECT_EQ(run("simulate", from_file, err), 0);
  std::filesystem::remove_all(dir);
}
