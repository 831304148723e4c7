#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "obslearn/classify.hpp"
#include "obslearn/panel_io.hpp"
#include "obslearn/sim.hpp"

using namespace obslearn;

namespace {

std::string as_csv(const Panel& p) {
  std::ostringstream os;
  write_panel(p, os);
  return os.str();
}

long count_non_pool(const Panel& p) {
  long n = 0;
  for (const auto& r : p.records) n += r.is_pool() ? 0 : 1;
  return n;
}

}  // namespace

TEST(Pool, SizeAndCoverage) {
  SimConfig cfg;
  EXPECT_EQ(simulate_pool(cfg, 1).size(), 94u * 21u);
  cfg.pool_size = 1;
  const Panel one = simulate_pool(cfg, 1);
  ASSERT_EQ(one.size(), 21u);
  std::set<InformationStructure> seen;
  for (const auto& r : one.records) seen.insert(r.structure);
  EXPECT_EQ(seen.size(), 21u);
}

TEST(Experiment, DefaultSizes) {
  const Panel p = simulate_experiment(SimConfig{});
  EXPECT_EQ(count_non_pool(p), 151 * 42);
  EXPECT_NO_THROW(validate_panel(p));
  std::set<std::string> subjects;
  for (const auto& r : p.records) {
    if (!r.is_pool()) subjects.insert(r.subject_id);
  }
  EXPECT_EQ(subjects.size(), 151u);
}

TEST(Experiment, DeterministicAcrossThreadCounts) {
  SimConfig cfg;
  const std::string a = as_csv(simulate_experiment(cfg));
  const std::string b = as_csv(simulate_experiment(cfg));
  cfg.threads = 4;
  const std::string c = as_csv(simulate_experiment(cfg));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
  cfg.master_seed += 1;
  EXPECT_NE(a, as_csv(simulate_experiment(cfg)));
}

TEST(Experiment, FixedOrder) {
  SimConfig cfg;
  cfg.order_randomization = false;
  cfg.fixed_order = ConditionOrder::IndividualFirst;
  const Panel p = simulate_experiment(cfg);
  std::map<std::string, Condition> last;
  for (const auto& r : p.records) {
    if (r.is_pool()) continue;
    auto it = last.find(r.subject_id);
    if (it != last.end()) {
      EXPECT_FALSE(it->second == Condition::Social && r.condition == Condition::Individual);
    }
    last[r.subject_id] = r.condition;
    EXPECT_EQ(r.condition_order, ConditionOrder::IndividualFirst);
  }
}

TEST(Experiment, IndividualVisitsEveryStructureOnce) {
  const Panel p = simulate_experiment(SimConfig{});
  std::map<std::string, std::set<InformationStructure>> seen;
  for (const TrialRecord* r : p.subject_records(Condition::Individual)) {
    EXPECT_TRUE(seen[r->subject_id].insert(r->structure).second);
  }
  for (const auto& [id, s] : seen) EXPECT_EQ(s.size(), 21u) << id;
}

TEST(Experiment, StateAndBallFrequencies) {
  SimConfig cfg;
  cfg.arms = {{Treatment::Base, 400}};
  const Panel p = simulate_experiment(cfg);
  long n = 0, x = 0;
  std::map<InformationStructure, std::pair<long, long>> white_given_x;
  for (const TrialRecord* r : p.subject_records(Condition::Individual)) {
    ++n;
    if (r->true_state == State::X) {
      ++x;
      auto& [k, m] = white_given_x[r->structure];
      ++m;
      k += *r->ball == Signal::White;
    }
  }
  EXPECT_NEAR(double(x) / n, 0.5, 4.0 * std::sqrt(0.25 / n));
  for (const auto& [s, km] : white_given_x) {
    const double th = s.theta_x();
    const double sd = std::sqrt(th * (1 - th) / km.second);
    EXPECT_NEAR(double(km.first) / km.second, th, 4.0 * sd + 1e-12);
  }
}

TEST(Experiment, SocialRecordShape) {
  const Panel p = simulate_experiment(SimConfig{});
  for (const TrialRecord* r : p.subject_records(Condition::Social)) {
    ASSERT_TRUE(r->neighbor_guess.has_value());
    ASSERT_TRUE(r->neighbor_id.has_value());
    EXPECT_EQ(r->ball.has_value(), r->treatment == Treatment::Ball);
    EXPECT_EQ(r->neighbor.has_value(), r->treatment == Treatment::Demographics);
    EXPECT_EQ(*r->neighbor_id == kBotNeighborId, r->treatment == Treatment::Bot);
  }
}

TEST(Experiment, RationalAgentsNeverErr) {
  SimConfig cfg;
  cfg.population.kind = AgentKind::ExactBayesianRational;
  const Panel p = simulate_experiment(cfg);
  for (const auto& r : p.records) {
    if (r.is_pool()) continue;
    const ErrorLabel l = classify_record(r);
    EXPECT_FALSE(is_irrational(l)) << r.subject_id << " round " << r.round;
    if (r.condition == Condition::Individual && !r.structure.uninformative()) {
      EXPECT_EQ(l, ErrorLabel::Rational);
    }
  }
}

TEST(ReportPosterior, Examples) {
  Stream rng(1);
  EXPECT_EQ(report_posterior({7.0 / 11.0}, State::X, 0.0, rng), 64);
  EXPECT_EQ(report_posterior({0.5}, State::X, 0.0, rng), 50);
  EXPECT_EQ(report_posterior({0.5}, State::Y, 0.0, rng), 50);
  EXPECT_EQ(report_posterior({1.0}, State::X, 0.0, rng), 100);
  EXPECT_EQ(report_posterior({1.0}, State::Y, 0.0, rng), 0);
  for (int i = 0; i < 1000; ++i) {
    const int v = report_posterior({0.98}, State::X, 10.0, rng);
    EXPECT_GE(v, 68);
    EXPECT_LE(v, 100);
  }
}

TEST(Config, Validation) {
  SimConfig cfg;
  cfg.arms.clear();
  EXPECT_THROW(validate(cfg), ConfigError);
  cfg = SimConfig{};
  cfg.arms.push_back({Treatment::Base, 3});
  EXPECT_THROW(validate(cfg), ConfigError);
  cfg = SimConfig{};
  cfg.population.beta = ParamDist::normal(0.4, -1.0);
  EXPECT_THROW(validate(cfg), ConfigError);
  cfg = SimConfig{};
  cfg.covariates.enabled = false;
  EXPECT_THROW(validate(cfg), ConfigError);
}

TEST(Config, NeighborsWithoutReplacementAreDistinct) {
  SimConfig cfg;
  cfg.neighbor_with_replacement = false;
  cfg.arms = {{Treatment::Base, 5}};
  const Panel p = simulate_experiment(cfg);
  std::map<std::string, std::set<std::string>> seen;
  for (const TrialRecord* r : p.subject_records(Condition::Social)) {
    EXPECT_TRUE(seen[r->subject_id].insert(*r->neighbor_id).second);
  }
}
