#include <gtest/gtest.h>

#include "obslearn/classify.hpp"
#include "obslearn/sim.hpp"

using namespace obslearn;

namespace {

TrialRecord individual(InformationStructure s, Signal ball, State choice, int reported) {
  TrialRecord r;
  r.session_id = "S";
  r.subject_id = "A";
  r.structure = s;
  r.ball = ball;
  r.ball_shown = true;
  r.choice = choice;
  r.reported_posterior_pct = reported;
  return r;
}

TrialRecord ball_social(InformationStructure s, Signal ball, State guess, State choice, int reported) {
  TrialRecord r = individual(s, ball, choice, reported);
  r.treatment = Treatment::Ball;
  r.condition = Condition::Social;
  r.neighbor_id = "POOL-001";
  r.neighbor_guess = guess;
  return r;
}

}  // namespace

TEST(ClassifyRecord, Examples) {
  EXPECT_EQ(classify_record(individual({8, 7}, Signal::White, State::Y, 70)), ErrorLabel::PosteriorError);
  EXPECT_EQ(classify_record(individual({8, 7}, Signal::White, State::Y, 30)), ErrorLabel::ReasoningError);
  EXPECT_EQ(classify_record(individual({8, 7}, Signal::White, State::X, 30)), ErrorLabel::Rational);
  for (int rep : {0, 50, 100}) {
    EXPECT_EQ(classify_record(individual({5, 5}, Signal::White, State::Y, rep)), ErrorLabel::Excluded);
  }
}

TEST(ClassifyRecord, FiftyRule) {
  const TrialRecord r = individual({8, 7}, Signal::White, State::Y, 50);
  EXPECT_EQ(classify_record(r), ErrorLabel::PosteriorError);
  EXPECT_EQ(classify_record(r, {FiftyRule::ReasoningError}), ErrorLabel::ReasoningError);
}

TEST(ClassifyRecord, BallTreatmentConditionsOnRationalNeighbor) {
  EXPECT_EQ(classify_record(ball_social({8, 7}, Signal::White, State::Y, State::Y, 90)), ErrorLabel::Excluded);
  EXPECT_EQ(classify_record(ball_social({8, 7}, Signal::White, State::X, State::Y, 90)),
            ErrorLabel::PosteriorError);
  EXPECT_EQ(classify_record(ball_social({8, 7}, Signal::White, State::X, State::X, 90)), ErrorLabel::Rational);
}

TEST(ClassifyRecord, SocialFollowsTheGuess) {
  TrialRecord r = individual({9, 6}, Signal::White, State::X, 60);
  r.ball.reset();
  r.ball_shown = false;
  r.condition = Condition::Social;
  r.neighbor_id = "POOL-002";
  r.neighbor_guess = State::Y;
  EXPECT_EQ(classify_record(r), ErrorLabel::PosteriorError);
  r.reported_posterior_pct = 40;
  EXPECT_EQ(classify_record(r), ErrorLabel::ReasoningError);
  r.choice = State::Y;
  EXPECT_EQ(classify_record(r), ErrorLabel::Rational);
}

TEST(RateTables, DecompositionIsExact) {
  const Panel p = simulate_experiment(SimConfig{});
  const RateTables t = rate_tables(p);
  for (const RateTable* table : t.all()) {
    ASSERT_FALSE(table->cells.empty()) << table->name;
    for (const auto& [key, c] : table->cells) {
      EXPECT_EQ(c.irrational, c.posterior_err + c.reasoning_err) << table->name;
    }
  }
  // excluded (0.5,0.5) rounds are not counted
  EXPECT_EQ(t.by_condition.find({"IND"})->n, 151 * 20);
}

TEST(RateTables, CanonicalCellsOnlyUseTheDesignMirror) {
  const Panel p = simulate_experiment(SimConfig{});
  const RateTables t = rate_tables(p);
  long total = 0;
  for (const auto& [key, c] : t.by_canonical_signal.cells) total += c.n;
  long direct = 0;
  for (const auto& [key, c] : t.by_structure.cells) direct += c.n;
  EXPECT_EQ(total, direct);
}

TEST(RateTables, SocialAboveIndividualAtDefaults) {
  const Panel p = simulate_experiment(SimConfig{});
  const RateTables t = rate_tables(p);
  EXPECT_GT(t.by_condition.find({"SOC"})->rate(), t.by_condition.find({"IND"})->rate());
}

TEST(RateTables, BetweenSubjectUsesFirstConditionOnly) {
  // ball records with an off-signal guess are excluded, so leave that arm out
  SimConfig cfg;
  cfg.arms.pop_back();
  const Panel p = simulate_experiment(cfg);
  const RateTables t = rate_tables(p);
  const RateCell* ind = t.between_subject.find({"ALL", "IND"});
  const RateCell* soc = t.between_subject.find({"ALL", "SOC"});
  ASSERT_TRUE(ind && soc);
  EXPECT_EQ(ind->n + soc->n, 112 * 20);
}

TEST(Classify, ReasoningErrorsOnlyWhenLatentBeliefFavorsCorrect) {
  SimConfig cfg;
  const Panel p = simulate_experiment(cfg);
  Stream rng(0);
  const AgentParams params = cfg.population.draw(rng);
  for (const auto& r : p.records) {
    if (r.is_pool() || r.treatment == Treatment::Demographics) continue;
    const ErrorLabel l = classify_record(r);
    if (!is_irrational(l)) continue;
    const TrialContext ctx{r.condition, r.treatment, r.structure, r.ball, r.neighbor_guess};
    const Posterior latent = subjective_posterior(params, ctx, cfg.stake);
    const State correct = *theoretically_correct(r);
    if (l == ErrorLabel::ReasoningError) {
      EXPECT_GT(latent.prob(correct), 0.5);
    } else {
      EXPECT_LT(latent.prob(correct), 0.505);
    }
  }
}

TEST(PairedSubjectRates, OneRowPerSubject) {
  const Panel p = simulate_experiment(SimConfig{});
  const auto paired = paired_subject_rates(p);
  EXPECT_EQ(paired.subject_ids.size(), 151u);
  EXPECT_EQ(paired.individual.size(), paired.social.size());
}
