#pragma once

// Seeded generator of synthetic experiment panels.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "obslearn/agents.hpp"
#include "obslearn/codes.hpp"
#include "obslearn/error.hpp"
#include "obslearn/record.hpp"
#include "obslearn/rng.hpp"

namespace obslearn {

/// A point mass, a truncated normal or a uniform distribution for one
/// behavioral parameter.
struct ParamDist {
  enum class Kind : std::uint8_t { Point, Normal, Uniform };

  Kind kind = Kind::Point;
  double a = 0.0;  // value | mean | lower end
  double b = 0.0;  // unused | sd   | upper end
  double lo = 0.0;
  double hi = kInfinity;

  static ParamDist point(double v) { return {Kind::Point, v, 0.0, -kInfinity, kInfinity}; }
  static ParamDist normal(double mean, double sd, double lo = 0.0, double hi = kInfinity) {
    return {Kind::Normal, mean, sd, lo, hi};
  }
  static ParamDist uniform(double lo, double hi) { return {Kind::Uniform, lo, hi, lo, hi}; }

  void validate(const std::string& name) const {
    const bool ok = std::isfinite(a) && std::isfinite(b) && lo <= hi &&
                    (kind != Kind::Normal || b >= 0.0) && (kind != Kind::Uniform || a <= b);
    if (!ok) throw ConfigError("invalid distribution for " + name);
  }

  double draw(Stream& rng) const {
    switch (kind) {
      case Kind::Point:
        return a;
      case Kind::Uniform:
        return a + (b - a) * rng.uniform();
      case Kind::Normal:
        for (int attempt = 0; attempt < 1000; ++attempt) {
          const double v = a + b * rng.normal();
          if (v >= lo && v <= hi) return v;
        }
        return std::clamp(a, lo, hi);
    }
    return a;
  }
};

/// Population from which each subject's parameters are drawn independently.
struct PopulationSpec {
  AgentKind kind = AgentKind::Structural;
  ParamDist c = ParamDist::point(0.888);
  ParamDist beta = ParamDist::point(0.472);
  ParamDist beta_tilde = ParamDist::point(0.038);
  /// Empty means the believed neighbor bias equals the subject's own c.
  std::optional<ParamDist> c_tilde;
  ParamDist report_noise_sd = ParamDist::point(0.0);
  double beta_tilde_bot = 1000.0;
  /// Added to beta for subjects who took a probability/statistics course.
  double probstat_beta_boost = 0.0;
  /// Added to beta_tilde when a Demographics neighbor took such a course.
  double neighbor_probstat_beta_tilde_boost = 0.0;

  void validate() const {
    c.validate("c");
    beta.validate("beta");
    beta_tilde.validate("beta_tilde");
    if (c_tilde) c_tilde->validate("c_tilde");
    report_noise_sd.validate("report_noise_sd");
    if (!(beta_tilde_bot >= 0.0)) throw ConfigError("beta_tilde_bot must be non-negative");
  }

  AgentParams draw(Stream& rng) const {
    AgentParams p;
    p.kind = kind;
    p.c = c.draw(rng);
    p.beta = beta.draw(rng);
    p.beta_tilde = beta_tilde.draw(rng);
    p.c_tilde = c_tilde ? c_tilde->draw(rng) : p.c;
    p.report_noise_sd = report_noise_sd.draw(rng);
    p.beta_tilde_bot = beta_tilde_bot;
    return p;
  }
};

/// Subject characteristics. Defaults are the pooled sample moments of the
/// original four treatments.
struct CovariateSpec {
  bool enabled = true;
  double female_rate = 0.728;
  double prob_stat_rate = 0.695;
  double education_mean = 14.76;
  double education_sd = 1.93;
  double age_mean = 20.0;
  double age_sd = 1.8;

  void validate() const {
    auto rate = [](double r, const char* name) {
      if (!(r >= 0.0 && r <= 1.0)) throw ConfigError(std::string(name) + " must lie in [0,1]");
    };
    rate(female_rate, "female_rate");
    rate(prob_stat_rate, "prob_stat_rate");
    if (!(education_sd >= 0.0) || !(age_sd >= 0.0)) {
      throw ConfigError("covariate standard deviations must be non-negative");
    }
  }

  Covariates draw(Stream& rng) const {
    Covariates c;
    if (!enabled) return c;
    c.female = rng.bernoulli(female_rate);
    c.prob_stat = rng.bernoulli(prob_stat_rate);
    c.education_years =
        std::clamp(int(std::lround(education_mean + education_sd * rng.normal())), 8, 30);
    c.age = std::clamp(int(std::lround(age_mean + age_sd * rng.normal())), 18, 80);
    return c;
  }
};

struct TreatmentArm {
  Treatment treatment = Treatment::Base;
  int n_subjects = 0;
};

struct SimConfig {
  std::vector<TreatmentArm> arms = {{Treatment::Base, 40},
                                    {Treatment::Demographics, 34},
                                    {Treatment::Bot, 38},
                                    {Treatment::Ball, 39}};
  PopulationSpec population;
  /// Empty means pool neighbors are drawn from `population`.
  std::optional<PopulationSpec> pool_population;
  CovariateSpec covariates;
  Stake stake;
  int rounds_per_condition = 21;
  std::uint64_t master_seed = 20191201;
  bool order_randomization = true;
  ConditionOrder fixed_order = ConditionOrder::IndividualFirst;
  int pool_size = 94;
  bool neighbor_with_replacement = true;
  unsigned threads = 1;
};

inline void validate(const SimConfig& cfg) {
  if (cfg.arms.empty()) throw ConfigError("no treatments selected");
  std::set<Treatment> seen;
  for (const auto& arm : cfg.arms) {
    if (arm.treatment == Treatment::Pool) throw ConfigError("the pool is not a treatment");
    if (arm.n_subjects < 1) throw ConfigError("n_subjects must be positive");
    if (!seen.insert(arm.treatment).second) throw ConfigError("treatment listed twice");
    if (arm.treatment == Treatment::Demographics && !cfg.covariates.enabled) {
      throw ConfigError("Demographics treatment requires covariate distributions");
    }
  }
  cfg.population.validate();
  if (cfg.pool_population) cfg.pool_population->validate();
  cfg.covariates.validate();
  if (!(cfg.stake.dollars > 0.0)) throw ConfigError("stake must be positive");
  if (cfg.rounds_per_condition < 1) throw ConfigError("rounds_per_condition must be positive");
  if (cfg.pool_size < 1) throw ConfigError("pool_size must be at least 1");
  if (!cfg.neighbor_with_replacement && cfg.pool_size < cfg.rounds_per_condition) {
    throw ConfigError("sampling neighbors without replacement needs pool_size >= rounds");
  }
  if (cfg.threads < 1) throw ConfigError("threads must be at least 1");
}

/// Stated confidence (integer percent) that `choice` is correct: the belief
/// in the chosen state plus Gaussian noise truncated at three standard
/// deviations, rounded and clamped to [0,100].
inline int report_posterior(Posterior belief, State choice, double noise_sd, Stream& rng) {
  if (noise_sd < 0.0) throw DataError("negative reporting noise");
  double pct = 100.0 * belief.prob(choice);
  if (noise_sd > 0.0) {
    double z;
    do {
      z = rng.normal();
    } while (std::abs(z) > 3.0);
    pct += noise_sd * z;
  }
  return std::clamp(int(std::lround(pct)), 0, 100);
}

namespace detail {

inline std::string padded(int i) {
  std::string s = std::to_string(i);
  return std::string(s.size() < 3 ? 3 - s.size() : 0, '0') + s;
}

inline State draw_state(Stream& rng) { return rng.bernoulli(0.5) ? State::X : State::Y; }

inline Signal draw_ball(const InformationStructure& s, State state, Stream& rng) {
  const int white = ball_count(s, Signal::White, state);
  return int(rng.below(kBallsPerBox)) < white ? Signal::White : Signal::Black;
}

inline State draw_choice(const AgentParams& p, Posterior belief, Stake stake, Stream& rng) {
  if (p.kind == AgentKind::Structural) {
    return rng.uniform() < logit_choice_prob(p.beta, belief, stake) ? State::X : State::Y;
  }
  if (belief.prob_x == 0.5) return draw_state(rng);
  return belief.prob_x > 0.5 ? State::X : State::Y;
}

/// Structures visited in a condition: every design structure once per block
/// of 21 rounds, reshuffled per block.
inline std::vector<InformationStructure> round_schedule(int rounds, Stream& rng) {
  const auto all = enumerate_structures();
  std::vector<InformationStructure> out;
  out.reserve(rounds);
  while (int(out.size()) < rounds) {
    auto block = all;
    rng.shuffle(std::span(block));
    for (const auto& s : block) {
      if (int(out.size()) == rounds) break;
      out.push_back(s);
    }
  }
  return out;
}

using PoolIndex = std::map<InformationStructure, std::vector<std::size_t>>;

struct SubjectJob {
  Treatment treatment;
  int number;
};

inline std::vector<TrialRecord> simulate_subject(const SimConfig& cfg, const SubjectJob& job,
                                                 const std::vector<TrialRecord>& pool,
                                                 const PoolIndex& pool_index) {
  const std::string tag = to_code(job.treatment);
  Stream rng = substream(cfg.master_seed, tag, std::uint64_t(job.number));
  AgentParams params = cfg.population.draw(rng);
  const Covariates cov = cfg.covariates.draw(rng);
  if (cov.prob_stat) params.beta += cfg.population.probstat_beta_boost;

  ConditionOrder order = cfg.fixed_order;
  if (cfg.order_randomization) {
    order = rng.bernoulli(0.5) ? ConditionOrder::IndividualFirst : ConditionOrder::SocialFirst;
  }
  const Condition sequence[2] = {
      order == ConditionOrder::IndividualFirst ? Condition::Individual : Condition::Social,
      order == ConditionOrder::IndividualFirst ? Condition::Social : Condition::Individual};

  TrialRecord base;
  base.subject_id = tag + "-" + padded(job.number);
  base.session_id = "S-" + base.subject_id;
  base.treatment = job.treatment;
  base.condition_order = order;
  base.subject = cov;

  std::vector<TrialRecord> out;
  out.reserve(2 * std::size_t(cfg.rounds_per_condition));
  for (Condition cond : sequence) {
    const auto schedule = round_schedule(cfg.rounds_per_condition, rng);
    std::set<std::string> used_neighbors;
    for (int k = 0; k < cfg.rounds_per_condition; ++k) {
      TrialRecord r = base;
      r.condition = cond;
      r.round = k + 1;
      r.structure = schedule[std::size_t(k)];
      TrialContext ctx{cond, job.treatment, r.structure, std::nullopt, std::nullopt};
      AgentParams round_params = params;

      if (cond == Condition::Individual) {
        r.true_state = draw_state(rng);
        r.ball = draw_ball(r.structure, r.true_state, rng);
        r.ball_shown = true;
        ctx.ball = r.ball;
      } else if (job.treatment == Treatment::Bot) {
        r.true_state = draw_state(rng);
        const Signal bot_ball = draw_ball(r.structure, r.true_state, rng);
        r.neighbor_guess = bot_choice(r.structure, bot_ball, rng);
        r.neighbor_id = kBotNeighborId;
        ctx.neighbor_guess = r.neighbor_guess;
      } else {
        const auto& candidates = pool_index.at(r.structure);
        std::size_t pick;
        if (cfg.neighbor_with_replacement) {
          pick = candidates[rng.below(candidates.size())];
        } else {
          std::vector<std::size_t> fresh;
          for (std::size_t idx : candidates) {
            if (!used_neighbors.count(pool[idx].subject_id)) fresh.push_back(idx);
          }
          if (fresh.empty()) throw ConfigError("pool exhausted when sampling without replacement");
          pick = fresh[rng.below(fresh.size())];
          used_neighbors.insert(pool[pick].subject_id);
        }
        const TrialRecord& nb = pool[pick];
        r.true_state = nb.true_state;
        r.neighbor_guess = nb.choice;
        r.neighbor_id = nb.subject_id;
        ctx.neighbor_guess = r.neighbor_guess;
        if (job.treatment == Treatment::Ball) {
          r.ball = nb.ball;
          r.ball_shown = true;
          ctx.ball = r.ball;
        }
        if (job.treatment == Treatment::Demographics) {
          r.neighbor = nb.subject;
          if (nb.subject.prob_stat) {
            round_params.beta_tilde += cfg.population.neighbor_probstat_beta_tilde_boost;
          }
        }
      }

      const Posterior belief = subjective_posterior(round_params, ctx, cfg.stake);
      r.choice = draw_choice(round_params, belief, cfg.stake, rng);
      r.reported_posterior_pct = report_posterior(belief, r.choice, params.report_noise_sd, rng);
      out.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace detail

/// Neighbor pool: each pool subject plays one individual-condition round per
/// design structure, in shuffled order.
inline Panel simulate_pool(const SimConfig& cfg, std::uint64_t seed) {
  if (cfg.pool_size < 1) throw ConfigError("pool_size must be at least 1");
  const PopulationSpec& pop = cfg.pool_population ? *cfg.pool_population : cfg.population;
  Panel panel;
  panel.master_seed = seed;
  panel.records.reserve(std::size_t(cfg.pool_size) * kNumCanonicalStructures);
  for (int i = 1; i <= cfg.pool_size; ++i) {
    Stream rng = substream(seed, "POOL", std::uint64_t(i));
    AgentParams params = pop.draw(rng);
    const Covariates cov = cfg.covariates.draw(rng);
    if (cov.prob_stat) params.beta += pop.probstat_beta_boost;
    const auto schedule = detail::round_schedule(int(kNumCanonicalStructures), rng);
    for (std::size_t k = 0; k < schedule.size(); ++k) {
      TrialRecord r;
      r.subject_id = "POOL-" + detail::padded(i);
      r.session_id = "S-" + r.subject_id;
      r.treatment = Treatment::Pool;
      r.condition = Condition::Individual;
      r.condition_order = ConditionOrder::IndividualFirst;
      r.round = int(k) + 1;
      r.structure = schedule[k];
      r.true_state = detail::draw_state(rng);
      r.ball = detail::draw_ball(r.structure, r.true_state, rng);
      r.ball_shown = true;
      r.subject = cov;
      const TrialContext ctx{Condition::Individual, Treatment::Pool, r.structure, r.ball,
                             std::nullopt};
      const Posterior belief = subjective_posterior(params, ctx, cfg.stake);
      r.choice = detail::draw_choice(params, belief, cfg.stake, rng);
      r.reported_posterior_pct = report_posterior(belief, r.choice, params.report_noise_sd, rng);
      panel.records.push_back(std::move(r));
    }
  }
  return panel;
}

/// Full experiment: the pool's records first, then each treatment's subjects
/// in configuration order. Subjects are generated on `cfg.threads` threads;
/// each subject owns its random stream, so output does not depend on the
/// thread count.
inline Panel simulate_experiment(const SimConfig& cfg) {
  validate(cfg);
  Panel panel = simulate_pool(cfg, cfg.master_seed);
  const std::vector<TrialRecord> pool = panel.records;
  detail::PoolIndex pool_index;
  for (std::size_t i = 0; i < pool.size(); ++i) pool_index[pool[i].structure].push_back(i);

  std::vector<detail::SubjectJob> jobs;
  for (const auto& arm : cfg.arms) {
    for (int j = 1; j <= arm.n_subjects; ++j) jobs.push_back({arm.treatment, j});
  }
  std::vector<std::vector<TrialRecord>> results(jobs.size());
  const unsigned n_threads = std::min<unsigned>(cfg.threads, unsigned(jobs.size()));
  if (n_threads <= 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      results[i] = detail::simulate_subject(cfg, jobs[i], pool, pool_index);
    }
  } else {
    std::vector<std::exception_ptr> errors(n_threads);
    std::vector<std::thread> workers;
    for (unsigned t = 0; t < n_threads; ++t) {
      workers.emplace_back([&, t] {
        try {
          for (std::size_t i = t; i < jobs.size(); i += n_threads) {
            results[i] = detail::simulate_subject(cfg, jobs[i], pool, pool_index);
          }
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& w : workers) w.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  for (auto& block : results) {
    for (auto& r : block) panel.records.push_back(std::move(r));
  }
  return panel;
}

}  // namespace obslearn
