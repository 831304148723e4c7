#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "obslearn/env.hpp"

namespace obslearn {

struct Covariates {
  bool female = false;
  int education_years = 15;
  int age = 20;
  bool prob_stat = false;

  friend bool operator==(const Covariates&, const Covariates&) = default;
};

inline const std::string kBotNeighborId = "BOT";

/// One decision round.
///
/// `reported_posterior_pct` is the stated confidence that the subject's own
/// choice is correct, so P(X) is the report when `choice` is X and its
/// complement otherwise. In the social condition `true_state` is the state of
/// the round whose signal reached the subject (the neighbor's round).
struct TrialRecord {
  std::string session_id;
  std::string subject_id;
  Treatment treatment = Treatment::Base;
  Condition condition = Condition::Individual;
  ConditionOrder condition_order = ConditionOrder::IndividualFirst;
  int round = 1;
  InformationStructure structure;
  State true_state = State::X;
  std::optional<Signal> ball;
  bool ball_shown = false;
  std::optional<std::string> neighbor_id;
  std::optional<State> neighbor_guess;
  State choice = State::X;
  int reported_posterior_pct = 50;
  Covariates subject;
  std::optional<Covariates> neighbor;

  bool is_pool() const { return treatment == Treatment::Pool; }

  /// The record's first condition, given its order metadata.
  bool in_first_condition() const {
    return (condition == Condition::Individual) ==
           (condition_order == ConditionOrder::IndividualFirst);
  }

  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

/// Reported P(X) on the 0..100 scale.
inline int recovered_prob_x_pct(const TrialRecord& r) {
  return r.choice == State::X ? r.reported_posterior_pct : 100 - r.reported_posterior_pct;
}

inline double recovered_prob_x(const TrialRecord& r) {
  return recovered_prob_x_pct(r) / 100.0;
}

/// Throws DataError when a record violates the panel's structural invariants.
inline void validate_record(const TrialRecord& r) {
  auto fail = [&](const std::string& why) {
    throw DataError("malformed record (subject " + r.subject_id + ", round " +
                    std::to_string(r.round) + "): " + why);
  };
  if (!r.structure.valid()) fail("invalid information structure");
  if (r.reported_posterior_pct < 0 || r.reported_posterior_pct > 100) {
    fail("reported posterior outside [0,100]");
  }
  if (r.condition == Condition::Individual) {
    if (!r.ball) fail("individual record without a ball");
    if (r.neighbor_guess || r.neighbor_id) fail("individual record with neighbor fields");
    return;
  }
  if (r.is_pool()) fail("pool record in the social condition");
  if (!r.neighbor_guess) fail("social record without a neighbor guess");
  if (r.treatment == Treatment::Ball) {
    if (!r.ball || !r.ball_shown) fail("ball-treatment social record without the shown ball");
  } else if (r.ball_shown) {
    fail("ball shown outside the ball treatment");
  }
}

/// Flat, ordered collection of records.
struct Panel {
  std::vector<TrialRecord> records;
  std::optional<std::uint64_t> master_seed;

  std::size_t size() const { return records.size(); }

  template <class Pred>
  std::vector<const TrialRecord*> select(Pred&& pred) const {
    std::vector<const TrialRecord*> out;
    for (const auto& r : records) {
      if (pred(r)) out.push_back(&r);
    }
    return out;
  }

  /// Non-pool records of one condition.
  std::vector<const TrialRecord*> subject_records(Condition c) const {
    return select([c](const TrialRecord& r) { return !r.is_pool() && r.condition == c; });
  }

  std::map<std::string, std::vector<std::size_t>> index_by_subject() const {
    std::map<std::string, std::vector<std::size_t>> idx;
    for (std::size_t i = 0; i < records.size(); ++i) idx[records[i].subject_id].push_back(i);
    return idx;
  }

  std::map<std::pair<Treatment, Condition>, std::vector<std::size_t>>
  index_by_treatment_condition() const {
    std::map<std::pair<Treatment, Condition>, std::vector<std::size_t>> idx;
    for (std::size_t i = 0; i < records.size(); ++i) {
      idx[{records[i].treatment, records[i].condition}].push_back(i);
    }
    return idx;
  }

  friend bool operator==(const Panel&, const Panel&) = default;
};

/// Checks record-level invariants, unique sessions per subject, and that every
/// social neighbor resolves to a pool subject or the bot.
inline void validate_panel(const Panel& p) {
  std::map<std::string, std::string> session_owner;
  std::map<std::string, bool> pool_subjects;
  for (const auto& r : p.records) {
    validate_record(r);
    auto [it, inserted] = session_owner.emplace(r.session_id, r.subject_id);
    if (!inserted && it->second != r.subject_id) {
      throw DataError("session " + r.session_id + " shared by several subjects");
    }
    if (r.is_pool()) pool_subjects[r.subject_id] = true;
  }
  for (const auto& r : p.records) {
    if (r.condition != Condition::Social || !r.neighbor_id) continue;
    if (*r.neighbor_id == kBotNeighborId) continue;
    if (!pool_subjects.count(*r.neighbor_id)) {
      throw DataError("neighbor " + *r.neighbor_id + " of subject " + r.subject_id +
                      " is not a pool subject");
    }
  }
}

}  // namespace obslearn
