#pragma once

// Rationality labels for single records and error-rate tabulations.

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "obslearn/canonicalize.hpp"
#include "obslearn/codes.hpp"
#include "obslearn/record.hpp"

namespace obslearn {

enum class ErrorLabel : std::uint8_t { Rational, PosteriorError, ReasoningError, Excluded };

inline std::string to_code(ErrorLabel l) {
  switch (l) {
    case ErrorLabel::Rational: return "RATIONAL";
    case ErrorLabel::PosteriorError: return "POSTERIOR_ERROR";
    case ErrorLabel::ReasoningError: return "REASONING_ERROR";
    case ErrorLabel::Excluded: return "EXCLUDED";
  }
  return "?";
}

constexpr bool is_irrational(ErrorLabel l) {
  return l == ErrorLabel::PosteriorError || l == ErrorLabel::ReasoningError;
}

/// How an irrational choice whose recovered confidence in the correct option
/// is exactly 50 is split.
enum class FiftyRule : std::uint8_t { PosteriorError, ReasoningError };

struct ClassifyOptions {
  FiftyRule at_fifty = FiftyRule::PosteriorError;
};

/// The option theory says to pick, or empty when the record is excluded from
/// analysis (uninformative boxes, or a ball-treatment neighbor who ignored
/// the ball).
inline std::optional<State> theoretically_correct(const TrialRecord& r) {
  validate_record(r);
  if (r.structure.uninformative()) return std::nullopt;
  if (r.condition == Condition::Individual) return rational_choice(r.structure, *r.ball);
  if (r.treatment == Treatment::Ball && *r.neighbor_guess != rational_choice(r.structure, *r.ball)) {
    return std::nullopt;
  }
  return r.neighbor_guess;
}

inline ErrorLabel classify_record(const TrialRecord& r, ClassifyOptions opt = {}) {
  const auto correct = theoretically_correct(r);
  if (!correct) return ErrorLabel::Excluded;
  if (r.choice == *correct) return ErrorLabel::Rational;
  const int confidence_in_correct = 100 - r.reported_posterior_pct;
  if (confidence_in_correct > 50) return ErrorLabel::ReasoningError;
  if (confidence_in_correct < 50) return ErrorLabel::PosteriorError;
  return opt.at_fifty == FiftyRule::PosteriorError ? ErrorLabel::PosteriorError
                                                   : ErrorLabel::ReasoningError;
}

/// Counts for one grouping cell; excluded records are not counted.
struct RateCell {
  long n = 0;
  long irrational = 0;
  long posterior_err = 0;
  long reasoning_err = 0;

  void add(ErrorLabel l) {
    if (l == ErrorLabel::Excluded) return;
    ++n;
    if (l == ErrorLabel::PosteriorError) ++posterior_err;
    if (l == ErrorLabel::ReasoningError) ++reasoning_err;
    if (is_irrational(l)) ++irrational;
  }

  static double share(long k, long n) { return n > 0 ? double(k) / double(n) : 0.0; }
  static double binomial_se(long k, long n) {
    if (n == 0) return 0.0;
    const double p = share(k, n);
    return std::sqrt(p * (1.0 - p) / double(n));
  }

  double rate() const { return share(irrational, n); }
  double rate_se() const { return binomial_se(irrational, n); }
  double posterior_rate() const { return share(posterior_err, n); }
  double reasoning_rate() const { return share(reasoning_err, n); }
};

struct RateTable {
  std::string name;
  std::vector<std::string> key_columns;
  std::map<std::vector<std::string>, RateCell> cells;

  RateCell& at(std::vector<std::string> key) { return cells[std::move(key)]; }
  const RateCell* find(const std::vector<std::string>& key) const {
    auto it = cells.find(key);
    return it == cells.end() ? nullptr : &it->second;
  }
};

/// Every tabulation used in the reports. Pool records are never counted.
struct RateTables {
  RateTable by_condition{"by_condition", {"condition"}, {}};
  RateTable by_subject{"by_subject", {"subject_id", "treatment", "condition"}, {}};
  RateTable by_treatment_condition{"by_treatment_condition", {"treatment", "condition"}, {}};
  /// Design structures, both signals pooled.
  RateTable by_structure{"by_structure", {"condition", "theta_x", "theta_y"}, {}};
  /// After canonicalization: signal White / guess X, structure over the full grid.
  RateTable by_canonical_signal{"by_canonical_signal", {"condition", "theta_x", "theta_y"}, {}};
  /// Between-subject cut: only each subject's first condition.
  RateTable between_subject{"between_subject", {"treatment", "condition"}, {}};

  std::vector<const RateTable*> all() const {
    return {&by_condition, &by_treatment_condition, &by_subject,
            &by_structure, &by_canonical_signal,   &between_subject};
  }
};

inline std::string theta_code(int balls) {
  return std::to_string(balls / 10) + "." + std::to_string(balls % 10);
}

inline RateTables rate_tables(const Panel& panel, ClassifyOptions opt = {}) {
  RateTables t;
  for (const auto& r : panel.records) {
    if (r.is_pool()) continue;
    const ErrorLabel label = classify_record(r, opt);
    const std::string cond = to_code(r.condition);
    const std::string treat = to_code(r.treatment);
    t.by_condition.at({cond}).add(label);
    t.by_subject.at({r.subject_id, treat, cond}).add(label);
    t.by_treatment_condition.at({treat, cond}).add(label);
    t.by_structure.at({cond, theta_code(r.structure.white_in_x), theta_code(r.structure.black_in_y)})
        .add(label);
    const TrialRecord canon = canonicalize(r);
    t.by_canonical_signal
        .at({cond, theta_code(canon.structure.white_in_x), theta_code(canon.structure.black_in_y)})
        .add(label);
    if (r.in_first_condition()) {
      t.between_subject.at({treat, cond}).add(label);
      t.between_subject.at({"ALL", cond}).add(label);
    }
  }
  return t;
}

/// Per-subject irrationality rates in both conditions, for subjects with at
/// least one classified record in each. `treatments` empty means all.
struct PairedSubjectRates {
  std::vector<std::string> subject_ids;
  std::vector<double> individual;
  std::vector<double> social;
};

inline PairedSubjectRates paired_subject_rates(const Panel& panel, ClassifyOptions opt = {},
                                               const std::set<Treatment>& treatments = {}) {
  std::map<std::string, std::pair<RateCell, RateCell>> cells;
  for (const auto& r : panel.records) {
    if (r.is_pool()) continue;
    if (!treatments.empty() && !treatments.count(r.treatment)) continue;
    auto& pair = cells[r.subject_id];
    (r.condition == Condition::Individual ? pair.first : pair.second).add(classify_record(r, opt));
  }
  PairedSubjectRates out;
  for (const auto& [id, pair] : cells) {
    if (pair.first.n == 0 || pair.second.n == 0) continue;
    out.subject_ids.push_back(id);
    out.individual.push_back(pair.first.rate());
    out.social.push_back(pair.second.rate());
  }
  return out;
}

}  // namespace obslearn
