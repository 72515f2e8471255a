#pragma once

// Convergence-rate studies: synthesize y^delta with ||y - y^delta|| = delta,
// pick alpha by a parameter rule, solve, and fit the log-log slope of the l1
// reconstruction error against delta.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "l1reg/parameter_choice.hpp"
#include "l1reg/solver.hpp"
#include "l1reg/source_conditions.hpp"

namespace l1reg {

/// y + delta * e / ||e||, e standard normal from `seed`; a zero draw is retried with seed + 1.
TruncatedSequence generate_noisy_data(const TruncatedSequence& y, double delta, NormKind image_norm,
                                      std::uint64_t seed);

/// Seed of record (delta_index, rep) derived from the master seed (splitmix64).
std::uint64_t derive_seed(std::uint64_t master, std::size_t delta_index, std::size_t rep);

using RateRule = std::variant<SDPRule, APrioriRule>;

struct RateStudyConfig {
  OperatorSpec op_spec = OperatorSpec::identity();
  std::size_t n = 100;
  NormKind image_norm = NormKind::L2;
  SequenceModel model = SequenceModel::sparse({1}, {1.0});
  std::vector<double> deltas = default_delta_grid();
  double p = 2.0;
  double elastic_eta = 0.0;
  RateRule rule = SDPRule{};
  std::uint64_t master_seed = 20180101;
  std::size_t repetitions = 5;
  double tol = 1e-10;
  std::size_t max_iter = 100000;
  std::size_t jobs = 1;
  /// gamma_n used for the predicted exponent; none skips the prediction.
  std::optional<GammaSequence> gamma;
  /// Reject the study when tail_sum(model, n) > 0.01 * min(delta) instead of only reporting it.
  bool strict_truncation = false;

  /// 10^-1, 10^-1.5, ..., 10^-4.
  static std::vector<double> default_delta_grid();

  void validate() const;
};

enum class FailureKind { None, NonConvergence, DiscrepancyUnreachable, Other };

struct RateRecord {
  std::size_t delta_index = 0;
  std::size_t rep = 0;
  double delta = 0.0;
  std::uint64_t seed = 0;
  double alpha = 0.0;
  double discrepancy = 0.0;
  double error_l1 = 0.0;
  bool converged = false;
  SDPFlag sdp_flag = SDPFlag::None;
  bool failed = false;
  FailureKind failure_kind = FailureKind::None;
  std::string failure;
  /// Largest optimality violation over every solve made for this record.
  double max_violation = 0.0;
  std::size_t solves = 0;
};

struct RateStudy {
  std::vector<RateRecord> records;  // ordered by (delta_index, rep)
  double slope = 0.0;
  double slope_stderr = 0.0;
  std::optional<double> predicted_exponent;
  std::size_t n_failed = 0;
  bool valid = false;
  double truncation_tail = 0.0;
  bool truncation_ok = false;

  /// Median l1 error per delta over successful records (NaN when none succeeded).
  std::vector<double> median_errors(std::size_t n_deltas) const;
};

RateStudy run_rate_study(const RateStudyConfig& config);

struct SlopeFit {
  double slope;
  double stderr_;
};

/// Ordinary least squares of log(error) on log(delta); needs >= 3 positive pairs.
SlopeFit fit_loglog_slope(const std::vector<std::pair<double, double>>& pairs);

/// Slope of log phi(t) against log t over a decreasing grid in (0, 1) with >= 4 points.
double predicted_exponent(const SmoothnessProfile& profile, const std::vector<double>& t_grid);

void write_records_csv(std::ostream& out, const RateStudy& study);
void write_summary_csv(std::ostream& out, const RateStudy& study);
/// Two whitespace-separated columns: delta and median l1 error.
void write_loglog_data(std::ostream& out, const RateStudy& study, const std::vector<double>& deltas);

}  // namespace l1reg
