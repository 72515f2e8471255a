#pragma once

// Regularization parameter rules: the a priori choice alpha = delta^p / phi(delta)
// and the sequential discrepancy principle on the grid alpha_j = q^j alpha_0.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "l1reg/index_function.hpp"
#include "l1reg/solver.hpp"

namespace l1reg {

class APrioriRule {
 public:
  /// Checks phi(0) = 0 and that phi is strictly increasing and midpoint-concave
  /// on a log-spaced sample grid in [1e-8, 1].
  APrioriRule(double p, IndexFunction phi);

  double p() const { return p_; }
  const IndexFunction& phi() const { return phi_; }

 private:
  double p_;
  IndexFunction phi_;
};

double alpha_a_priori(const APrioriRule& rule, double delta);

struct RegularizationPropertyCheck {
  bool alpha_decreasing = false;
  bool ratio_decreasing = false;  // delta^p / alpha(delta) = phi(delta)
  double last_alpha = 0.0;
  double last_ratio = 0.0;

  bool holds() const { return alpha_decreasing && ratio_decreasing; }
};

/// Evaluates the a priori rule along a strictly decreasing delta grid.
RegularizationPropertyCheck check_regularization_property(const APrioriRule& rule,
                                                          const std::vector<double>& deltas);

struct SDPRule {
  double tau = 1.5;
  double q = 0.5;
  std::optional<double> alpha0;  // default: twice the smallest weight giving x = 0
  std::size_t j_max = 60;

  void validate() const;
};

enum class SDPFlag { None, LeftBracketMissing };
std::string to_string(SDPFlag flag);

struct SDPStep {
  std::size_t j;
  double alpha;
  double discrepancy;
  double optimality_violation;
  bool converged;
};

struct SDPResult {
  double alpha;
  std::size_t j;
  SDPFlag flag;
  double alpha0;
  /// Steps j = 0..selected, j = 0 being alpha_0.
  std::vector<SDPStep> trace;
  SolveResult solution;
};

/// Weight above which x = 0 minimizes the functional for the given data, times two.
double default_alpha0(const TikhonovProblem& problem);

/// ||A x - y^delta|| in the problem's image norm.
double discrepancy(const TikhonovProblem& problem, const Vector& x);

/// Walks alpha_j = q^j alpha_0 (j = 1, 2, ...) until the discrepancy drops to
/// tau * delta, warm-starting each solve at the previous minimizer. The alpha
/// in `base` is ignored. Throws DiscrepancyUnreachable after j_max steps and
/// NonConvergence if a solve along the grid fails.
SDPResult alpha_sdp(const SDPRule& rule, const TikhonovProblem& base, double delta,
                    const SolveOptions& options = {});

}  // namespace l1reg
