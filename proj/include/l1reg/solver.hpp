#pragma once

// Minimizers of the l1-penalized Tikhonov functional
//
//   (1/p) ||A x - y||^p + alpha ||x||_1                      (elastic_eta == 0)
//   (1/p) ||A x - y||^p + alpha (1/2 ||x||_2^2 + eta ||x||_1)   (elastic_eta > 0)
//
// at finite truncation. p >= 2 with an l2 image norm runs accelerated
// proximal gradient; p == 1 with the identity operator and l1 image norm has a
// closed form. p in (1, 2) is not supported.

#include <cstddef>
#include <optional>
#include <vector>

#include "l1reg/operators.hpp"
#include "l1reg/sequences.hpp"

namespace l1reg {

class TikhonovProblem {
 public:
  TikhonovProblem(OperatorTruncation op, TruncatedSequence data, double p, double alpha,
                  double elastic_eta = 0.0);

  const OperatorTruncation& op() const { return op_; }
  const TruncatedSequence& data() const { return data_; }
  double p() const { return p_; }
  double alpha() const { return alpha_; }
  double elastic_eta() const { return elastic_eta_; }
  std::size_t size() const { return op_.size(); }

  /// Same problem with a different penalty weight.
  TikhonovProblem with_alpha(double alpha) const;

  /// Weight of the l1 term and of the (1/2)||x||^2 term in the penalty.
  double l1_weight() const { return elastic_eta_ > 0.0 ? alpha_ * elastic_eta_ : alpha_; }
  double l2_weight() const { return elastic_eta_ > 0.0 ? alpha_ : 0.0; }

  bool is_identity_p1() const { return p_ == 1.0; }

 private:
  OperatorTruncation op_;
  TruncatedSequence data_;
  double p_;
  double alpha_;
  double elastic_eta_;
};

struct SolveOptions {
  double tol = 1e-10;
  std::size_t max_iter = 100000;
  std::optional<Vector> warm_start;
  std::size_t checkpoint_every = 100;
};

struct SolveDiagnostics {
  std::size_t iterations = 0;
  double objective = 0.0;
  /// ||x - prox(x - s grad(x))||_2 at the returned iterate.
  double residual = 0.0;
  bool converged = false;
  std::size_t restarts = 0;
  std::size_t backtracks = 0;
  /// Objective sampled every checkpoint_every iterations (nonincreasing).
  std::vector<double> checkpoints;
};

struct SolveResult {
  TruncatedSequence x;
  SolveDiagnostics diagnostics;
};

/// Minimizes the functional. Non-convergence within max_iter is reported
/// through diagnostics.converged == false with the best iterate returned.
SolveResult solve_tikhonov(const TikhonovProblem& problem, const SolveOptions& options = {});

/// Componentwise minimizer of |x_k - y_k| + alpha |x_k|: y if alpha < 1, 0 if alpha > 1.
TruncatedSequence solve_identity_p1(const TruncatedSequence& y, double alpha);

/// Exhaustive grid search over [-w, w]^N (N <= 3, p == 2) followed by exact
/// coordinate-descent refinement from the best grid point.
TruncatedSequence brute_force_oracle(const TikhonovProblem& problem, double grid_half_width,
                                     std::size_t grid_points);

double objective_value(const TikhonovProblem& problem, const Vector& x);
inline double objective_value(const TikhonovProblem& problem, const TruncatedSequence& x) {
  return objective_value(problem, x.values());
}

/// Largest violation of the first-order optimality condition at x:
/// |g_k| <= lambda where x_k == 0 and g_k == -lambda sign(x_k) elsewhere, with
/// g the gradient of the smooth part and lambda the l1 weight.
double optimality_violation(const TikhonovProblem& problem, const Vector& x);

}  // namespace l1reg
