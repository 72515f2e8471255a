#include "l1reg/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "l1reg/errors.hpp"

namespace l1reg {

namespace {

bool is_identity_like(const OperatorSpec& spec) {
  return std::holds_alternative<IdentityOp>(spec.kind()) || std::holds_alternative<EmbeddingOp>(spec.kind());
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

TikhonovProblem::TikhonovProblem(OperatorTruncation op, TruncatedSequence data, double p, double alpha,
                                 double elastic_eta)
    : op_(std::move(op)), data_(std::move(data)), p_(p), alpha_(alpha), elastic_eta_(elastic_eta) {
  require(std::isfinite(alpha_) && alpha_ > 0.0, "Tikhonov problem needs alpha > 0");
  require(std::isfinite(p_) && p_ >= 1.0, "Tikhonov problem needs p >= 1");
  require(std::isfinite(elastic_eta_) && elastic_eta_ >= 0.0, "Tikhonov problem needs elastic_eta >= 0");
  if (data_.size() != op_.size()) throw DimensionMismatch("Tikhonov problem data", op_.size(), data_.size());
  if (p_ == 1.0) {
    require(is_identity_like(op_.spec()) && op_.image_norm() == NormKind::L1,
            "p = 1 is only supported for the identity operator with l1 image norm");
    require(elastic_eta_ == 0.0, "p = 1 closed form does not support the elastic-net penalty");
  }
}

TikhonovProblem TikhonovProblem::with_alpha(double alpha) const {
  return TikhonovProblem(op_, data_, p_, alpha, elastic_eta_);
}

double objective_value(const TikhonovProblem& problem, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != problem.size())
    throw DimensionMismatch("objective_value", problem.size(), x.size());
  const Vector r = problem.op().apply(x) - problem.data().values();
  const double misfit = std::pow(norm(r, problem.op().image_norm()), problem.p()) / problem.p();
  return misfit + problem.l1_weight() * x.lpNorm<1>() + 0.5 * problem.l2_weight() * x.squaredNorm();
}

TruncatedSequence solve_identity_p1(const TruncatedSequence& y, double alpha) {
  require(std::isfinite(alpha) && alpha > 0.0, "solve_identity_p1: alpha must be positive");
  require(alpha != 1.0, "solve_identity_p1: alpha = 1 has no unique minimizer");
  if (alpha < 1.0) return y;
  return TruncatedSequence::zeros(y.size());
}

double optimality_violation(const TikhonovProblem& problem, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != problem.size())
    throw DimensionMismatch("optimality_violation", problem.size(), x.size());

  if (problem.is_identity_p1()) {
    // Subdifferential of |x_k - y_k| + alpha |x_k| is an interval; report its distance to 0.
    const Vector& y = problem.data().values();
    const double a = problem.alpha();
    double worst = 0.0;
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      const double d = x(k) - y(k);
      double lo = d != 0.0 ? sign(d) : -1.0;
      double hi = d != 0.0 ? sign(d) : 1.0;
      lo += x(k) != 0.0 ? a * sign(x(k)) : -a;
      hi += x(k) != 0.0 ? a * sign(x(k)) : a;
      worst = std::max({worst, lo, -hi});
    }
    return worst;
  }

  require(problem.op().image_norm() == NormKind::L2, "optimality certificate needs an l2 image norm");
  const Vector r = problem.op().apply(x) - problem.data().values();
  const double scale = problem.p() == 2.0 ? 1.0 : std::pow(r.norm(), problem.p() - 2.0);
  const Vector g = scale * problem.op().apply_adjoint(r) + problem.l2_weight() * x;
  const double lambda = problem.l1_weight();
  double worst = 0.0;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double v = x(k) == 0.0 ? std::abs(g(k)) - lambda : std::abs(g(k) + lambda * sign(x(k)));
    worst = std::max(worst, v);
  }
  return worst;
}

namespace {

class ProximalGradient {
 public:
  ProximalGradient(const TikhonovProblem& problem, const SolveOptions& options)
      : problem_(problem), options_(options), b_(problem.data().values()), p_(problem.p()),
        lambda1_(problem.l1_weight()), lambda2_(problem.l2_weight()) {}

  SolveResult run() {
    const auto n = static_cast<Eigen::Index>(problem_.size());
    Vector x = options_.warm_start ? *options_.warm_start : Vector::Zero(n);
    if (x.size() != n) throw DimensionMismatch("warm start", problem_.size(), x.size());

    const double op_norm = operator_norm_estimate(problem_.op(), 1e-3);
    Vector ax = problem_.op().apply(x);
    Vector atr = problem_.op().apply_adjoint(ax - b_);
    double step = 1.0 / (op_norm * op_norm * lipschitz_factor((ax - b_).norm()));
    double objective = misfit(ax - b_) + penalty(x);

    SolveDiagnostics diag;
    Vector y = x, ay = ax, atr_y = atr;
    Vector x_new(n), ax_new(n), r_new(n), d(n);
    double t = 1.0;
    bool momentum = false;

    for (std::size_t it = 1; it <= options_.max_iter; ++it) {
      diag.iterations = it;
      if (p_ > 2.0) step *= 1.25;

      const Vector r_y = ay - b_;
      const double f_y = misfit(r_y);
      const Vector g_y = gradient(r_y, atr_y);
      double f_new = 0.0;
      Vector atr_new(n);
      for (;;) {
        x_new = prox(y - step * g_y, step);
        ax_new.noalias() = problem_.op().matrix() * x_new;
        r_new = ax_new - b_;
        f_new = misfit(r_new);
        d = x_new - y;
        atr_new = problem_.op().apply_adjoint(r_new);
        if (sufficient_decrease(f_y, f_new, g_y, gradient(r_new, atr_new), d, ax_new - ay, step)) break;
        step *= 0.5;
        ++diag.backtracks;
        if (step < 1e-300) throw NonConvergence("proximal gradient: step size underflow");
      }

      const double objective_new = f_new + penalty(x_new);
      if (momentum && objective_new > objective + 1e-15 * std::abs(objective)) {
        // Function-value restart: drop momentum and redo the step from x.
        y = x;
        ay = ax;
        atr_y = atr;
        t = 1.0;
        momentum = false;
        ++diag.restarts;
        continue;
      }

      const double residual = (x_new - prox(x_new - step * gradient(r_new, atr_new), step)).norm();

      const double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      const double beta = (t - 1.0) / t_new;
      y = x_new + beta * (x_new - x);
      ay = ax_new + beta * (ax_new - ax);
      atr_y = atr_new + beta * (atr_new - atr);
      momentum = beta != 0.0;
      t = t_new;

      x.swap(x_new);
      ax.swap(ax_new);
      atr.swap(atr_new);
      objective = std::min(objective, objective_new);
      diag.residual = residual;

      if (options_.checkpoint_every > 0 && it % options_.checkpoint_every == 0)
        diag.checkpoints.push_back(objective);
      if (residual <= options_.tol) {
        diag.converged = true;
        break;
      }
    }
    diag.objective = objective_value(problem_, x);
    return SolveResult{TruncatedSequence(std::move(x)), std::move(diag)};
  }

 private:
  double misfit(const Vector& r) const {
    return p_ == 2.0 ? 0.5 * r.squaredNorm() : std::pow(r.norm(), p_) / p_;
  }

  double penalty(const Vector& x) const { return lambda1_ * x.lpNorm<1>() + 0.5 * lambda2_ * x.squaredNorm(); }

  Vector gradient(const Vector& r, const Vector& atr) const {
    if (p_ == 2.0) return atr;
    return std::pow(r.norm(), p_ - 2.0) * atr;
  }

  // Descent-lemma test. The function-value form cancels badly once steps are tiny, so the
  // quadratic case compares ||A d||^2 directly and the general case falls back to the
  // gradient Lipschitz bound.
  bool sufficient_decrease(double f_y, double f_new, const Vector& g_y, const Vector& g_new, const Vector& d,
                           const Vector& ad, double step) const {
    const double dd = d.squaredNorm();
    if (p_ == 2.0) return ad.squaredNorm() <= dd / step * (1.0 + 1e-12);
    const double model = f_y + g_y.dot(d) + dd / (2.0 * step);
    if (f_new <= model + 1e-15 * std::abs(f_y)) return true;
    return (g_new - g_y).norm() * step <= std::sqrt(dd);
  }

  // Local curvature of (1/p)||r||^p relative to p = 2.
  double lipschitz_factor(double residual_norm) const {
    if (p_ == 2.0) return 1.0;
    return std::max(1.0, (p_ - 1.0) * std::pow(residual_norm, p_ - 2.0));
  }

  Vector prox(const Vector& v, double step) const {
    Vector out = soft_threshold(v, step * lambda1_);
    if (lambda2_ > 0.0) out /= 1.0 + step * lambda2_;
    return out;
  }

  const TikhonovProblem& problem_;
  const SolveOptions& options_;
  const Vector& b_;
  double p_;
  double lambda1_;
  double lambda2_;
};

}  // namespace

SolveResult solve_tikhonov(const TikhonovProblem& problem, const SolveOptions& options) {
  require(options.tol > 0.0, "solve_tikhonov: tol must be positive");
  require(options.max_iter >= 1, "solve_tikhonov: max_iter must be >= 1");

  if (problem.is_identity_p1()) {
    TruncatedSequence x = solve_identity_p1(problem.data(), problem.alpha());
    SolveDiagnostics diag;
    diag.converged = true;
    diag.objective = objective_value(problem, x);
    return SolveResult{std::move(x), std::move(diag)};
  }
  require(problem.p() >= 2.0, fmt::format("solve_tikhonov: p = {} is unsupported (need p = 1 or p >= 2)", problem.p()));
  require(problem.op().image_norm() == NormKind::L2, "solve_tikhonov: iterative path needs an l2 image norm");
  return ProximalGradient(problem, options).run();
}

TruncatedSequence brute_force_oracle(const TikhonovProblem& problem, double grid_half_width,
                                     std::size_t grid_points) {
  const std::size_t n = problem.size();
  require(n <= 3, "brute_force_oracle: dimension must be <= 3");
  require(grid_points >= 1 && grid_points <= 401, "brute_force_oracle: grid_points must be in [1, 401]");
  require(grid_half_width > 0.0, "brute_force_oracle: grid half width must be positive");
  require(problem.p() == 2.0 && problem.op().image_norm() == NormKind::L2,
          "brute_force_oracle: needs p = 2 with l2 image norm");

  std::vector<double> axis(grid_points, 0.0);
  if (grid_points > 1)
    for (std::size_t i = 0; i < grid_points; ++i)
      axis[i] = -grid_half_width + 2.0 * grid_half_width * static_cast<double>(i) /
                                       static_cast<double>(grid_points - 1);

  const Eigen::MatrixXd a = problem.op().dense();
  const Vector& y = problem.data().values();
  const auto eval = [&](const Vector& x) {
    return 0.5 * (a * x - y).squaredNorm() + problem.l1_weight() * x.lpNorm<1>() +
           0.5 * problem.l2_weight() * x.squaredNorm();
  };

  Vector best = Vector::Zero(static_cast<Eigen::Index>(n));
  double best_value = std::numeric_limits<double>::infinity();
  Vector candidate(static_cast<Eigen::Index>(n));
  std::vector<std::size_t> idx(n, 0);
  for (bool done = false; !done;) {
    for (std::size_t j = 0; j < n; ++j) candidate(static_cast<Eigen::Index>(j)) = axis[idx[j]];
    const double value = eval(candidate);
    // Ties: smaller l1 norm, then the lexicographically first point (enumeration order).
    if (value < best_value || (value == best_value && candidate.lpNorm<1>() < best.lpNorm<1>())) {
      best_value = value;
      best = candidate;
    }
    for (std::size_t j = n;;) {
      if (j == 0) {
        done = true;
        break;
      }
      --j;
      if (++idx[j] < grid_points) break;
      idx[j] = 0;
    }
  }

  // Exact coordinate minimization: soft-thresholding of the partial residual correlation.
  Vector x = best;
  const Vector col_sq = a.colwise().squaredNorm();
  for (int sweep = 0; sweep < 100000; ++sweep) {
    double change = 0.0;
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(n); ++j) {
      const Vector r = y - a * x + a.col(j) * x(j);
      const double rho = a.col(j).dot(r);
      const double lambda = problem.l1_weight();
      const double shrunk = std::abs(rho) > lambda ? std::copysign(std::abs(rho) - lambda, rho) : 0.0;
      const double updated = shrunk / (col_sq(j) + problem.l2_weight());
      change = std::max(change, std::abs(updated - x(j)));
      x(j) = updated;
    }
    if (change <= 1e-15 * (1.0 + x.lpNorm<Eigen::Infinity>())) break;
  }
  return TruncatedSequence(std::move(x));
}

}  // namespace l1reg
