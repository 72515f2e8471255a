#include "l1reg/parameter_choice.hpp"

#include <cmath>

#include <fmt/format.h>

#include "l1reg/errors.hpp"

namespace l1reg {

IndexFunction power_index_function(double exponent, double factor) {
  require(exponent > 0.0 && exponent <= 1.0, "power index function needs exponent in (0, 1]");
  require(factor > 0.0, "power index function needs a positive factor");
  return IndexFunction{fmt::format("{}*t^{}", factor, exponent),
                       [exponent, factor](double t) { return factor * std::pow(t, exponent); }};
}

std::vector<double> log_grid(double lo, double hi, std::size_t points) {
  require(lo > 0.0 && hi > lo && points >= 2, "log_grid: need 0 < lo < hi and at least two points");
  std::vector<double> grid(points);
  const double a = std::log10(lo), b = std::log10(hi);
  for (std::size_t i = 0; i < points; ++i)
    grid[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1));
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

ShapeCheck check_shape(const IndexFunction& phi, const std::vector<double>& grid) {
  ShapeCheck check;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double a = grid[i - 1], b = grid[i];
    const double va = phi(a), vb = phi(b);
    const bool up = vb > va;
    const bool concave = phi(0.5 * (a + b)) >= 0.5 * (va + vb) - 1e-12 * std::abs(vb);
    if ((!up || !concave) && check.holds()) check.first_failure = b;
    check.increasing = check.increasing && up;
    check.midpoint_concave = check.midpoint_concave && concave;
  }
  return check;
}

APrioriRule::APrioriRule(double p, IndexFunction phi) : p_(p), phi_(std::move(phi)) {
  require(std::isfinite(p_) && p_ >= 1.0, "a priori rule needs p >= 1");
  require(static_cast<bool>(phi_.eval), "a priori rule needs an index function");

  const double at_one = phi_(1.0);
  require(std::abs(phi_(0.0)) <= 1e-14 * std::abs(at_one), fmt::format("index function {}: phi(0) != 0", phi_.name));

  const ShapeCheck shape = check_shape(phi_, log_grid(1e-8, 1.0, 200));
  require(shape.increasing,
          fmt::format("index function {} is not strictly increasing near t = {}", phi_.name, shape.first_failure));
  require(shape.midpoint_concave, fmt::format("index function {} fails the midpoint concavity test near t = {}",
                                              phi_.name, shape.first_failure));
}

double alpha_a_priori(const APrioriRule& rule, double delta) {
  require(std::isfinite(delta) && delta > 0.0, "alpha_a_priori: delta must be positive");
  const double phi = rule.phi()(delta);
  require(phi > 0.0, "alpha_a_priori: phi(delta) = 0");
  return std::pow(delta, rule.p()) / phi;
}

RegularizationPropertyCheck check_regularization_property(const APrioriRule& rule,
                                                          const std::vector<double>& deltas) {
  require(deltas.size() >= 2, "regularization property check needs at least two deltas");
  RegularizationPropertyCheck check;
  check.alpha_decreasing = true;
  check.ratio_decreasing = true;
  double prev_alpha = 0.0, prev_ratio = 0.0;
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    require(i == 0 || deltas[i] < deltas[i - 1], "regularization property check needs decreasing deltas");
    const double alpha = alpha_a_priori(rule, deltas[i]);
    const double ratio = std::pow(deltas[i], rule.p()) / alpha;
    if (i > 0) {
      check.alpha_decreasing = check.alpha_decreasing && alpha < prev_alpha;
      check.ratio_decreasing = check.ratio_decreasing && ratio < prev_ratio;
    }
    prev_alpha = alpha;
    prev_ratio = ratio;
  }
  check.last_alpha = prev_alpha;
  check.last_ratio = prev_ratio;
  return check;
}

void SDPRule::validate() const {
  require(std::isfinite(tau) && tau > 1.0, "SDP rule needs tau > 1");
  require(q > 0.0 && q < 1.0, "SDP rule needs 0 < q < 1");
  require(!alpha0 || (std::isfinite(*alpha0) && *alpha0 > 0.0), "SDP rule needs alpha0 > 0");
  require(j_max >= 1, "SDP rule needs j_max >= 1");
}

std::string to_string(SDPFlag flag) {
  return flag == SDPFlag::None ? "ok" : "left-bracket-missing";
}

double default_alpha0(const TikhonovProblem& problem) {
  const Vector& y = problem.data().values();
  double threshold = 0.0;
  if (problem.is_identity_p1()) {
    // x = 0 for every alpha > 1; pi keeps the grid q^j alpha_0 off the non-unique point alpha = 1.
    return 3.14159265358979323846;
  } else {
    threshold = problem.op().apply_adjoint(y).lpNorm<Eigen::Infinity>();
    if (problem.p() != 2.0) threshold *= std::pow(y.norm(), problem.p() - 2.0);
    if (problem.elastic_eta() > 0.0) threshold /= problem.elastic_eta();
  }
  return threshold > 0.0 ? 2.0 * threshold : 1.0;
}

double discrepancy(const TikhonovProblem& problem, const Vector& x) {
  return norm(problem.op().apply(x) - problem.data().values(), problem.op().image_norm());
}

SDPResult alpha_sdp(const SDPRule& rule, const TikhonovProblem& base, double delta, const SolveOptions& options) {
  rule.validate();
  require(std::isfinite(delta) && delta > 0.0, "alpha_sdp: delta must be positive");

  const double alpha0 = rule.alpha0.value_or(default_alpha0(base));
  const double target = rule.tau * delta;

  SolveOptions opts = options;
  const auto solve_at = [&](std::size_t j, double alpha) {
    TikhonovProblem problem = base.with_alpha(alpha);
    SolveResult result = solve_tikhonov(problem, opts);
    if (!result.diagnostics.converged)
      throw NonConvergence(fmt::format("alpha_sdp: solve at alpha_{} = {:.6g} did not converge (residual {:.3g})",
                                       j, alpha, result.diagnostics.residual));
    SDPStep step{j, alpha, discrepancy(problem, result.x.values()),
                 optimality_violation(problem, result.x.values()), result.diagnostics.converged};
    opts.warm_start = result.x.values();
    return std::make_pair(step, std::move(result));
  };

  std::vector<SDPStep> trace;
  auto [step0, sol0] = solve_at(0, alpha0);
  trace.push_back(step0);
  const bool left_ok = step0.discrepancy > target;

  double alpha = alpha0;
  for (std::size_t j = 1; j <= rule.j_max; ++j) {
    alpha *= rule.q;
    auto [step, sol] = solve_at(j, alpha);
    trace.push_back(step);
    if (step.discrepancy <= target) {
      return SDPResult{alpha, j, left_ok ? SDPFlag::None : SDPFlag::LeftBracketMissing, alpha0, std::move(trace),
                       std::move(sol)};
    }
  }
  throw DiscrepancyUnreachable(fmt::format(
      "alpha_sdp: discrepancy {:.6g} still above tau*delta = {:.6g} after {} grid steps (delta too small for "
      "the data, or tau too tight)",
      trace.back().discrepancy, target, rule.j_max));
}

}  // namespace l1reg
