#include "l1reg/source_conditions.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "l1reg/errors.hpp"

namespace l1reg {

namespace {

void signed_sup_search(const std::vector<TruncatedSequence>& sources, std::size_t k, std::size_t n, Vector& acc,
                       NormKind dual_norm, double& best) {
  if (k == n) {
    best = std::max(best, norm(acc, dual_norm));
    return;
  }
  const Vector& f = sources[k].values();
  signed_sup_search(sources, k + 1, n, acc, dual_norm, best);
  acc += f;
  signed_sup_search(sources, k + 1, n, acc, dual_norm, best);
  acc -= 2.0 * f;
  signed_sup_search(sources, k + 1, n, acc, dual_norm, best);
  acc += f;
}

}  // namespace

double gamma_from_sources(const std::vector<TruncatedSequence>& sources, std::size_t n, GammaMode mode,
                          NormKind dual_norm) {
  require(n >= 1 && n <= sources.size(), "gamma_from_sources: need 1 <= n <= number of sources");
  const std::size_t dim = sources.front().size();
  for (std::size_t k = 0; k < n; ++k)
    if (sources[k].size() != dim) throw DimensionMismatch("gamma_from_sources", dim, sources[k].size());

  if (mode == GammaMode::Sum) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += norm(sources[k], dual_norm);
    return s;
  }
  require(n <= kMaxSignedSupTerms,
          fmt::format("gamma_from_sources: signed-sup enumeration limited to n <= {}", kMaxSignedSupTerms));
  Vector acc = Vector::Zero(static_cast<Eigen::Index>(dim));
  double best = 0.0;
  signed_sup_search(sources, 0, n, acc, dual_norm, best);
  return best;
}

std::vector<TruncatedSequence> canonical_sources(const OperatorSpec& spec, std::size_t count, std::size_t dim) {
  require(count >= 1 && count <= dim, "canonical_sources: need 1 <= count <= dim");
  std::vector<TruncatedSequence> out;
  out.reserve(count);
  for (std::size_t k = 1; k <= count; ++k) {
    double scale = 1.0;
    if (const auto* d = std::get_if<DiagonalOp>(&spec.kind())) {
      scale = 1.0 / d->sigma(k);
    } else if (!std::holds_alternative<IdentityOp>(spec.kind()) && !std::holds_alternative<EmbeddingOp>(spec.kind())) {
      throw InvalidArgument("canonical_sources: no explicit source elements for operator " + spec.kind_name());
    }
    Vector f = Vector::Zero(static_cast<Eigen::Index>(dim));
    f(static_cast<Eigen::Index>(k - 1)) = scale;
    out.emplace_back(std::move(f));
  }
  return out;
}

GammaSequence linear_gamma(double factor) {
  require(factor > 0.0, "linear_gamma: factor must be positive");
  return GammaSequence{fmt::format("{}*n", factor), [factor](std::size_t n) { return factor * static_cast<double>(n); }};
}

GammaSequence constant_gamma(double value) {
  require(value > 0.0, "constant_gamma: value must be positive");
  return GammaSequence{fmt::format("{}", value), [value](std::size_t) { return value; }};
}

GammaSequence tabulated_gamma(std::vector<double> values) {
  require(!values.empty(), "tabulated_gamma: empty table");
  auto table = std::make_shared<const std::vector<double>>(std::move(values));
  return GammaSequence{"tabulated", [table](std::size_t n) {
                         require(n >= 1 && n <= table->size(), "tabulated_gamma: n outside the table");
                         return (*table)[n - 1];
                       }};
}

SmoothnessProfile::SmoothnessProfile(std::vector<double> tail, std::vector<double> gamma, std::string name)
    : tail_(std::move(tail)), gamma_(std::move(gamma)), name_(std::move(name)) {
  require(!tail_.empty() && tail_.size() == gamma_.size(), "smoothness profile: tail and gamma tables must match");
  for (std::size_t i = 0; i < tail_.size(); ++i) {
    require(std::isfinite(tail_[i]) && tail_[i] >= 0.0, "smoothness profile: tail must be nonnegative");
    require(std::isfinite(gamma_[i]) && gamma_[i] > 0.0, "smoothness profile: gamma must be positive");
    if (i > 0) {
      require(tail_[i] <= tail_[i - 1], "smoothness profile: tail must be nonincreasing");
      require(gamma_[i] >= gamma_[i - 1], "smoothness profile: gamma must be nondecreasing");
    }
  }
}

SmoothnessProfile SmoothnessProfile::from_model(const SequenceModel& model, const GammaSequence& gamma,
                                                std::size_t n_max) {
  require(n_max >= 1, "smoothness profile: n_max must be >= 1");
  std::vector<double> tail(n_max), g(n_max);
  tail[n_max - 1] = tail_sum(model, n_max);
  for (std::size_t n = n_max - 1; n >= 1; --n) tail[n - 1] = tail[n] + std::abs(model.coordinate(n + 1));
  for (std::size_t n = 1; n <= n_max; ++n) g[n - 1] = gamma.eval(n);
  return SmoothnessProfile(std::move(tail), std::move(g), model.describe() + ", gamma=" + gamma.name);
}

SmoothnessProfile SmoothnessProfile::from_truncation(const TruncatedSequence& x, const GammaSequence& gamma,
                                                     std::size_t n_max) {
  if (n_max == 0) n_max = x.size();
  std::vector<double> tail(n_max, 0.0), g(n_max);
  double acc = 0.0;
  for (std::size_t k = x.size(); k >= 2; --k) {
    acc += std::abs(x.coord(k));
    if (k - 1 <= n_max) tail[k - 2] = acc;
  }
  for (std::size_t n = 1; n <= n_max; ++n) g[n - 1] = gamma.eval(n);
  return SmoothnessProfile(std::move(tail), std::move(g), "truncated, gamma=" + gamma.name);
}

PhiValue phi_eval(const SmoothnessProfile& profile, double t) {
  require(std::isfinite(t) && t >= 0.0, "phi_eval: t must be nonnegative");
  PhiValue best{std::numeric_limits<double>::infinity(), 1};
  for (std::size_t n = 1; n <= profile.n_max(); ++n) {
    const double v = profile.tail(n) + profile.gamma(n) * t;
    if (v < best.value) best = PhiValue{v, n};
  }
  best.value *= 2.0;
  return best;
}

IndexFunction as_index_function(const SmoothnessProfile& profile) {
  auto shared = std::make_shared<const SmoothnessProfile>(profile);
  return IndexFunction{"phi[" + profile.name() + "]", [shared](double t) { return phi_eval(*shared, t).value; }};
}

Property1Witness property1_witness_bidiagonal(const std::vector<double>& xi_head, double mu, WitnessTail tail,
                                              std::size_t truncation) {
  const std::size_t n = xi_head.size();
  require(n >= 1, "witness: xi head must be nonempty");
  require(truncation >= n, "witness: truncation must be >= n");
  for (double v : xi_head) require(std::isfinite(v) && std::abs(v) <= 1.0, "witness: xi entries must lie in [-1, 1]");
  require(mu >= 0.0 && mu < 1.0, "witness: mu must lie in [0, 1)");
  require(tail == WitnessTail::Alternating || mu > 0.0, "witness: decaying tail needs mu > 0");

  Vector eta = Vector::Zero(static_cast<Eigen::Index>(truncation));
  eta(0) = xi_head[0];
  for (std::size_t k = 1; k < n; ++k) eta(static_cast<Eigen::Index>(k)) = xi_head[k] - eta(static_cast<Eigen::Index>(k - 1));

  const double last = eta(static_cast<Eigen::Index>(n - 1));
  for (std::size_t i = 1; n + i <= truncation; ++i) {
    const double alternating = (i % 2 == 0) ? last : -last;
    double value = alternating;
    if (tail == WitnessTail::Decaying) {
      // Smallest magnitude inside [alternating - i mu, alternating + i mu].
      const double shrink = std::abs(last) - static_cast<double>(i) * mu;
      value = shrink > 0.0 ? std::copysign(shrink, alternating) : 0.0;
    }
    eta(static_cast<Eigen::Index>(n + i - 1)) = value;
  }
  return Property1Witness{TruncatedSequence(std::move(eta)), n, mu, xi_head, static_cast<double>(n)};
}

Property1Witness property1_witness_closed_form(const OperatorSpec& spec, const std::vector<double>& xi_head,
                                               std::size_t truncation) {
  const std::size_t n = xi_head.size();
  require(n >= 1 && truncation >= n, "witness: need 1 <= n <= truncation");
  for (double v : xi_head) require(std::isfinite(v) && std::abs(v) <= 1.0, "witness: xi entries must lie in [-1, 1]");
  const auto sources = canonical_sources(spec, n, truncation);
  Vector eta = Vector::Zero(static_cast<Eigen::Index>(truncation));
  double bound_sq = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    eta += xi_head[k] * sources[k].values();
    bound_sq += sources[k].values().squaredNorm();
  }
  return Property1Witness{TruncatedSequence(std::move(eta)), n, 0.0, xi_head, std::sqrt(bound_sq)};
}

WitnessCertificate certify_witness(const OperatorTruncation& op, const Property1Witness& witness, double tol) {
  const Vector image = op.apply_adjoint(witness.eta.values());
  WitnessCertificate c{0.0, 0.0, norm(witness.eta, NormKind::Sup), false, false, false};
  for (std::size_t k = 0; k < witness.n; ++k)
    c.head_error = std::max(c.head_error, std::abs(image(static_cast<Eigen::Index>(k)) - witness.xi_head[k]));
  for (auto k = static_cast<Eigen::Index>(witness.n); k < image.size(); ++k)
    c.tail_max = std::max(c.tail_max, std::abs(image(k)));
  c.head_ok = c.head_error <= tol;
  c.tail_ok = c.tail_max <= witness.mu + tol;
  c.norm_ok = c.eta_sup <= witness.gamma_bound;
  return c;
}

VscReport vsc_check(const OperatorTruncation& op, const TruncatedSequence& x_true, const SmoothnessProfile& profile,
                    double beta, std::size_t samples, std::uint64_t seed) {
  require(beta > 0.0 && beta <= 1.0, "vsc_check: beta must lie in (0, 1]");
  if (x_true.size() != op.size()) throw DimensionMismatch("vsc_check", op.size(), x_true.size());

  const auto n = static_cast<Eigen::Index>(op.size());
  const Vector& xt = x_true.values();
  const Vector axt = op.apply(xt);
  const double xt_l1 = xt.lpNorm<1>();
  const double scale = std::max(1.0, xt.lpNorm<Eigen::Infinity>());

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform;
  std::uniform_int_distribution<Eigen::Index> index(0, n - 1);
  const auto log_scale = [&](double lo, double hi) { return std::pow(10.0, lo + (hi - lo) * uniform(rng)); };

  VscReport report;
  report.samples = samples;
  report.worst_margin = -std::numeric_limits<double>::infinity();
  Vector x(n);
  for (std::size_t s = 0; s < samples; ++s) {
    switch (s % 6) {
      case 0:  // dense perturbation of x_true
        x = xt;
        for (Eigen::Index i = 0; i < n; ++i) x(i) += log_scale(-8, 0) * scale * normal(rng);
        break;
      case 1: {  // few-coordinate perturbation of x_true
        x = xt;
        const double eps = log_scale(-8, 0) * scale;
        for (int j = 0; j < 3; ++j) x(index(rng)) += eps * normal(rng);
        break;
      }
      case 2: {  // sparse vector
        x.setZero();
        const double amp = log_scale(-3, 1) * scale;
        for (int j = 0; j < 5; ++j) x(index(rng)) = amp * normal(rng);
        break;
      }
      case 3:  // dense Gaussian
        x = log_scale(-3, 1) * scale * Vector::NullaryExpr(n, [&] { return normal(rng); });
        break;
      case 4: {  // shrink a head of x_true toward zero (drives ||x|| - ||x†|| negative)
        x = xt;
        const Eigen::Index m = 1 + index(rng);
        const double eps = log_scale(-8, 0);
        for (Eigen::Index i = 0; i < m; ++i) x(i) -= eps * std::copysign(std::abs(xt(i)) + 1e-3 * scale, xt(i));
        break;
      }
      default:  // uniform contraction of x_true
        x = (1.0 - log_scale(-8, 0)) * xt;
        break;
    }
    const double lhs = beta * (x - xt).lpNorm<1>();
    const double phi = phi_eval(profile, norm(op.apply(x) - axt, op.image_norm())).value;
    const double x_l1 = x.lpNorm<1>();
    const double rhs = x_l1 - xt_l1 + phi;
    const double margin = lhs - rhs;
    report.worst_margin = std::max(report.worst_margin, margin);
    if (margin > 1e-12 * (1.0 + x_l1 + xt_l1 + phi)) ++report.violations;
  }
  return report;
}

FirstLemmaResult firstlemma_check(const TruncatedSequence& x, const TruncatedSequence& x_true, std::size_t n) {
  if (x.size() != x_true.size()) throw DimensionMismatch("firstlemma_check", x_true.size(), x.size());
  require(n >= 1 && n <= x.size(), "firstlemma_check: need 1 <= n <= dimension");
  const Vector& a = x.values();
  const Vector& b = x_true.values();
  const auto head = static_cast<Eigen::Index>(n);
  const double tail = b.tail(b.size() - head).lpNorm<1>();
  const double head_diff = (a.head(head) - b.head(head)).lpNorm<1>();
  const double lhs = (a - b).lpNorm<1>();
  const double rhs = a.lpNorm<1>() - b.lpNorm<1>() + 2.0 * (tail + head_diff);
  const double slack = 1e-12 * (1.0 + a.lpNorm<1>() + b.lpNorm<1>());
  return FirstLemmaResult{lhs, rhs, lhs <= rhs + slack};
}

}  // namespace l1reg
