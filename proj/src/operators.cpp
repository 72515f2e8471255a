#include "l1reg/operators.hpp"

#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "l1reg/errors.hpp"

namespace l1reg {

double DiagonalOp::sigma(std::size_t k) const {
  if (!values.empty()) {
    require(k >= 1 && k <= values.size(), "diagonal operator: no singular value listed for index");
    return values[k - 1];
  }
  return scale * std::pow(static_cast<double>(k), -exponent);
}

OperatorSpec::OperatorSpec(Kind kind, std::string label) : kind_(std::move(kind)), label_(std::move(label)) {
  if (label_.empty()) label_ = kind_name();
  validate();
}

OperatorSpec OperatorSpec::diagonal_power(double scale, double exponent) {
  return OperatorSpec(DiagonalOp{scale, exponent, {}});
}

OperatorSpec OperatorSpec::diagonal_values(std::vector<double> sigma) {
  DiagonalOp d;
  d.values = std::move(sigma);
  return OperatorSpec(std::move(d));
}

std::string OperatorSpec::kind_name() const {
  struct Namer {
    std::string operator()(const IdentityOp&) const { return "identity"; }
    std::string operator()(const EmbeddingOp&) const { return "embedding"; }
    std::string operator()(const BidiagonalSumOp&) const { return "bidiagonal_sum"; }
    std::string operator()(const FirstRowSummationOp&) const { return "first_row_summation"; }
    std::string operator()(const DiagonalOp&) const { return "diagonal"; }
  };
  return std::visit(Namer{}, kind_);
}

void OperatorSpec::validate() const {
  if (const auto* e = std::get_if<EmbeddingOp>(&kind_)) {
    require(std::isfinite(e->q) && e->q >= 1.0, "embedding operator needs 1 <= q < inf");
  }
  if (const auto* d = std::get_if<DiagonalOp>(&kind_)) {
    if (d->values.empty()) {
      require(std::isfinite(d->scale) && d->scale > 0.0, "diagonal operator needs scale > 0");
      require(std::isfinite(d->exponent), "diagonal operator needs a finite exponent");
    } else {
      for (double s : d->values)
        require(std::isfinite(s) && s > 0.0, "diagonal operator needs all singular values > 0");
    }
  }
}

OperatorTruncation::OperatorTruncation(OperatorSpec spec, std::size_t n, NormKind image_norm,
                                       SparseMatrix matrix)
    : spec_(std::move(spec)), n_(n), image_norm_(image_norm), matrix_(std::move(matrix)) {
  require(matrix_.rows() == static_cast<Eigen::Index>(n) && matrix_.cols() == static_cast<Eigen::Index>(n),
          "operator matrix does not match truncation level");
}

Vector OperatorTruncation::apply(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != n_) throw DimensionMismatch("apply", n_, x.size());
  return matrix_ * x;
}

Vector OperatorTruncation::apply_adjoint(const Vector& y) const {
  if (static_cast<std::size_t>(y.size()) != n_) throw DimensionMismatch("apply_adjoint", n_, y.size());
  return matrix_.transpose() * y;
}

OperatorTruncation assemble(const OperatorSpec& spec, std::size_t n, NormKind image_norm) {
  require(n >= 1, "assemble: truncation level must be >= 1");
  spec.validate();
  using Triplet = Eigen::Triplet<double>;
  std::vector<Triplet> entries;
  const auto N = static_cast<int>(n);

  std::visit(
      [&](const auto& kind) {
        using K = std::decay_t<decltype(kind)>;
        if constexpr (std::is_same_v<K, IdentityOp> || std::is_same_v<K, EmbeddingOp>) {
          for (int k = 0; k < N; ++k) entries.emplace_back(k, k, 1.0);
        } else if constexpr (std::is_same_v<K, BidiagonalSumOp>) {
          for (int k = 0; k < N; ++k) {
            entries.emplace_back(k, k, 1.0);
            if (k + 1 < N) entries.emplace_back(k, k + 1, 1.0);
          }
        } else if constexpr (std::is_same_v<K, FirstRowSummationOp>) {
          for (int l = 0; l < N; ++l) entries.emplace_back(0, l, 1.0);
          for (int k = 1; k < N; ++k) entries.emplace_back(k, k, 1.0);
        } else if constexpr (std::is_same_v<K, DiagonalOp>) {
          if (!kind.values.empty())
            require(kind.values.size() >= n, "diagonal operator: fewer singular values than N");
          for (int k = 0; k < N; ++k) entries.emplace_back(k, k, kind.sigma(static_cast<std::size_t>(k) + 1));
        }
      },
      spec.kind());

  SparseMatrix matrix(N, N);
  matrix.setFromTriplets(entries.begin(), entries.end());
  matrix.makeCompressed();
  return OperatorTruncation(spec, n, image_norm, std::move(matrix));
}

TruncatedSequence apply(const OperatorTruncation& op, const TruncatedSequence& x) {
  return TruncatedSequence(op.apply(x.values()));
}

TruncatedSequence apply_adjoint(const OperatorTruncation& op, const TruncatedSequence& y) {
  return TruncatedSequence(op.apply_adjoint(y.values()));
}

double operator_norm_estimate(const OperatorTruncation& op, double tol,
                              const NormEstimateOptions& options) {
  require(tol > 0.0, "operator_norm_estimate: tol must be positive");
  const auto n = static_cast<Eigen::Index>(op.size());
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal;
  Vector q(n);
  for (Eigen::Index i = 0; i < n; ++i) q(i) = normal(rng);
  q.normalize();

  // Lanczos on A^T A with full reorthogonalization. The largest Ritz value
  // never exceeds lambda_max and its residual |beta_m s_m| bounds the error.
  const Eigen::Index cap = std::min<Eigen::Index>(n, static_cast<Eigen::Index>(options.max_steps));
  Eigen::MatrixXd basis(n, cap);
  std::vector<double> alpha, beta;
  double scale = 0.0, prev_theta = 0.0;
  basis.col(0) = q;
  for (Eigen::Index m = 0; m < cap; ++m) {
    Vector w = op.apply_adjoint(op.apply(basis.col(m)));
    alpha.push_back(basis.col(m).dot(w));
    for (int pass = 0; pass < 2; ++pass) w -= basis.leftCols(m + 1) * (basis.leftCols(m + 1).transpose() * w);
    const double b = w.norm();

    scale = std::max(scale, alpha.back());
    const bool last = m + 1 == cap;
    const bool breakdown = b <= 1e-13 * scale;
    const bool check = last || breakdown || (m + 1) % 8 == 0;
    if (check) {
      const auto k = static_cast<Eigen::Index>(alpha.size());
      Vector diag = Eigen::Map<const Vector>(alpha.data(), k);
      Vector sub = Eigen::Map<const Vector>(beta.data(), k - 1);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
      eig.computeFromTridiagonal(diag, sub);
      const double theta = eig.eigenvalues()(k - 1);
      if (!(theta > 0.0))
        throw NonConvergence("operator_norm_estimate: A^T A annihilates the start vector (degenerate operator)");
      // Krylov space exhausted or invariant: the Ritz value is exact.
      if (breakdown || (last && cap == n)) return std::sqrt(theta) * (1.0 + tol);
      const double residual = b * std::abs(eig.eigenvectors()(k - 1, k - 1));
      const double gap = k > 1 ? theta - eig.eigenvalues()(k - 2) : 0.0;
      // lambda_max - theta <= residual, and <= residual^2 / gap once the gap is resolved.
      // A clustered top of the spectrum keeps the gap unresolved; there the Ritz
      // value is accepted once it stalls far below tol.
      if (residual <= tol * theta || residual * residual <= 0.5 * tol * theta * gap ||
          theta - prev_theta <= 1e-3 * tol * theta)
        return std::sqrt(theta) * (1.0 + tol);
      prev_theta = theta;
    }
    if (last) break;
    beta.push_back(b);
    basis.col(m + 1) = w / b;
  }
  throw NonConvergence(fmt::format("operator_norm_estimate: no convergence within {} Lanczos steps", cap));
}

double sigma_min(const OperatorTruncation& op) {
  require(op.size() <= kMaxDenseSvd,
          fmt::format("sigma_min: dense SVD limited to N <= {}, got {}", kMaxDenseSvd, op.size()));
  // Eigenvalues of [0 A; A^T 0] are +-sigma_k. Eigen's BDCSVD loses digits on
  // some bidiagonal sizes (N = 46 gives a 1e-4 relative error); the symmetric
  // eigensolver stays at rounding level.
  const auto n = static_cast<Eigen::Index>(op.size());
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  aug.topRightCorner(n, n) = op.dense();
  aug.bottomLeftCorner(n, n) = aug.topRightCorner(n, n).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(aug, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().cwiseAbs().minCoeff();
}

std::string to_string(ConditioningVerdict verdict) {
  return verdict == ConditioningVerdict::Stable ? "stable" : "degenerating";
}

ConditioningReport conditioning_scan(const OperatorSpec& spec, const std::vector<std::size_t>& n_grid) {
  require(!n_grid.empty(), "conditioning_scan: empty grid");
  for (std::size_t i = 1; i < n_grid.size(); ++i)
    require(n_grid[i] > n_grid[i - 1], "conditioning_scan: grid must be strictly increasing");

  ConditioningReport report;
  report.n = n_grid;
  for (std::size_t n : n_grid) report.sigma_min.push_back(sigma_min(assemble(spec, n)));

  report.growth_exponent = std::nan("");
  if (n_grid.size() >= 2) {
    const auto m = static_cast<double>(n_grid.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
      const double x = std::log(static_cast<double>(n_grid[i]));
      const double y = -std::log(report.sigma_min[i]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    report.growth_exponent = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  }
  const double drop = report.sigma_min.front() / report.sigma_min.back();
  report.verdict = drop >= 10.0 ? ConditioningVerdict::Degenerating : ConditioningVerdict::Stable;
  return report;
}

std::vector<double> weak_star_diagnostic(const OperatorSpec& spec, std::size_t k_max,
                                         const WeakStarProbe& probe) {
  require(k_max >= 1, "weak_star_diagnostic: K must be >= 1");
  std::size_t n = k_max;
  if (const auto* xi = std::get_if<TruncatedSequence>(&probe)) {
    if (xi->size() < k_max) throw DimensionMismatch("weak_star_diagnostic probe", k_max, xi->size());
    n = xi->size();
  }
  const OperatorTruncation op = assemble(spec, n);
  Vector xi = std::holds_alternative<ConstantOneProbe>(probe)
                  ? Vector(Vector::Ones(static_cast<Eigen::Index>(n)))
                  : std::get<TruncatedSequence>(probe).values();

  // <xi, A e^(k)> is the k-th entry of A^T xi.
  const Vector pairings = op.apply_adjoint(xi);
  return std::vector<double>(pairings.data(), pairings.data() + k_max);
}

}  // namespace l1reg
