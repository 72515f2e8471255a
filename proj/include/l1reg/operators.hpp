#pragma once

// Square N x N truncations of the example operators on l1, their adjoints,
// and numerical diagnostics (norm, smallest singular value, weak* pairings).

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/SparseCore>

#include "l1reg/sequences.hpp"

namespace l1reg {

struct IdentityOp {};

/// Identity viewed as the embedding l1 -> l^q, 1 <= q < inf.
struct EmbeddingOp {
  double q = 2.0;
};

/// [Ax]_k = x_k + x_{k+1}.
struct BidiagonalSumOp {};

/// [Ax]_1 = sum of all x_l, [Ax]_k = x_k for k >= 2.
struct FirstRowSummationOp {};

/// Diagonal operator. Singular values either follow sigma_k = scale * k^(-exponent)
/// or are listed explicitly (the list must cover the truncation level).
struct DiagonalOp {
  double scale = 1.0;
  double exponent = 0.5;
  std::vector<double> values;

  double sigma(std::size_t k) const;  // 1-indexed
};

class OperatorSpec {
 public:
  using Kind = std::variant<IdentityOp, EmbeddingOp, BidiagonalSumOp, FirstRowSummationOp, DiagonalOp>;

  OperatorSpec(Kind kind, std::string label = {});

  static OperatorSpec identity() { return OperatorSpec(IdentityOp{}); }
  static OperatorSpec embedding(double q) { return OperatorSpec(EmbeddingOp{q}); }
  static OperatorSpec bidiagonal_sum() { return OperatorSpec(BidiagonalSumOp{}); }
  static OperatorSpec first_row_summation() { return OperatorSpec(FirstRowSummationOp{}); }
  static OperatorSpec diagonal_power(double scale, double exponent);
  static OperatorSpec diagonal_values(std::vector<double> sigma);

  const Kind& kind() const { return kind_; }
  const std::string& label() const { return label_; }
  std::string kind_name() const;

  /// Throws InvalidArgument if the parameters violate the kind's invariants.
  void validate() const;

 private:
  Kind kind_;
  std::string label_;
};

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

class OperatorTruncation {
 public:
  OperatorTruncation(OperatorSpec spec, std::size_t n, NormKind image_norm, SparseMatrix matrix);

  const OperatorSpec& spec() const { return spec_; }
  std::size_t size() const { return n_; }
  NormKind image_norm() const { return image_norm_; }
  const SparseMatrix& matrix() const { return matrix_; }
  Eigen::MatrixXd dense() const { return Eigen::MatrixXd(matrix_); }

  Vector apply(const Vector& x) const;
  Vector apply_adjoint(const Vector& y) const;

 private:
  OperatorSpec spec_;
  std::size_t n_;
  NormKind image_norm_;
  SparseMatrix matrix_;
};

OperatorTruncation assemble(const OperatorSpec& spec, std::size_t n,
                            NormKind image_norm = NormKind::L2);

TruncatedSequence apply(const OperatorTruncation& op, const TruncatedSequence& x);
TruncatedSequence apply_adjoint(const OperatorTruncation& op, const TruncatedSequence& y);

struct NormEstimateOptions {
  std::size_t max_steps = 400;
  std::uint64_t seed = 42;
};

/// Largest singular value from Krylov (Lanczos) iterations on A^T A started at a
/// seeded random vector, stopped once the Ritz residual is below tol times the
/// Ritz value, and scaled by (1 + tol). Throws NonConvergence when max_steps
/// is reached first.
double operator_norm_estimate(const OperatorTruncation& op, double tol,
                              const NormEstimateOptions& options = {});

inline constexpr std::size_t kMaxDenseSvd = 2000;

/// Smallest singular value by dense SVD; N above kMaxDenseSvd is rejected.
double sigma_min(const OperatorTruncation& op);

enum class ConditioningVerdict { Stable, Degenerating };
std::string to_string(ConditioningVerdict verdict);

struct ConditioningReport {
  std::vector<std::size_t> n;
  std::vector<double> sigma_min;
  /// Least-squares slope of log(1/sigma_min) against log N; NaN for a single N.
  double growth_exponent;
  ConditioningVerdict verdict;
};

/// sigma_min(A_N) over an increasing grid; "degenerating" once sigma_min has
/// dropped by a factor of at least 10 between the first and last N.
ConditioningReport conditioning_scan(const OperatorSpec& spec, const std::vector<std::size_t>& n_grid);

struct ConstantOneProbe {};
using WeakStarProbe = std::variant<TruncatedSequence, ConstantOneProbe>;

/// Pairings <probe, A e^(k)> for k = 1..K.
std::vector<double> weak_star_diagnostic(const OperatorSpec& spec, std::size_t k_max,
                                         const WeakStarProbe& probe);

}  // namespace l1reg
