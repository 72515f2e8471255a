#pragma once

// Finite truncations of l1 sequences and generators for the true solution.
//
// Coordinates are 1-indexed wherever an index crosses the public surface
// (support indices, tail_sum's n, TruncatedSequence::coord). Storage is a
// plain Eigen vector, 0-indexed.

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace l1reg {

using Vector = Eigen::VectorXd;

enum class NormKind { L1, L2, Sup };

std::string to_string(NormKind kind);
NormKind parse_norm_kind(std::string_view name);

/// A real vector of length N >= 1 with finite entries.
class TruncatedSequence {
 public:
  explicit TruncatedSequence(Vector values);
  TruncatedSequence(std::initializer_list<double> values);
  static TruncatedSequence zeros(std::size_t n);
  static TruncatedSequence unit(std::size_t n, std::size_t k);  // e^(k), 1-indexed

  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
  const Vector& values() const { return values_; }
  double coord(std::size_t k) const;  // 1-indexed

 private:
  Vector values_;
};

struct SparseModel {
  std::vector<std::size_t> support;  // 1-indexed, strictly increasing
  std::vector<double> values;
};

/// x_k = scale * k^(-exponent), exponent > 1.
struct PowerDecayModel {
  double exponent;
  double scale;
};

/// x_k = scale * exp(-rate * k), rate > 0.
struct ExponentialDecayModel {
  double rate;
  double scale;
};

class SequenceModel {
 public:
  using Kind = std::variant<SparseModel, PowerDecayModel, ExponentialDecayModel>;

  static SequenceModel sparse(std::vector<std::size_t> support, std::vector<double> values);
  static SequenceModel power_decay(double exponent, double scale = 1.0);
  static SequenceModel exponential_decay(double rate, double scale = 1.0);

  const Kind& kind() const { return kind_; }
  std::string describe() const;

  /// k-th coordinate, k >= 1.
  double coordinate(std::size_t k) const;

 private:
  explicit SequenceModel(Kind kind) : kind_(std::move(kind)) {}
  Kind kind_;
};

TruncatedSequence materialize(const SequenceModel& model, std::size_t n);

/// Sum of |x_k| over k > n.
///
/// Exact for Sparse, closed-form geometric sum for ExponentialDecay. For
/// PowerDecay the terms n+1..M with M = max(n, 1e5) are summed with
/// compensated summation and the remainder is the Euler-Maclaurin expansion
/// of the integral tail, clamped into [int_{M+1}^inf, int_M^inf]. The
/// neglected Euler-Maclaurin term is below 1e-20 for every exponent > 1, so
/// the result is accurate to rounding (well below 1e-12 absolute).
double tail_sum(const SequenceModel& model, std::size_t n);

double norm(const Vector& x, NormKind kind);
inline double norm(const TruncatedSequence& x, NormKind kind) { return norm(x.values(), kind); }

/// Entrywise sign(x) * max(|x| - lambda, 0).
Vector soft_threshold(const Vector& x, double lambda);
TruncatedSequence soft_threshold(const TruncatedSequence& x, double lambda);

/// Number of nonzero entries.
std::size_t support_size(const Vector& x);

}  // namespace l1reg
