#pragma once

// Smoothness machinery behind the convergence rates: gamma_n sequences from
// source elements, witnesses eta with P_n A^* eta = xi and a bounded tail, the index
// function phi(t) = 2 min_n (tail(n) + gamma_n t), and sampled checks of the
// variational source condition and of the basic l1 splitting inequality.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "l1reg/index_function.hpp"
#include "l1reg/operators.hpp"
#include "l1reg/sequences.hpp"

namespace l1reg {

enum class GammaMode { Sum, SignedSup };

inline constexpr std::size_t kMaxSignedSupTerms = 12;

/// Sum mode: sum_{k<=n} ||f^(k)||. SignedSup mode: max over a in {-1,0,1}^n of
/// ||sum_k a_k f^(k)||, enumerated exhaustively (n <= 12).
double gamma_from_sources(const std::vector<TruncatedSequence>& sources, std::size_t n, GammaMode mode,
                          NormKind dual_norm);

/// Source elements f^(k) with A^* f^(k) = e^(k) for the operators where they are
/// explicit: e^(k) for identity/embedding, e^(k) / sigma_k for diagonal.
std::vector<TruncatedSequence> canonical_sources(const OperatorSpec& spec, std::size_t count, std::size_t dim);

struct GammaSequence {
  std::string name;
  std::function<double(std::size_t)> eval;  // n >= 1
};

GammaSequence linear_gamma(double factor = 1.0);  // gamma_n = factor * n
GammaSequence constant_gamma(double value);       // well-posed case
GammaSequence tabulated_gamma(std::vector<double> values);  // values[n-1]

/// Tail sums and gamma_n tabulated on n = 1..n_max.
class SmoothnessProfile {
 public:
  /// tail[i] = sum_{k > i+1} |x_k| and gamma[i] = gamma_{i+1}, i = 0..n_max-1.
  SmoothnessProfile(std::vector<double> tail, std::vector<double> gamma, std::string name = {});

  /// Analytic tails of the model (extends beyond any truncation).
  static SmoothnessProfile from_model(const SequenceModel& model, const GammaSequence& gamma, std::size_t n_max);
  /// Tails of a finite vector; zero from n = size() on.
  static SmoothnessProfile from_truncation(const TruncatedSequence& x, const GammaSequence& gamma,
                                           std::size_t n_max = 0);

  std::size_t n_max() const { return tail_.size(); }
  double tail(std::size_t n) const { return tail_.at(n - 1); }
  double gamma(std::size_t n) const { return gamma_.at(n - 1); }
  const std::string& name() const { return name_; }

 private:
  std::vector<double> tail_;
  std::vector<double> gamma_;
  std::string name_;
};

struct PhiValue {
  double value;
  std::size_t argmin_n;
};

/// 2 * min_{1 <= n <= n_max} (tail(n) + gamma(n) t); the smallest minimizing n is reported.
PhiValue phi_eval(const SmoothnessProfile& profile, double t);

IndexFunction as_index_function(const SmoothnessProfile& profile);

enum class WitnessTail { Alternating, Decaying };

struct Property1Witness {
  TruncatedSequence eta;
  std::size_t n;
  double mu;
  std::vector<double> xi_head;
  double gamma_bound;
};

/// Witness for [Ax]_k = x_k + x_{k+1}: head by eta_1 = xi_1, eta_k = xi_k - eta_{k-1};
/// tail either alternating (eta_{n+i} = (-1)^i eta_n, A^* eta vanishes past n) or
/// decaying (smallest-magnitude value in the band (-1)^i eta_n +- i mu, reaching
/// zero). gamma_bound = n.
Property1Witness property1_witness_bidiagonal(const std::vector<double>& xi_head, double mu, WitnessTail tail,
                                              std::size_t truncation);

/// eta = sum_k xi_k f^(k) for identity/embedding/diagonal operators, mu = 0;
/// gamma_bound is the l2 norm bound sqrt(sum_{k<=n} 1/sigma_k^2).
Property1Witness property1_witness_closed_form(const OperatorSpec& spec, const std::vector<double>& xi_head,
                                               std::size_t truncation);

struct WitnessCertificate {
  double head_error;  // max_{k<=n} |[A^* eta]_k - xi_k|
  double tail_max;    // max_{k>n} |[A^* eta]_k|
  double eta_sup;     // ||eta||_inf
  bool head_ok;
  bool tail_ok;
  bool norm_ok;

  bool all() const { return head_ok && tail_ok && norm_ok; }
};

/// Checks head exactness, the tail bound mu and ||eta||_inf <= gamma_bound by
/// applying the adjoint of `op` to eta.
WitnessCertificate certify_witness(const OperatorTruncation& op, const Property1Witness& witness,
                                   double tol = 1e-14);

struct VscReport {
  std::size_t samples = 0;
  std::size_t violations = 0;
  /// max over samples of lhs - rhs (<= 0 when the inequality holds everywhere).
  double worst_margin = 0.0;
};

/// Samples x and checks beta ||x - x_true||_1 <= ||x||_1 - ||x_true||_1 + phi(||A x - A x_true||),
/// with the norm on the image taken from op.image_norm().
VscReport vsc_check(const OperatorTruncation& op, const TruncatedSequence& x_true, const SmoothnessProfile& profile,
                    double beta, std::size_t samples, std::uint64_t seed);

struct FirstLemmaResult {
  double lhs;
  double rhs;
  bool holds;
};

/// ||x - x†||_1 <= ||x||_1 - ||x†||_1 + 2 (sum_{k>n} |x†_k| + sum_{k<=n} |x_k - x†_k|), slack 1e-12.
FirstLemmaResult firstlemma_check(const TruncatedSequence& x, const TruncatedSequence& x_true, std::size_t n);

}  // namespace l1reg
