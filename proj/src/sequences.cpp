#include "l1reg/sequences.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "l1reg/errors.hpp"

namespace l1reg {

std::string to_string(NormKind kind) {
  switch (kind) {
    case NormKind::L1:
      return "l1";
    case NormKind::L2:
      return "l2";
    case NormKind::Sup:
      return "sup";
  }
  return "?";
}

NormKind parse_norm_kind(std::string_view name) {
  if (name == "l1") return NormKind::L1;
  if (name == "l2") return NormKind::L2;
  if (name == "sup" || name == "linf") return NormKind::Sup;
  throw InvalidArgument(fmt::format("unknown norm kind '{}' (expected l1, l2 or sup)", name));
}

TruncatedSequence::TruncatedSequence(Vector values) : values_(std::move(values)) {
  require(values_.size() >= 1, "truncated sequence needs at least one entry");
  require(values_.allFinite(), "truncated sequence has non-finite entries");
}

TruncatedSequence::TruncatedSequence(std::initializer_list<double> values)
    : TruncatedSequence(Vector::Map(values.begin(), static_cast<Eigen::Index>(values.size()))) {}

TruncatedSequence TruncatedSequence::zeros(std::size_t n) {
  require(n >= 1, "truncation level must be >= 1");
  return TruncatedSequence(Vector::Zero(static_cast<Eigen::Index>(n)));
}

TruncatedSequence TruncatedSequence::unit(std::size_t n, std::size_t k) {
  require(n >= 1 && k >= 1 && k <= n, "unit vector index out of range");
  Vector e = Vector::Zero(static_cast<Eigen::Index>(n));
  e(static_cast<Eigen::Index>(k - 1)) = 1.0;
  return TruncatedSequence(std::move(e));
}

double TruncatedSequence::coord(std::size_t k) const {
  require(k >= 1 && k <= size(), "coordinate index out of range");
  return values_(static_cast<Eigen::Index>(k - 1));
}

SequenceModel SequenceModel::sparse(std::vector<std::size_t> support, std::vector<double> values) {
  require(support.size() == values.size(), "sparse model: support and values differ in length");
  for (std::size_t i = 0; i < support.size(); ++i) {
    require(support[i] >= 1, "sparse model: support indices are 1-based");
    require(i == 0 || support[i] > support[i - 1],
            "sparse model: support indices must be strictly increasing");
    require(std::isfinite(values[i]), "sparse model: non-finite value");
  }
  return SequenceModel(SparseModel{std::move(support), std::move(values)});
}

SequenceModel SequenceModel::power_decay(double exponent, double scale) {
  require(exponent > 1.0 && std::isfinite(exponent), "power decay needs exponent > 1");
  require(scale > 0.0 && std::isfinite(scale), "power decay needs scale > 0");
  return SequenceModel(PowerDecayModel{exponent, scale});
}

SequenceModel SequenceModel::exponential_decay(double rate, double scale) {
  require(rate > 0.0 && std::isfinite(rate), "exponential decay needs rate > 0");
  require(scale > 0.0 && std::isfinite(scale), "exponential decay needs scale > 0");
  return SequenceModel(ExponentialDecayModel{rate, scale});
}

namespace {
template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;
}  // namespace

std::string SequenceModel::describe() const {
  return std::visit(
      Overloaded{
          [](const SparseModel& m) { return fmt::format("sparse({} nonzeros)", m.support.size()); },
          [](const PowerDecayModel& m) {
            return fmt::format("power_decay(exponent={}, scale={})", m.exponent, m.scale);
          },
          [](const ExponentialDecayModel& m) {
            return fmt::format("exponential_decay(rate={}, scale={})", m.rate, m.scale);
          }},
      kind_);
}

double SequenceModel::coordinate(std::size_t k) const {
  require(k >= 1, "coordinates are 1-based");
  return std::visit(Overloaded{[k](const SparseModel& m) {
                                 auto it = std::lower_bound(m.support.begin(), m.support.end(), k);
                                 if (it == m.support.end() || *it != k) return 0.0;
                                 return m.values[static_cast<std::size_t>(it - m.support.begin())];
                               },
                               [k](const PowerDecayModel& m) {
                                 return m.scale * std::pow(static_cast<double>(k), -m.exponent);
                               },
                               [k](const ExponentialDecayModel& m) {
                                 return m.scale * std::exp(-m.rate * static_cast<double>(k));
                               }},
                    kind_);
}

TruncatedSequence materialize(const SequenceModel& model, std::size_t n) {
  require(n >= 1, "materialize: truncation level must be >= 1");
  Vector x(static_cast<Eigen::Index>(n));
  for (std::size_t k = 1; k <= n; ++k) x(static_cast<Eigen::Index>(k - 1)) = model.coordinate(k);
  return TruncatedSequence(std::move(x));
}

namespace {

constexpr std::size_t kPowerTailSummed = 100000;

double power_tail(const PowerDecayModel& m, std::size_t n) {
  const double theta = m.exponent;
  const double c = m.scale;
  const std::size_t cutoff = std::max(n, kPowerTailSummed);

  // Neumaier summation, smallest terms first.
  double sum = 0.0;
  double comp = 0.0;
  for (std::size_t k = cutoff; k > n; --k) {
    const double term = c * std::pow(static_cast<double>(k), -theta);
    const double t = sum + term;
    if (std::abs(sum) >= std::abs(term))
      comp += (sum - t) + term;
    else
      comp += (term - t) + sum;
    sum = t;
  }

  // Remainder sum_{k>M} f(k), f(x) = c x^-theta.
  const double big_m = static_cast<double>(cutoff);
  const double f_m = c * std::pow(big_m, -theta);
  const double integral_upper = c * std::pow(big_m, 1.0 - theta) / (theta - 1.0);
  const double integral_lower = c * std::pow(big_m + 1.0, 1.0 - theta) / (theta - 1.0);
  const double fp = -theta * f_m / big_m;
  const double fppp = -theta * (theta + 1.0) * (theta + 2.0) * f_m / (big_m * big_m * big_m);
  double remainder = integral_upper - 0.5 * f_m - fp / 12.0 + fppp / 720.0;
  remainder = std::clamp(remainder, integral_lower, integral_upper);

  return sum + comp + remainder;
}

}  // namespace

double tail_sum(const SequenceModel& model, std::size_t n) {
  return std::visit(
      Overloaded{[n](const SparseModel& m) {
                   double s = 0.0;
                   for (std::size_t i = 0; i < m.support.size(); ++i)
                     if (m.support[i] > n) s += std::abs(m.values[i]);
                   return s;
                 },
                 [n](const PowerDecayModel& m) { return power_tail(m, n); },
                 [n](const ExponentialDecayModel& m) {
                   return m.scale * std::exp(-m.rate * static_cast<double>(n + 1)) /
                          (-std::expm1(-m.rate));
                 }},
      model.kind());
}

double norm(const Vector& x, NormKind kind) {
  switch (kind) {
    case NormKind::L1:
      return x.lpNorm<1>();
    case NormKind::L2:
      return x.norm();
    case NormKind::Sup:
      return x.size() == 0 ? 0.0 : x.lpNorm<Eigen::Infinity>();
  }
  return 0.0;
}

Vector soft_threshold(const Vector& x, double lambda) {
  require(lambda >= 0.0, "soft_threshold: lambda must be nonnegative");
  Vector out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double mag = std::abs(x(i)) - lambda;
    out(i) = mag > 0.0 ? std::copysign(mag, x(i)) : 0.0;
  }
  return out;
}

TruncatedSequence soft_threshold(const TruncatedSequence& x, double lambda) {
  return TruncatedSequence(soft_threshold(x.values(), lambda));
}

std::size_t support_size(const Vector& x) {
  return static_cast<std::size_t>((x.array() != 0.0).count());
}

}  // namespace l1reg
