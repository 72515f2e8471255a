#pragma once

#include <functional>
#include <string>
#include <vector>

namespace l1reg {

/// A named callable t -> phi(t) on [0, inf), expected to be an index function
/// (phi(0) = 0, continuous, strictly increasing), usually concave.
struct IndexFunction {
  std::string name;
  std::function<double(double)> eval;

  double operator()(double t) const { return eval(t); }
};

/// phi(t) = factor * t^exponent.
IndexFunction power_index_function(double exponent, double factor = 1.0);

/// `points` log-spaced values from lo to hi inclusive.
std::vector<double> log_grid(double lo, double hi, std::size_t points);

struct ShapeCheck {
  bool increasing = true;
  bool midpoint_concave = true;
  /// Right end of the first grid interval failing a test (0 when both hold).
  double first_failure = 0.0;

  bool holds() const { return increasing && midpoint_concave; }
};

/// Strict increase between neighbours of an increasing grid, and
/// phi((a+b)/2) >= (phi(a)+phi(b))/2 - 1e-12 |phi(b)| on each interval.
ShapeCheck check_shape(const IndexFunction& phi, const std::vector<double>& grid);

}  // namespace l1reg
