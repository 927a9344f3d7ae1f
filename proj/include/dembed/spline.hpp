#pragma once

#include <span>
#include <vector>

namespace dembed {

/// Natural cubic spline (zero second derivative at both ends). One knot
/// gives a constant, two give a straight line. Outside the knot range the
/// spline continues linearly.
class NaturalSpline {
 public:
  /// Knots must be strictly increasing.
  NaturalSpline(std::vector<double> x, std::vector<double> y);

  double value(double t) const;
  double slope(double t) const;

 private:
  std::size_t interval(double t) const;

  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> m_;  // second derivatives at the knots
};

}  // namespace dembed
