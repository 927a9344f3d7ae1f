#include "dembed/spline.hpp"

#include <algorithm>

#include "dembed/error.hpp"

namespace dembed {

NaturalSpline::NaturalSpline(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)), m_(x_.size(), 0.0) {
  if (x_.empty() || x_.size() != y_.size()) throw Error(ErrorKind::InvalidArgument, "spline needs matching knots");
  for (std::size_t i = 1; i < x_.size(); ++i) {
    if (!(x_[i] > x_[i - 1])) throw Error(ErrorKind::InvalidArgument, "spline knots must increase");
  }
  const std::size_t n = x_.size();
  if (n < 3) return;
  // Thomas algorithm on the interior second derivatives.
  std::vector<double> diag(n, 0.0), upper(n, 0.0), rhs(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = x_[i] - x_[i - 1];
    const double h1 = x_[i + 1] - x_[i];
    const double lower = h0 / 6.0;
    diag[i] = (h0 + h1) / 3.0;
    upper[i] = h1 / 6.0;
    rhs[i] = (y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0;
    if (i > 1) {
      const double w = lower / diag[i - 1];
      diag[i] -= w * upper[i - 1];
      rhs[i] -= w * rhs[i - 1];
    }
  }
  for (std::size_t i = n - 2; i >= 1; --i) {
    m_[i] = (rhs[i] - (i + 2 < n ? upper[i] * m_[i + 1] : 0.0)) / diag[i];
  }
}

std::size_t NaturalSpline::interval(double t) const {
  const auto it = std::upper_bound(x_.begin(), x_.end(), t);
  const auto idx = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - x_.begin() - 1, 0));
  return std::min(idx, x_.size() - 2);
}

double NaturalSpline::value(double t) const {
  if (x_.size() == 1) return y_[0];
  if (t <= x_.front()) return y_.front() + slope(x_.front()) * (t - x_.front());
  if (t >= x_.back()) return y_.back() + slope(x_.back()) * (t - x_.back());
  const std::size_t i = interval(t);
  const double h = x_[i + 1] - x_[i];
  const double a = (x_[i + 1] - t) / h;
  const double b = (t - x_[i]) / h;
  return a * y_[i] + b * y_[i + 1] + ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
}

double NaturalSpline::slope(double t) const {
  if (x_.size() == 1) return 0.0;
  const double tc = std::clamp(t, x_.front(), x_.back());
  const std::size_t i = interval(tc);
  const double h = x_[i + 1] - x_[i];
  const double a = (x_[i + 1] - tc) / h;
  const double b = (tc - x_[i]) / h;
  return (y_[i + 1] - y_[i]) / h + ((1.0 - 3.0 * a * a) * m_[i] + (3.0 * b * b - 1.0) * m_[i + 1]) * h / 6.0;
}

}  // namespace dembed
