#include "dembed/history.hpp"

#include <cmath>
#include <string>

#include "dembed/error.hpp"

namespace dembed {
namespace {

constexpr double kDomainSlack = 1e-12;
// Distance (in cell units) below which t is treated as a grid node.
constexpr double kNodeSnap = 1e-9;

}  // namespace

HistorySegment::HistorySegment(std::size_t n, double tau, std::vector<double> values,
                               std::optional<std::vector<double>> derivs)
    : n_(n), tau_(tau), intervals_(0), values_(std::move(values)), derivs_(std::move(derivs)) {
  if (n_ == 0) throw Error(ErrorKind::InvalidArgument, "history dimension must be positive");
  if (!(tau_ > 0.0) || !std::isfinite(tau_)) throw Error(ErrorKind::InvalidArgument, "delay must be positive");
  if (values_.size() % n_ != 0 || values_.size() / n_ < 2) {
    throw Error(ErrorKind::InvalidArgument, "history needs at least two nodes of dimension n");
  }
  intervals_ = values_.size() / n_ - 1;
  if (derivs_ && derivs_->size() != values_.size()) {
    throw Error(ErrorKind::InvalidArgument, "derivative samples must match value samples");
  }
}

HistorySegment HistorySegment::constant(std::span<const double> value, double tau, std::size_t intervals) {
  if (intervals == 0) throw Error(ErrorKind::InvalidArgument, "constant history needs at least one cell");
  std::vector<double> values;
  values.reserve((intervals + 1) * value.size());
  for (std::size_t i = 0; i <= intervals; ++i) values.insert(values.end(), value.begin(), value.end());
  return HistorySegment(value.size(), tau, std::move(values),
                        std::vector<double>((intervals + 1) * value.size(), 0.0));
}

HistorySegment HistorySegment::sample(std::size_t n, double tau, std::size_t intervals,
                                      const std::function<void(double, std::span<double>)>& f,
                                      const std::function<void(double, std::span<double>)>& df) {
  if (intervals == 0) throw Error(ErrorKind::InvalidArgument, "sampled history needs at least one cell");
  std::vector<double> values((intervals + 1) * n);
  std::optional<std::vector<double>> derivs;
  if (df) derivs.emplace((intervals + 1) * n);
  for (std::size_t i = 0; i <= intervals; ++i) {
    const double t = -tau * static_cast<double>(intervals - i) / static_cast<double>(intervals);
    f(t, std::span<double>(values.data() + i * n, n));
    if (df) df(t, std::span<double>(derivs->data() + i * n, n));
  }
  return HistorySegment(n, tau, std::move(values), std::move(derivs));
}

double HistorySegment::node_time(std::size_t i) const noexcept {
  return -tau_ * static_cast<double>(intervals_ - i) / static_cast<double>(intervals_);
}

std::pair<std::size_t, double> HistorySegment::locate(double t) const {
  if (!(t >= -tau_ - kDomainSlack && t <= kDomainSlack)) {
    throw Error(ErrorKind::OutOfDomain, "t = " + std::to_string(t) + " outside [-tau, 0]");
  }
  const double x = (t + tau_) / tau_ * static_cast<double>(intervals_);
  const double nearest = std::round(x);
  if (std::fabs(x - nearest) <= kNodeSnap || x <= 0.0 || x >= static_cast<double>(intervals_)) {
    const double clamped = std::min(std::max(nearest, 0.0), static_cast<double>(intervals_));
    return {static_cast<std::size_t>(clamped), -1.0};
  }
  const auto cell = static_cast<std::size_t>(std::floor(x));
  return {cell, x - static_cast<double>(cell)};
}

void HistorySegment::evaluate(double t, std::span<double> out) const {
  const auto [idx, theta] = locate(t);
  if (theta < 0.0) {
    for (std::size_t c = 0; c < n_; ++c) out[c] = values_[idx * n_ + c];
    return;
  }
  const double* y0 = values_.data() + idx * n_;
  const double* y1 = y0 + n_;
  if (!derivs_) {
    for (std::size_t c = 0; c < n_; ++c) out[c] = (1.0 - theta) * y0[c] + theta * y1[c];
    return;
  }
  const double h = spacing();
  const double* d0 = derivs_->data() + idx * n_;
  const double* d1 = d0 + n_;
  const double t2 = theta * theta;
  const double t3 = t2 * theta;
  const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
  const double h10 = t3 - 2.0 * t2 + theta;
  const double h01 = -2.0 * t3 + 3.0 * t2;
  const double h11 = t3 - t2;
  for (std::size_t c = 0; c < n_; ++c) {
    out[c] = h00 * y0[c] + h10 * h * d0[c] + h01 * y1[c] + h11 * h * d1[c];
  }
}

std::vector<double> HistorySegment::evaluate(double t) const {
  std::vector<double> out(n_);
  evaluate(t, out);
  return out;
}

double HistorySegment::evaluate(double t, std::size_t component) const {
  const auto [idx, theta] = locate(t);
  if (theta < 0.0) return values_[idx * n_ + component];
  const double y0 = values_[idx * n_ + component];
  const double y1 = values_[(idx + 1) * n_ + component];
  if (!derivs_) return (1.0 - theta) * y0 + theta * y1;
  const double h = spacing();
  const double d0 = (*derivs_)[idx * n_ + component];
  const double d1 = (*derivs_)[(idx + 1) * n_ + component];
  const double t2 = theta * theta;
  const double t3 = t2 * theta;
  return (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + theta) * h * d0 +
         (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * h * d1;
}

double HistorySegment::derivative(double t, std::size_t component) const {
  auto [idx, theta] = locate(t);
  if (theta < 0.0) return slope_at_node(idx, component);
  if (!derivs_) return slope_at_node(idx, component);
  const double h = spacing();
  const double y0 = values_[idx * n_ + component];
  const double y1 = values_[(idx + 1) * n_ + component];
  const double d0 = (*derivs_)[idx * n_ + component];
  const double d1 = (*derivs_)[(idx + 1) * n_ + component];
  const double t2 = theta * theta;
  return ((6.0 * t2 - 6.0 * theta) * (y0 - y1)) / h + (3.0 * t2 - 4.0 * theta + 1.0) * d0 +
         (3.0 * t2 - 2.0 * theta) * d1;
}

double HistorySegment::slope_at_node(std::size_t i, std::size_t component) const {
  if (derivs_) return (*derivs_)[i * n_ + component];
  const std::size_t left = i < intervals_ ? i : intervals_ - 1;
  return (values_[(left + 1) * n_ + component] - values_[left * n_ + component]) / spacing();
}

}  // namespace dembed
