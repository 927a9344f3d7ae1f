#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace dembed {

/// A state of the delay equation: a function [-tau, 0] -> R^n sampled on a
/// uniform grid of M + 1 nodes. Evaluation interpolates linearly, or with
/// cubic Hermite polynomials when node derivatives are stored.
///
/// Samples are row-major: row i holds the n components at node i.
class HistorySegment {
 public:
  HistorySegment(std::size_t n, double tau, std::vector<double> values,
                 std::optional<std::vector<double>> derivs = std::nullopt);

  /// Segment equal to `value` everywhere, stored on `intervals` cells.
  static HistorySegment constant(std::span<const double> value, double tau, std::size_t intervals = 1);

  /// Samples f (and optionally its derivative) on `intervals` uniform cells.
  static HistorySegment sample(std::size_t n, double tau, std::size_t intervals,
                               const std::function<void(double, std::span<double>)>& f,
                               const std::function<void(double, std::span<double>)>& df = {});

  std::size_t dim() const noexcept { return n_; }
  double tau() const noexcept { return tau_; }
  std::size_t intervals() const noexcept { return intervals_; }
  std::size_t nodes() const noexcept { return intervals_ + 1; }
  double spacing() const noexcept { return tau_ / static_cast<double>(intervals_); }
  bool has_derivs() const noexcept { return derivs_.has_value(); }

  /// Time of node i; node 0 is exactly -tau and node M exactly 0.
  double node_time(std::size_t i) const noexcept;

  std::span<const double> node(std::size_t i) const { return {values_.data() + i * n_, n_}; }
  std::span<const double> node_deriv(std::size_t i) const { return {derivs_->data() + i * n_, n_}; }
  const std::vector<double>& values() const noexcept { return values_; }
  const std::optional<std::vector<double>>& derivs() const noexcept { return derivs_; }

  /// u(t) for t in [-tau, 0] (absolute slack 1e-12); throws OutOfDomain otherwise.
  void evaluate(double t, std::span<double> out) const;
  std::vector<double> evaluate(double t) const;
  double evaluate(double t, std::size_t component) const;

  /// du/dt at t: Hermite derivative when derivatives are stored, otherwise
  /// the slope of the containing cell (right cell at interior nodes).
  double derivative(double t, std::size_t component) const;

  /// Derivative at node i: stored value, or one-sided slope of the linear
  /// interpolant (right-sided except at the last node).
  double slope_at_node(std::size_t i, std::size_t component) const;

 private:
  // Locates t: returns the cell index and local coordinate in [0, 1], or the
  // node index with theta = -1 when t is a grid node.
  std::pair<std::size_t, double> locate(double t) const;

  std::size_t n_;
  double tau_;
  std::size_t intervals_;
  std::vector<double> values_;
  std::optional<std::vector<double>> derivs_;
};

}  // namespace dembed
