#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dembed/history.hpp"

namespace dembed {

/// Right-hand side g(y, y_delayed) evaluated for a batch of independent
/// lanes. Arrays are structure-of-arrays: component c of lane l is at
/// index c * lanes + l.
using BatchRhs = std::function<void(const double* y, const double* y_delayed, double* out, std::size_t lanes)>;

/// y'(t) = g(y(t), y(t - tau)) with y in R^n.
struct DdeSystem {
  std::size_t n = 1;
  double tau = 1.0;
  BatchRhs rhs;
  std::string name;

  void evaluate(std::span<const double> y, std::span<const double> y_delayed, std::span<double> out) const {
    rhs(y.data(), y_delayed.data(), out.data(), 1);
  }
};

using PointRhs = std::function<void(std::span<const double> y, std::span<const double> y_delayed, std::span<double> out)>;

/// Adapts a single-point right-hand side to the batch interface.
DdeSystem make_system(std::size_t n, double tau, PointRhs rhs, std::string name = {});

/// Solution samples on the integration grid, from -tau to the final time,
/// with the derivative at every node. Row-major, n values per node.
class DenseTrajectory {
 public:
  DenseTrajectory(std::size_t n, double t0, double step, std::vector<double> values, std::vector<double> derivs);

  std::size_t dim() const noexcept { return n_; }
  std::size_t nodes() const noexcept { return values_.size() / n_; }
  double step() const noexcept { return step_; }
  double time(std::size_t i) const noexcept { return t0_ + static_cast<double>(i) * step_; }
  std::span<const double> node(std::size_t i) const { return {values_.data() + i * n_, n_}; }

  /// Cubic Hermite evaluation anywhere on the grid span.
  void evaluate(double t, std::span<double> out) const;

  /// One line per node: `t v_1 ... v_n`, 17 significant digits.
  void write_text(std::ostream& os, double time_offset = 0.0) const;

 private:
  std::size_t n_;
  double t0_;
  double step_;
  std::vector<double> values_;
  std::vector<double> derivs_;
};

struct IntegrationResult {
  HistorySegment final_state;  // final_state(t) = y(duration + t)
  DenseTrajectory dense;
};

/// Number of steps of size `step` in `span`; throws InvalidArgument unless
/// the ratio is an integer to within 1e-12 relative.
std::size_t whole_steps(double span, double step, const char* what);

/// Classical RK4 by the method of steps. Delayed values at half steps use
/// cubic Hermite interpolation of the computed solution (or the initial
/// history itself while t - tau < 0). Throws NonFiniteState on blow-up.
IntegrationResult integrate(const DdeSystem& sys, const HistorySegment& h0, double duration, double step);

/// Integrates several initial histories in lockstep. Buffers are kept
/// between runs, so one instance per worker avoids reallocation.
class BatchIntegrator {
 public:
  BatchIntegrator(DdeSystem sys, double duration, double step);

  double step() const noexcept { return step_; }
  double duration() const noexcept { return duration_; }
  std::size_t steps_per_delay() const noexcept { return delay_steps_; }

  /// All histories must have the system's dimension and delay.
  void run(std::span<const HistorySegment* const> initial);

  std::size_t lanes() const noexcept { return lanes_; }
  bool finite(std::size_t lane) const { return finite_[lane] != 0; }

  /// Final state of a lane on the step grid, derivatives from rhs evaluations.
  HistorySegment final_state(std::size_t lane) const;
  DenseTrajectory dense(std::size_t lane) const;

 private:
  double& y(std::size_t node, std::size_t c, std::size_t lane) { return values_[(node * sys_.n + c) * lanes_ + lane]; }
  double& d(std::size_t node, std::size_t c, std::size_t lane) { return derivs_[(node * sys_.n + c) * lanes_ + lane]; }
  double y(std::size_t node, std::size_t c, std::size_t lane) const { return values_[(node * sys_.n + c) * lanes_ + lane]; }
  double d(std::size_t node, std::size_t c, std::size_t lane) const { return derivs_[(node * sys_.n + c) * lanes_ + lane]; }

  DdeSystem sys_;
  double duration_;
  double step_;
  std::size_t delay_steps_;
  std::size_t total_steps_;
  std::size_t lanes_ = 0;
  std::vector<double> values_;
  std::vector<double> derivs_;
  std::vector<double> history_mid_;
  std::vector<double> stage_;
  std::vector<unsigned char> finite_;
};

}  // namespace dembed
