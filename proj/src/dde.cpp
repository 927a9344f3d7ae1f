#include "dembed/dde.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "dembed/error.hpp"
#include "dembed/kernels.hpp"

namespace dembed {

DdeSystem make_system(std::size_t n, double tau, PointRhs rhs, std::string name) {
  BatchRhs batch = [n, f = std::move(rhs)](const double* y, const double* yd, double* out, std::size_t lanes) {
    std::vector<double> a(n), b(n), r(n);
    for (std::size_t l = 0; l < lanes; ++l) {
      for (std::size_t c = 0; c < n; ++c) {
        a[c] = y[c * lanes + l];
        b[c] = yd[c * lanes + l];
      }
      f(a, b, r);
      for (std::size_t c = 0; c < n; ++c) out[c * lanes + l] = r[c];
    }
  };
  return DdeSystem{n, tau, std::move(batch), std::move(name)};
}

DenseTrajectory::DenseTrajectory(std::size_t n, double t0, double step, std::vector<double> values,
                                 std::vector<double> derivs)
    : n_(n), t0_(t0), step_(step), values_(std::move(values)), derivs_(std::move(derivs)) {}

void DenseTrajectory::evaluate(double t, std::span<double> out) const {
  const std::size_t cells = nodes() - 1;
  const double x = (t - t0_) / step_;
  if (!(x >= -1e-9 && x <= static_cast<double>(cells) + 1e-9)) {
    throw Error(ErrorKind::OutOfDomain, "time outside the dense trajectory");
  }
  const double nearest = std::round(x);
  if (std::fabs(x - nearest) <= 1e-9) {
    const auto i = static_cast<std::size_t>(nearest);
    for (std::size_t c = 0; c < n_; ++c) out[c] = values_[i * n_ + c];
    return;
  }
  const auto i = static_cast<std::size_t>(std::floor(x));
  const double th = x - static_cast<double>(i);
  const double t2 = th * th;
  const double t3 = t2 * th;
  for (std::size_t c = 0; c < n_; ++c) {
    out[c] = (2.0 * t3 - 3.0 * t2 + 1.0) * values_[i * n_ + c] +
             (t3 - 2.0 * t2 + th) * step_ * derivs_[i * n_ + c] +
             (-2.0 * t3 + 3.0 * t2) * values_[(i + 1) * n_ + c] + (t3 - t2) * step_ * derivs_[(i + 1) * n_ + c];
  }
}

void DenseTrajectory::write_text(std::ostream& os, double time_offset) const {
  char buf[32];
  for (std::size_t i = 0; i < nodes(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", time_offset + time(i));
    os << buf;
    for (std::size_t c = 0; c < n_; ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", values_[i * n_ + c]);
      os << ' ' << buf;
    }
    os << '\n';
  }
}

std::size_t whole_steps(double span, double step, const char* what) {
  if (!(step > 0.0) || !(span > 0.0) || !std::isfinite(span) || !std::isfinite(step)) {
    throw Error(ErrorKind::InvalidArgument, std::string(what) + " and step must be positive");
  }
  const double ratio = span / step;
  const double nearest = std::round(ratio);
  if (nearest < 1.0 || std::fabs(ratio - nearest) > 1e-12 * ratio) {
    throw Error(ErrorKind::InvalidArgument, std::string("step does not divide ") + what);
  }
  return static_cast<std::size_t>(nearest);
}

BatchIntegrator::BatchIntegrator(DdeSystem sys, double duration, double step)
    : sys_(std::move(sys)), duration_(duration), step_(step) {
  delay_steps_ = whole_steps(sys_.tau, step_, "the delay");
  total_steps_ = whole_steps(duration_, step_, "the duration");
}

void BatchIntegrator::run(std::span<const HistorySegment* const> initial) {
  const std::size_t n = sys_.n;
  const std::size_t S = delay_steps_;
  const std::size_t nodes = S + total_steps_ + 1;
  lanes_ = initial.size();
  const std::size_t L = lanes_;
  const std::size_t row = n * L;
  values_.assign(nodes * row, 0.0);
  derivs_.assign(nodes * row, 0.0);
  history_mid_.assign(S * row, 0.0);
  stage_.assign(7 * row, 0.0);
  finite_.assign(L, 1);

  for (std::size_t l = 0; l < L; ++l) {
    const HistorySegment& h = *initial[l];
    if (h.dim() != n || std::fabs(h.tau() - sys_.tau) > 1e-12 * sys_.tau) {
      throw Error(ErrorKind::InvalidArgument, "initial history does not match the system");
    }
    for (std::size_t j = 0; j <= S; ++j) {
      const double t = -sys_.tau * static_cast<double>(S - j) / static_cast<double>(S);
      for (std::size_t c = 0; c < n; ++c) {
        y(j, c, l) = h.evaluate(t, c);
        d(j, c, l) = h.derivative(t, c);
      }
    }
    for (std::size_t j = 0; j < S; ++j) {
      const double t = -sys_.tau * (static_cast<double>(S - j) - 0.5) / static_cast<double>(S);
      for (std::size_t c = 0; c < n; ++c) history_mid_[(j * n + c) * L + l] = h.evaluate(t, c);
    }
  }

  const kernels::KernelTable& k = kernels::active();
  const double h = step_;
  double* k2 = stage_.data();
  double* k3 = k2 + row;
  double* k4 = k3 + row;
  double* tmp = k4 + row;
  double* delayed_mid = tmp + row;
  for (std::size_t j = S; j < S + total_steps_; ++j) {
    const std::size_t jd = j - S;
    const double* yj = values_.data() + j * row;
    const double* yd0 = values_.data() + jd * row;
    const double* yd1 = yd0 + row;
    double* k1 = derivs_.data() + j * row;

    sys_.rhs(yj, yd0, k1, L);
    const double* ydm = delayed_mid;
    if (jd < S) {
      ydm = history_mid_.data() + jd * row;
    } else {
      k.hermite_midpoint(yd0, yd1, derivs_.data() + jd * row, derivs_.data() + (jd + 1) * row, h, delayed_mid, row);
    }
    k.axpy(yj, k1, 0.5 * h, tmp, row);
    sys_.rhs(tmp, ydm, k2, L);
    k.axpy(yj, k2, 0.5 * h, tmp, row);
    sys_.rhs(tmp, ydm, k3, L);
    k.axpy(yj, k3, h, tmp, row);
    sys_.rhs(tmp, yd1, k4, L);
    double* next = values_.data() + (j + 1) * row;
    k.rk4_combine(yj, k1, k2, k3, k4, h, next, row);
    for (std::size_t c = 0; c < n; ++c) k.clear_nonfinite(next + c * L, finite_.data(), L);
  }
  const std::size_t last = S + total_steps_;
  sys_.rhs(values_.data() + last * row, values_.data() + (last - S) * row, derivs_.data() + last * row, L);
  for (std::size_t c = 0; c < n; ++c) k.clear_nonfinite(derivs_.data() + last * row + c * L, finite_.data(), L);
}

HistorySegment BatchIntegrator::final_state(std::size_t lane) const {
  const std::size_t n = sys_.n;
  const std::size_t S = delay_steps_;
  const std::size_t first = total_steps_;
  std::vector<double> vals((S + 1) * n);
  std::vector<double> ders((S + 1) * n);
  for (std::size_t j = 0; j <= S; ++j) {
    for (std::size_t c = 0; c < n; ++c) {
      vals[j * n + c] = y(first + j, c, lane);
      ders[j * n + c] = d(first + j, c, lane);
    }
  }
  return HistorySegment(n, sys_.tau, std::move(vals), std::move(ders));
}

DenseTrajectory BatchIntegrator::dense(std::size_t lane) const {
  const std::size_t n = sys_.n;
  const std::size_t nodes = delay_steps_ + total_steps_ + 1;
  std::vector<double> vals(nodes * n);
  std::vector<double> ders(nodes * n);
  for (std::size_t j = 0; j < nodes; ++j) {
    for (std::size_t c = 0; c < n; ++c) {
      vals[j * n + c] = y(j, c, lane);
      ders[j * n + c] = d(j, c, lane);
    }
  }
  return DenseTrajectory(n, -sys_.tau, step_, std::move(vals), std::move(ders));
}

IntegrationResult integrate(const DdeSystem& sys, const HistorySegment& h0, double duration, double step) {
  BatchIntegrator integrator(sys, duration, step);
  const HistorySegment* lanes[] = {&h0};
  integrator.run(lanes);
  if (!integrator.finite(0)) throw Error(ErrorKind::NonFiniteState, "solution blew up");
  return IntegrationResult{integrator.final_state(0), integrator.dense(0)};
}

}  // namespace dembed
