#include "dembed/models.hpp"

#include <cmath>

namespace dembed {
namespace {

BoxRegion cube(std::size_t k, double lo, double hi) {
  const std::vector<double> lower(k, lo), upper(k, hi);
  return BoxRegion::from_bounds(lower, upper);
}

}  // namespace

DdeSystem wright_system(double alpha) {
  BatchRhs rhs = [alpha](const double* y, const double* yd, double* out, std::size_t lanes) {
    for (std::size_t l = 0; l < lanes; ++l) out[l] = -alpha * yd[l] * (1.0 - y[l] * y[l]);
  };
  return DdeSystem{1, 1.0, std::move(rhs), "wright"};
}

DdeSystem arneodo_system(double alpha, double tau) {
  BatchRhs rhs = [alpha](const double* y, const double* yd, double* out, std::size_t lanes) {
    const double* u1 = y;
    const double* u2 = y + lanes;
    const double* u3 = y + 2 * lanes;
    const double* u2d = yd + lanes;
    for (std::size_t l = 0; l < lanes; ++l) {
      out[l] = u2[l];
      out[lanes + l] = u3[l];
      out[2 * lanes + l] = -u3[l] - 2.0 * u2d[l] + alpha * u1[l] - u1[l] * u1[l];
    }
  };
  return DdeSystem{3, tau, std::move(rhs), "arneodo"};
}

DdeSystem mackey_glass_system(double beta, double gamma, double eta, double tau) {
  BatchRhs rhs = [beta, gamma, eta](const double* y, const double* yd, double* out, std::size_t lanes) {
    for (std::size_t l = 0; l < lanes; ++l) {
      out[l] = beta * yd[l] / (1.0 + std::pow(yd[l], eta)) - gamma * y[l];
    }
  };
  return DdeSystem{1, tau, std::move(rhs), "mackey-glass"};
}

DdeSystem linear_system(double a, double b, double tau) {
  BatchRhs rhs = [a, b](const double* y, const double* yd, double* out, std::size_t lanes) {
    for (std::size_t l = 0; l < lanes; ++l) out[l] = a * y[l] + b * yd[l];
  };
  return DdeSystem{1, tau, std::move(rhs), "linear"};
}

ModelPreset wright() {
  DdeSystem sys = wright_system(2.0);
  EmbeddingConfig cfg{ObservableLayout::scalar(sys.tau, 5), 16, 2.0, 0.0, 3};
  return ModelPreset{"wright", std::move(sys), std::move(cfg), cube(5, -2.0, 2.0), {},
                     {{0.0}, {1.0}, {-1.0}},
                     "modified Wright equation, alpha = 2 (beyond the Hopf point pi/2)"};
}

ModelPreset wright_orbit(double exclusion_radius) {
  ModelPreset p = wright();
  p.name = "wright-orbit";
  p.excluded.push_back(BoxRegion{std::vector<double>(5, 0.0), std::vector<double>(5, exclusion_radius)});
  p.note = "modified Wright equation with an open neighbourhood of the origin removed";
  return p;
}

ModelPreset arneodo() {
  const double tau = 0.13;
  DdeSystem sys = arneodo_system(2.5, tau);
  ObservableLayout layout(3, tau, {Observable{1, -tau, 3, 2}, Observable{0, 0.0, 1, 1}, Observable{2, 0.0, 1, 1}}, 2);
  EmbeddingConfig cfg{std::move(layout), 15, 2.0, 0.0, 3};
  // The usual Q intervals, assigned to the observables they bound: [-1, 5]
  // is the u1 range (around O2), [-4, 2] the first u2 sample. Read in the
  // order of R literally, the first interval cuts off u2 < -1 and a third
  // of the period-doubled orbit lies outside Q.
  const std::vector<double> lo{-4.0, -4.0, -4.0, -1.0, -4.0};
  const std::vector<double> hi{2.0, 4.0, 4.0, 5.0, 4.0};
  return ModelPreset{"arneodo", std::move(sys), std::move(cfg), BoxRegion::from_bounds(lo, hi), {},
                     {{0.0, 0.0, 0.0}, {2.5, 0.0, 0.0}},
                     "Arneodo system with delayed damping, alpha = 2.5, tau = 0.13 (after period doubling)"};
}

ModelPreset mackey_glass() {
  DdeSystem sys = mackey_glass_system(2.0, 1.0, 9.65, 2.0);
  EmbeddingConfig cfg{ObservableLayout::scalar(sys.tau, 7), 12, 2.0, 0.0, 3};
  return ModelPreset{"mackey-glass", std::move(sys), std::move(cfg), cube(7, 0.0, 1.5), {},
                     {{0.0}, {1.0}},
                     "Mackey-Glass equation, beta = 2, gamma = 1, eta = 9.65, tau = 2"};
}

std::vector<std::string> preset_names() { return {"wright", "wright-orbit", "arneodo", "mackey-glass"}; }

std::optional<ModelPreset> find_preset(const std::string& name) {
  if (name == "wright") return wright();
  if (name == "wright-orbit") return wright_orbit();
  if (name == "arneodo") return arneodo();
  if (name == "mackey-glass") return mackey_glass();
  return std::nullopt;
}

}  // namespace dembed
