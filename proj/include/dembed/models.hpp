#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dembed/boxcover.hpp"
#include "dembed/dde.hpp"
#include "dembed/embedding.hpp"

namespace dembed {

struct ModelPreset {
  std::string name;
  DdeSystem system;
  EmbeddingConfig embedding;
  BoxRegion domain;
  std::vector<BoxRegion> excluded;
  std::vector<std::vector<double>> equilibria;  // constant solutions, in R^n
  std::string note;
};

/// u'(t) = -alpha u(t-1) (1 - u(t)^2)
DdeSystem wright_system(double alpha = 2.0);
/// u1' = u2, u2' = u3, u3' = -u3 - 2 u2(t - tau) + alpha u1 - u1^2
DdeSystem arneodo_system(double alpha = 2.5, double tau = 0.13);
/// u' = beta u(t-tau) / (1 + u(t-tau)^eta) - gamma u. Negative delayed
/// values give NaN (non-integer eta), which the integrator reports as blow-up.
DdeSystem mackey_glass_system(double beta = 2.0, double gamma = 1.0, double eta = 9.65, double tau = 2.0);
/// y'(t) = a y(t) + b y(t - tau)
DdeSystem linear_system(double a, double b, double tau);

/// alpha = 2, tau = 1, k = 5 (K = 4), m = 16, Q = [-2, 2]^5.
ModelPreset wright();
/// wright() with the open box of the given radius around the origin removed.
ModelPreset wright_orbit(double exclusion_radius = 0.1);
/// alpha = 2.5, tau = 0.13, R(u) = (u2(-tau), u2(-tau/2), u2(0), u1(0), u3(0)),
/// m = 15, Q = [-4,2] x [-4,4] x [-4,4] x [-1,5] x [-4,4] (u1 gets [-1,5]).
ModelPreset arneodo();
/// beta = 2, gamma = 1, eta = 9.65, tau = 2, k = 7 (K = 6), m = 12, Q = [0, 1.5]^7.
ModelPreset mackey_glass();

/// Names accepted by find_preset: wright, wright-orbit, arneodo, mackey-glass.
std::vector<std::string> preset_names();
std::optional<ModelPreset> find_preset(const std::string& name);

}  // namespace dembed
