#include "dembed/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "dembed/error.hpp"
#include "dembed/spline.hpp"

namespace dembed {
namespace {

double grid_time(double tau, std::size_t units, std::size_t divisions) {
  return -tau * static_cast<double>(divisions - units) / static_cast<double>(divisions);
}

// Adds p equally spaced points strictly inside each gap of `knots`.
void add_interior(const std::vector<double>& knots, std::size_t p, std::vector<double>& out) {
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double a = knots[i];
    const double b = knots[i + 1];
    for (std::size_t q = 1; q <= p; ++q) {
      out.push_back(a + (b - a) * static_cast<double>(q) / static_cast<double>(p + 1));
    }
  }
}

}  // namespace

ObservableLayout::ObservableLayout(std::size_t n, double tau, std::vector<Observable> observables,
                                   std::size_t divisor)
    : n_(n), tau_(tau), observables_(std::move(observables)), divisor_(divisor), grid_(divisor) {
  if (n_ == 0 || !(tau_ > 0.0)) throw Error(ErrorKind::LayoutMismatch, "layout needs n >= 1 and tau > 0");
  if (divisor_ == 0) throw Error(ErrorKind::LayoutMismatch, "divisor K must be positive");
  if (observables_.empty()) throw Error(ErrorKind::LayoutMismatch, "layout has no observables");
  for (const Observable& o : observables_) {
    if (o.component >= n_) throw Error(ErrorKind::LayoutMismatch, "observable component out of range");
    if (o.count == 0 || o.divisor == 0) throw Error(ErrorKind::LayoutMismatch, "observable count and divisor must be positive");
    grid_ = std::lcm(grid_, o.divisor);
  }
  for (const Observable& o : observables_) {
    const double start = (o.nu + tau_) / tau_ * static_cast<double>(grid_);
    const double rounded = std::round(start);
    if (std::fabs(start - rounded) > 1e-9 || rounded < 0.0 || rounded > static_cast<double>(grid_)) {
      throw Error(ErrorKind::LayoutMismatch, "observable offset nu must be a grid time in [-tau, 0]");
    }
    const auto first = static_cast<std::size_t>(rounded);
    const std::size_t stride = grid_ / o.divisor;
    if (first + (o.count - 1) * stride > grid_) {
      throw Error(ErrorKind::LayoutMismatch, "observable samples run past t = 0");
    }
    for (std::size_t i = 0; i < o.count; ++i) {
      const std::size_t units = first + i * stride;
      samples_.push_back({o.component, grid_time(tau_, units, grid_), units});
    }
  }
  for (std::size_t a = 0; a < samples_.size(); ++a) {
    for (std::size_t b = a + 1; b < samples_.size(); ++b) {
      if (samples_[a].component == samples_[b].component && samples_[a].grid_units == samples_[b].grid_units) {
        throw Error(ErrorKind::LayoutMismatch, "two embedding coordinates read the same value");
      }
    }
  }
}

ObservableLayout ObservableLayout::scalar(double tau, std::size_t k) {
  if (k < 2) throw Error(ErrorKind::LayoutMismatch, "scalar layout needs k >= 2");
  return ObservableLayout(1, tau, {Observable{0, -tau, k, k - 1}}, k - 1);
}

std::vector<ComponentPlan> ObservableLayout::payload_plan(std::size_t p) const {
  std::vector<ComponentPlan> plans(n_);
  for (std::size_t c = 0; c < n_; ++c) {
    std::vector<std::pair<std::size_t, std::size_t>> nodes;  // (grid units, coordinate)
    for (std::size_t i = 0; i < samples_.size(); ++i) {
      if (samples_[i].component == c) nodes.emplace_back(samples_[i].grid_units, i);
    }
    std::sort(nodes.begin(), nodes.end());
    ComponentPlan& plan = plans[c];
    std::vector<std::size_t> knot_units;
    for (const auto& [units, coord] : nodes) {
      plan.node_coords.push_back(coord);
      plan.node_times.push_back(grid_time(tau_, units, grid_));
      knot_units.push_back(units);
    }
    if (nodes.size() >= 2) {
      knot_units.push_back(0);
      knot_units.push_back(grid_);
    } else {
      const std::size_t stride = grid_ / divisor_;
      for (std::size_t i = 0; i <= divisor_; ++i) knot_units.push_back(i * stride);
    }
    std::sort(knot_units.begin(), knot_units.end());
    knot_units.erase(std::unique(knot_units.begin(), knot_units.end()), knot_units.end());
    std::vector<double> knots;
    for (std::size_t units : knot_units) {
      knots.push_back(grid_time(tau_, units, grid_));
      const bool is_node = std::any_of(nodes.begin(), nodes.end(), [&](const auto& nd) { return nd.first == units; });
      if (!is_node) plan.extra_times.push_back(knots.back());
    }
    add_interior(knots, p, plan.extra_times);
    std::sort(plan.extra_times.begin(), plan.extra_times.end());
  }
  return plans;
}

std::size_t ObservableLayout::payload_extras(std::size_t p) const {
  std::size_t total = 0;
  for (const ComponentPlan& plan : payload_plan(p)) total += plan.extra_times.size();
  return total;
}

void EmbeddingConfig::validate() const {
  if (m == 0) throw Error(ErrorKind::InvalidArgument, "iteration exponent m must be >= 1");
  if (d_bound < 0.0 || sigma_bound < 0.0) throw Error(ErrorKind::InvalidArgument, "dimension bounds must be >= 0");
}

std::optional<std::string> EmbeddingConfig::dimension_warning() const {
  const double needed = 2.0 * (1.0 + sigma_bound) * d_bound;
  if (static_cast<double>(layout.k()) > needed) return std::nullopt;
  std::ostringstream os;
  os << "embedding dimension k = " << layout.k() << " does not exceed 2(1+sigma)d = " << needed
     << "; the reconstruction may not be one-to-one";
  return os.str();
}

std::vector<double> restrict_state(const HistorySegment& state, const ObservableLayout& layout) {
  if (state.dim() != layout.dim() || std::fabs(state.tau() - layout.tau()) > 1e-12 * layout.tau()) {
    throw Error(ErrorKind::LayoutMismatch, "state does not match the layout's n and tau");
  }
  std::vector<double> z;
  z.reserve(layout.k());
  for (const SamplePoint& s : layout.samples()) z.push_back(state.evaluate(s.time, s.component));
  return z;
}

HistorySegment embed_initial(std::span<const double> z, const ObservableLayout& layout) {
  if (z.size() != layout.k()) throw Error(ErrorKind::LayoutMismatch, "point dimension differs from k");
  for (double v : z) {
    if (!std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, "embedding a non-finite point");
  }
  const std::size_t n = layout.dim();
  const std::size_t grid = layout.grid_divisions();
  std::vector<double> values((grid + 1) * n, 0.0);
  for (std::size_t c = 0; c < n; ++c) {
    std::vector<std::pair<std::size_t, double>> nodes;
    for (std::size_t i = 0; i < layout.k(); ++i) {
      if (layout.samples()[i].component == c) nodes.emplace_back(layout.samples()[i].grid_units, z[i]);
    }
    if (nodes.empty()) continue;
    std::sort(nodes.begin(), nodes.end());
    std::size_t seg = 0;
    for (std::size_t g = 0; g <= grid; ++g) {
      double v;
      if (g <= nodes.front().first) {
        v = nodes.front().second;
      } else if (g >= nodes.back().first) {
        v = nodes.back().second;
      } else {
        while (nodes[seg + 1].first < g) ++seg;
        const auto [u0, v0] = nodes[seg];
        const auto [u1, v1] = nodes[seg + 1];
        if (g == u1) {
          v = v1;
        } else {
          const double w = static_cast<double>(g - u0) / static_cast<double>(u1 - u0);
          v = (1.0 - w) * v0 + w * v1;
        }
      }
      values[g * n + c] = v;
    }
  }
  return HistorySegment(n, layout.tau(), std::move(values));
}

HistorySegment embed_bootstrap(std::span<const double> z, const BootstrapPayload& payload,
                               const ObservableLayout& layout, std::size_t p, std::size_t intervals) {
  if (z.size() != layout.k()) throw Error(ErrorKind::LayoutMismatch, "point dimension differs from k");
  if (intervals == 0 || intervals % layout.grid_divisions() != 0) {
    throw Error(ErrorKind::InvalidArgument, "bootstrap grid must refine the layout grid");
  }
  const std::vector<ComponentPlan> plans = layout.payload_plan(p);
  std::size_t expected = 0;
  for (const ComponentPlan& plan : plans) expected += plan.extra_times.size();
  if (payload.extras.size() != expected) throw Error(ErrorKind::LayoutMismatch, "payload size does not fit the layout");

  const std::size_t n = layout.dim();
  const double tau = layout.tau();
  std::vector<double> values((intervals + 1) * n);
  std::vector<double> derivs((intervals + 1) * n);
  std::size_t offset = 0;
  for (std::size_t c = 0; c < n; ++c) {
    const ComponentPlan& plan = plans[c];
    std::vector<std::pair<double, double>> knots;
    for (std::size_t i = 0; i < plan.node_coords.size(); ++i) knots.emplace_back(plan.node_times[i], z[plan.node_coords[i]]);
    for (std::size_t i = 0; i < plan.extra_times.size(); ++i) knots.emplace_back(plan.extra_times[i], payload.extras[offset + i]);
    offset += plan.extra_times.size();
    std::sort(knots.begin(), knots.end());
    std::vector<double> xs, ys;
    for (const auto& [t, v] : knots) {
      xs.push_back(t);
      ys.push_back(v);
    }
    const NaturalSpline spline(std::move(xs), std::move(ys));
    for (std::size_t g = 0; g <= intervals; ++g) {
      const double t = grid_time(tau, g, intervals);
      values[g * n + c] = spline.value(t);
      derivs[g * n + c] = spline.slope(t);
    }
  }
  // Layout nodes sit on grid nodes; pin them so R(E(z)) = z holds bitwise.
  const std::size_t scale = intervals / layout.grid_divisions();
  for (std::size_t i = 0; i < layout.k(); ++i) {
    const SamplePoint& s = layout.samples()[i];
    values[s.grid_units * scale * n + s.component] = z[i];
  }
  return HistorySegment(n, tau, std::move(values), std::move(derivs));
}

BootstrapPayload make_payload(const HistorySegment& state, const ObservableLayout& layout, std::size_t p) {
  BootstrapPayload payload;
  payload.z = restrict_state(state, layout);
  const std::vector<ComponentPlan> plans = layout.payload_plan(p);
  for (std::size_t c = 0; c < plans.size(); ++c) {
    for (double t : plans[c].extra_times) payload.extras.push_back(state.evaluate(t, c));
  }
  return payload;
}

EmbeddedMap::EmbeddedMap(DdeSystem sys, EmbeddingConfig cfg, std::size_t steps_per_delay)
    : sys_(std::move(sys)), cfg_(std::move(cfg)), steps_per_delay_(steps_per_delay) {
  cfg_.validate();
  if (sys_.n != cfg_.layout.dim() || std::fabs(sys_.tau - cfg_.layout.tau()) > 1e-12 * sys_.tau) {
    throw Error(ErrorKind::LayoutMismatch, "layout does not match the system's n and tau");
  }
  const std::size_t base = cfg_.layout.grid_divisions();
  if (steps_per_delay_ == 0) steps_per_delay_ = base * ((256 + base - 1) / base);
  if (steps_per_delay_ % base != 0) {
    throw Error(ErrorKind::InvalidArgument, "steps per delay must be a multiple of the layout grid");
  }
}

HistorySegment EmbeddedMap::embed(std::span<const double> z, const BootstrapPayload* payload) const {
  if (payload != nullptr) return embed_bootstrap(z, *payload, cfg_.layout, cfg_.p, steps_per_delay_);
  return embed_initial(z, cfg_.layout);
}

MapImage EmbeddedMap::operator()(std::span<const double> z, const BootstrapPayload* payload) const {
  BatchIntegrator integrator = make_integrator();
  MapImage out;
  const BootstrapPayload* payloads[] = {payload};
  evaluate(z, payloads, std::span<MapImage>(&out, 1), integrator);
  return out;
}

void EmbeddedMap::evaluate(std::span<const double> points, std::span<const BootstrapPayload* const> payloads,
                           std::span<MapImage> out, BatchIntegrator& integrator) const {
  const std::size_t k = this->k();
  const std::size_t count = points.size() / k;
  if (points.size() != count * k || out.size() != count || (!payloads.empty() && payloads.size() != count)) {
    throw Error(ErrorKind::InvalidArgument, "batch shapes do not match");
  }
  std::vector<HistorySegment> histories;
  std::vector<const HistorySegment*> lanes;
  for (std::size_t first = 0; first < count; first += kBatchLanes) {
    const std::size_t batch = std::min(kBatchLanes, count - first);
    histories.clear();
    lanes.clear();
    for (std::size_t i = 0; i < batch; ++i) {
      const BootstrapPayload* payload = payloads.empty() ? nullptr : payloads[first + i];
      histories.push_back(embed(points.subspan((first + i) * k, k), payload));
    }
    for (const HistorySegment& h : histories) lanes.push_back(&h);
    integrator.run(lanes);
    for (std::size_t i = 0; i < batch; ++i) {
      MapImage& img = out[first + i];
      img.finite = integrator.finite(i);
      if (!img.finite) {
        img.z.clear();
        img.payload = {};
        continue;
      }
      img.payload = make_payload(integrator.final_state(i), cfg_.layout, cfg_.p);
      img.z = img.payload.z;
    }
  }
}

}  // namespace dembed
