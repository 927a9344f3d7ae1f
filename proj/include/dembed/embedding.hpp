#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dembed/dde.hpp"
#include "dembed/history.hpp"

namespace dembed {

/// Observable f(u) = u_component(nu), read `count` times with spacing
/// tau / divisor. Components are zero-based here; the config file uses
/// one-based indices.
struct Observable {
  std::size_t component = 0;
  double nu = 0.0;
  std::size_t count = 1;
  std::size_t divisor = 1;
};

/// One embedding coordinate: which component is read at which time.
struct SamplePoint {
  std::size_t component;
  double time;
  std::size_t grid_units;  // time = -tau + grid_units * tau / grid_divisions()
};

/// Knots used to rebuild one state component from a point and a payload.
struct ComponentPlan {
  std::vector<std::size_t> node_coords;  // embedding coordinates on this component, by time
  std::vector<double> node_times;
  std::vector<double> extra_times;       // times whose values a payload stores
};

/// Ordered observables defining the restriction R and the embedding
/// dimension k = sum of counts. `divisor` K fixes the map time span
/// omega = tau / K.
class ObservableLayout {
 public:
  ObservableLayout(std::size_t n, double tau, std::vector<Observable> observables, std::size_t divisor);

  /// n = 1, u(-tau + i * tau / (k - 1)) for i = 0..k-1; K = k - 1.
  static ObservableLayout scalar(double tau, std::size_t k);

  std::size_t dim() const noexcept { return n_; }
  std::size_t k() const noexcept { return samples_.size(); }
  double tau() const noexcept { return tau_; }
  std::size_t divisor() const noexcept { return divisor_; }
  double omega() const noexcept { return tau_ / static_cast<double>(divisor_); }
  const std::vector<Observable>& observables() const noexcept { return observables_; }
  const std::vector<SamplePoint>& samples() const noexcept { return samples_; }

  /// Every sample time, and every omega step, is a multiple of tau / grid_divisions().
  std::size_t grid_divisions() const noexcept { return grid_; }

  /// Per-component knot plan for payloads with p extra values per interval.
  /// A component read at two or more times is bracketed by -tau and 0; one
  /// read at most once is completed with the omega grid. Every gap between
  /// consecutive knots then receives p equally spaced extra times.
  std::vector<ComponentPlan> payload_plan(std::size_t p) const;

  /// Number of extra values a payload carries for this layout and p.
  std::size_t payload_extras(std::size_t p) const;

 private:
  std::size_t n_;
  double tau_;
  std::vector<Observable> observables_;
  std::size_t divisor_;
  std::size_t grid_;
  std::vector<SamplePoint> samples_;
};

struct EmbeddingConfig {
  ObservableLayout layout;
  std::size_t m = 1;         // iteration exponent
  double d_bound = 0.0;      // box-counting dimension bound
  double sigma_bound = 0.0;  // thickness exponent bound
  std::size_t p = 3;         // payload extras per interval

  /// Throws InvalidArgument for m = 0.
  void validate() const;

  /// Set when k > 2 (1 + sigma) d fails.
  std::optional<std::string> dimension_warning() const;
};

/// Stored image of an earlier map evaluation: the point and dense samples of
/// the state it came from, laid out as in ObservableLayout::payload_plan.
struct BootstrapPayload {
  std::vector<double> z;
  std::vector<double> extras;
};

/// Restriction R: samples the state at the layout's times.
std::vector<double> restrict_state(const HistorySegment& state, const ObservableLayout& layout);

/// Piecewise-linear E: each component interpolates its layout nodes, is
/// constant beyond them, and is 0 if never observed. R(E(z)) = z.
HistorySegment embed_initial(std::span<const double> z, const ObservableLayout& layout);

/// Spline E: natural cubic spline per component through the layout nodes
/// (values from z) and the payload extras, sampled with derivatives on
/// `intervals` cells (a multiple of layout.grid_divisions()).
HistorySegment embed_bootstrap(std::span<const double> z, const BootstrapPayload& payload,
                               const ObservableLayout& layout, std::size_t p, std::size_t intervals);

/// Reads a payload (point and extras) off a state.
BootstrapPayload make_payload(const HistorySegment& state, const ObservableLayout& layout, std::size_t p);

struct MapImage {
  std::vector<double> z;
  BootstrapPayload payload;
  bool finite = true;
};

/// phi_m = R o Phi^(m omega) o E for a delay equation.
class EmbeddedMap {
 public:
  /// steps_per_delay = 0 picks the smallest multiple of the layout grid that
  /// is at least 256.
  EmbeddedMap(DdeSystem sys, EmbeddingConfig cfg, std::size_t steps_per_delay = 0);

  const DdeSystem& system() const noexcept { return sys_; }
  const EmbeddingConfig& config() const noexcept { return cfg_; }
  std::size_t k() const noexcept { return cfg_.layout.k(); }
  std::size_t steps_per_delay() const noexcept { return steps_per_delay_; }
  double step() const noexcept { return sys_.tau / static_cast<double>(steps_per_delay_); }
  double duration() const noexcept { return static_cast<double>(cfg_.m) * cfg_.layout.omega(); }

  /// Initial state for z: spline bootstrap when a payload is given, else linear.
  HistorySegment embed(std::span<const double> z, const BootstrapPayload* payload) const;

  MapImage operator()(std::span<const double> z, const BootstrapPayload* payload = nullptr) const;

  BatchIntegrator make_integrator() const { return BatchIntegrator(sys_, duration(), step()); }

  /// Evaluates points (row-major, k columns) in lockstep batches. `payloads`
  /// is empty or has one entry (possibly null) per point.
  void evaluate(std::span<const double> points, std::span<const BootstrapPayload* const> payloads,
                std::span<MapImage> out, BatchIntegrator& integrator) const;

  static constexpr std::size_t kBatchLanes = 8;

 private:
  DdeSystem sys_;
  EmbeddingConfig cfg_;
  std::size_t steps_per_delay_;
};

}  // namespace dembed
