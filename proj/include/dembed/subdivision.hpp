#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "dembed/boxcover.hpp"
#include "dembed/dde.hpp"
#include "dembed/embedding.hpp"

namespace dembed {

struct RunConfig {
  std::size_t steps = 1;                  // subdivision steps L
  std::size_t points_per_box = 100;
  std::uint64_t seed = 0;
  std::size_t max_payloads_per_box = 32;  // FIFO cap on stored images per box
  std::size_t threads = 0;                // 0: hardware concurrency

  void validate() const;
};

struct StepRecord {
  std::size_t depth = 0;
  std::size_t boxes_before = 0;  // after subdivision
  std::size_t boxes_after = 0;   // after selection
  std::size_t points_evaluated = 0;
  std::size_t payload_points = 0;  // evaluated points that carried a payload
  std::size_t skipped_points = 0;  // random test points drawn inside an excluded region
  std::size_t hits = 0;            // images landing in an active box
  std::size_t outside = 0;         // images outside the current covering
  std::size_t excluded = 0;        // images inside an excluded region
  std::size_t nonfinite = 0;       // discarded after blow-up
  double seconds = 0.0;
};

/// Per-step bookkeeping. The table and key-value forms leave out wall
/// times so identical runs produce identical bytes; timings are separate.
struct SelectionReport {
  std::vector<StepRecord> steps;

  void write_table(std::ostream& os) const;
  void write_kv(std::ostream& os) const;
  void write_timing(std::ostream& os) const;
};

/// A map R^k -> R^k evaluated in batches. Maps that thread bootstrap
/// payloads return one with every finite image.
class PointMap {
 public:
  struct Workspace {
    virtual ~Workspace() = default;
  };

  virtual ~PointMap() = default;
  virtual std::size_t dim() const = 0;
  virtual bool uses_payloads() const { return false; }
  virtual std::unique_ptr<Workspace> make_workspace() const { return std::make_unique<Workspace>(); }

  /// `points` is row-major with dim() columns; `payloads` is empty or holds
  /// one (possibly null) entry per point.
  virtual void evaluate(std::span<const double> points, std::span<const BootstrapPayload* const> payloads,
                        std::span<MapImage> out, Workspace& ws) const = 0;
};

/// phi_m of a delay equation.
class DdePointMap final : public PointMap {
 public:
  explicit DdePointMap(EmbeddedMap map) : map_(std::move(map)) {}

  std::size_t dim() const override { return map_.k(); }
  bool uses_payloads() const override { return true; }
  std::unique_ptr<Workspace> make_workspace() const override;
  void evaluate(std::span<const double> points, std::span<const BootstrapPayload* const> payloads,
                std::span<MapImage> out, Workspace& ws) const override;

  const EmbeddedMap& map() const noexcept { return map_; }

 private:
  EmbeddedMap map_;
};

using ExplicitMap = std::function<void(std::span<const double> x, std::span<double> image)>;

/// Explicit finite-dimensional map, for exercising the selection logic
/// without the delay equation machinery. Non-finite images are discarded.
class SyntheticMap final : public PointMap {
 public:
  SyntheticMap(std::size_t k, ExplicitMap f) : k_(k), f_(std::move(f)) {}

  std::size_t dim() const override { return k_; }
  void evaluate(std::span<const double> points, std::span<const BootstrapPayload* const> payloads,
                std::span<MapImage> out, Workspace& ws) const override;

 private:
  std::size_t k_;
  ExplicitMap f_;
};

struct SubdivisionResult {
  BoxCollection covering;
  SelectionReport report;
  /// Stored images per active box, aligned with covering.keys().
  std::vector<std::vector<BootstrapPayload>> payloads;
};

/// Called after every selection step with the new collection.
using StepCallback = std::function<void(const BoxCollection&, const StepRecord&)>;

/// Subdivision and selection for `rc.steps` steps starting from Q. Each step
/// bisects every box, draws test points per box (stored payload images
/// first, then uniform random points from a per-box seed), and keeps the
/// boxes hit by at least one image. If selection empties the collection the
/// run stops early and returns the empty covering; callers treat that as
/// the EmptyCollection outcome.
SubdivisionResult run_subdivision(const PointMap& map, const BoxRegion& q, const RunConfig& rc,
                                  std::vector<BoxRegion> excluded = {}, const StepCallback& on_step = {});

SubdivisionResult run_subdivision(const DdeSystem& sys, const EmbeddingConfig& cfg, const BoxRegion& q,
                                  const RunConfig& rc, std::vector<BoxRegion> excluded = {},
                                  const StepCallback& on_step = {}, std::size_t steps_per_delay = 0);

/// Same selection logic with phi replaced by an explicit map; no payloads.
SubdivisionResult test_hook_synthetic(const ExplicitMap& f, const BoxRegion& q, const RunConfig& rc,
                                      std::vector<BoxRegion> excluded = {}, const StepCallback& on_step = {});

/// Per-box random stream seed, independent of scheduling.
std::uint64_t box_seed(std::uint64_t seed, std::size_t depth, LeafKey key);

}  // namespace dembed
