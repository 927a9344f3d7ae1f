#include "dembed/subdivision.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <ostream>
#include <random>
#include <thread>

#include "dembed/error.hpp"

namespace dembed {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

enum class Fate : unsigned char { Hit, Outside, Excluded, NonFinite };

struct Outcome {
  Fate fate;
  std::size_t target;  // index into the subdivided collection when fate == Hit
  BootstrapPayload payload;
};

struct BoxWork {
  std::vector<Outcome> outcomes;
  std::size_t payload_points = 0;
  std::size_t skipped = 0;
};

class DdeWorkspace final : public PointMap::Workspace {
 public:
  explicit DdeWorkspace(BatchIntegrator integrator) : integrator(std::move(integrator)) {}
  BatchIntegrator integrator;
};

// Runs fn(i) for i in [0, count) on up to `threads` workers.
template <class Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i, 0);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i, w);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(count);
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

void RunConfig::validate() const {
  if (steps == 0) throw Error(ErrorKind::InvalidArgument, "steps must be >= 1");
  if (points_per_box == 0) throw Error(ErrorKind::InvalidArgument, "points_per_box must be >= 1");
  if (steps > BoxCollection::kMaxDepth) throw Error(ErrorKind::InvalidArgument, "steps must be <= 64");
}

std::uint64_t box_seed(std::uint64_t seed, std::size_t depth, LeafKey key) {
  return splitmix64(splitmix64(seed ^ splitmix64(depth)) ^ key);
}

void SelectionReport::write_table(std::ostream& os) const {
  char line[256];
  std::snprintf(line, sizeof line, "%5s %10s %10s %10s %9s %8s %10s %10s %9s %9s\n", "depth", "before", "after",
                "evaluated", "payload", "skipped", "hits", "outside", "excluded", "nonfinite");
  os << line;
  for (const StepRecord& r : steps) {
    std::snprintf(line, sizeof line, "%5zu %10zu %10zu %10zu %9zu %8zu %10zu %10zu %9zu %9zu\n", r.depth,
                  r.boxes_before, r.boxes_after, r.points_evaluated, r.payload_points, r.skipped_points, r.hits,
                  r.outside, r.excluded, r.nonfinite);
    os << line;
  }
}

void SelectionReport::write_kv(std::ostream& os) const {
  os << "steps = " << steps.size() << '\n';
  for (const StepRecord& r : steps) {
    const std::string p = "step." + std::to_string(r.depth) + ".";
    os << p << "boxes_before = " << r.boxes_before << '\n'
       << p << "boxes_after = " << r.boxes_after << '\n'
       << p << "points_evaluated = " << r.points_evaluated << '\n'
       << p << "payload_points = " << r.payload_points << '\n'
       << p << "skipped_points = " << r.skipped_points << '\n'
       << p << "hits = " << r.hits << '\n'
       << p << "outside = " << r.outside << '\n'
       << p << "excluded = " << r.excluded << '\n'
       << p << "nonfinite = " << r.nonfinite << '\n';
  }
  if (!steps.empty()) os << "final.boxes = " << steps.back().boxes_after << '\n';
}

void SelectionReport::write_timing(std::ostream& os) const {
  double total = 0.0;
  for (const StepRecord& r : steps) {
    os << "step." << r.depth << ".seconds = " << r.seconds << '\n';
    total += r.seconds;
  }
  os << "total.seconds = " << total << '\n';
}

std::unique_ptr<PointMap::Workspace> DdePointMap::make_workspace() const {
  return std::make_unique<DdeWorkspace>(map_.make_integrator());
}

void DdePointMap::evaluate(std::span<const double> points, std::span<const BootstrapPayload* const> payloads,
                           std::span<MapImage> out, Workspace& ws) const {
  map_.evaluate(points, payloads, out, static_cast<DdeWorkspace&>(ws).integrator);
}

void SyntheticMap::evaluate(std::span<const double> points, std::span<const BootstrapPayload* const>,
                            std::span<MapImage> out, Workspace&) const {
  for (std::size_t i = 0; i < out.size(); ++i) {
    MapImage& img = out[i];
    img.z.assign(k_, 0.0);
    img.payload = {};
    f_(points.subspan(i * k_, k_), img.z);
    img.finite = std::all_of(img.z.begin(), img.z.end(), [](double v) { return std::isfinite(v); });
  }
}

SubdivisionResult run_subdivision(const PointMap& map, const BoxRegion& q, const RunConfig& rc,
                                  std::vector<BoxRegion> excluded, const StepCallback& on_step) {
  rc.validate();
  q.validate();
  const std::size_t k = map.dim();
  if (q.dim() != k) throw Error(ErrorKind::InvalidArgument, "domain dimension differs from the map dimension");
  const bool threaded_payloads = map.uses_payloads();
  const std::size_t threads = rc.threads != 0 ? rc.threads : std::max(1U, std::thread::hardware_concurrency());

  std::vector<std::unique_ptr<PointMap::Workspace>> workspaces;
  for (std::size_t w = 0; w < threads; ++w) workspaces.push_back(map.make_workspace());

  SubdivisionResult result{BoxCollection(q, std::move(excluded)), {}, {}};
  result.payloads.assign(1, {});

  for (std::size_t step = 1; step <= rc.steps; ++step) {
    const auto started = std::chrono::steady_clock::now();
    const BoxCollection& prev = result.covering;
    BoxCollection cur = prev.subdivide();
    const std::size_t depth = cur.depth();

    // Hand stored images down to the child that contains them.
    std::vector<std::vector<const BootstrapPayload*>> carried(cur.size());
    if (threaded_payloads) {
      for (std::size_t i = 0; i < prev.size(); ++i) {
        for (const BootstrapPayload& pl : result.payloads[i]) {
          const std::optional<LeafKey> cell = cur.cell_of(pl.z);
          if (!cell || (*cell >> 1) != prev.keys()[i]) continue;
          carried[2 * i + (*cell & 1U)].push_back(&pl);
        }
      }
    }

    std::vector<BoxWork> work(cur.size());
    parallel_for(cur.size(), threads, [&](std::size_t b, std::size_t worker) {
      BoxWork& bw = work[b];
      const LeafKey key = cur.keys()[b];
      const BoxRegion box = cur.box(key);
      std::vector<double> points;
      std::vector<const BootstrapPayload*> payloads;
      points.reserve(rc.points_per_box * k);
      const std::size_t carried_count = std::min({carried[b].size(), rc.points_per_box, rc.max_payloads_per_box});
      for (std::size_t i = 0; i < carried_count; ++i) {
        const BootstrapPayload* pl = carried[b][i];
        points.insert(points.end(), pl->z.begin(), pl->z.end());
        payloads.push_back(pl);
      }
      bw.payload_points = carried_count;
      std::mt19937_64 rng(box_seed(rc.seed, depth, key));
      std::vector<double> x(k);
      for (std::size_t i = carried_count; i < rc.points_per_box; ++i) {
        for (std::size_t c = 0; c < k; ++c) {
          x[c] = box.center[c] - box.radius[c] + unit_uniform(rng) * (2.0 * box.radius[c]);
        }
        if (cur.excluded_point(x)) {
          ++bw.skipped;
          continue;
        }
        points.insert(points.end(), x.begin(), x.end());
        payloads.push_back(nullptr);
      }
      const std::size_t count = payloads.size();
      std::vector<MapImage> images(count);
      map.evaluate(points, threaded_payloads ? std::span<const BootstrapPayload* const>(payloads)
                                             : std::span<const BootstrapPayload* const>(),
                   images, *workspaces[worker]);
      bw.outcomes.reserve(count);
      for (MapImage& img : images) {
        if (!img.finite) {
          bw.outcomes.push_back({Fate::NonFinite, 0, {}});
        } else if (cur.excluded_point(img.z)) {
          bw.outcomes.push_back({Fate::Excluded, 0, {}});
        } else if (const std::optional<std::size_t> target = cur.locate(img.z)) {
          bw.outcomes.push_back({Fate::Hit, *target, std::move(img.payload)});
        } else {
          bw.outcomes.push_back({Fate::Outside, 0, {}});
        }
      }
    });

    // Deterministic merge in (source box, test point) order.
    StepRecord rec;
    rec.depth = depth;
    rec.boxes_before = cur.size();
    std::vector<unsigned char> hit(cur.size(), 0);
    std::vector<std::vector<BootstrapPayload>> incoming(threaded_payloads ? cur.size() : 0);
    for (BoxWork& bw : work) {
      rec.payload_points += bw.payload_points;
      rec.skipped_points += bw.skipped;
      rec.points_evaluated += bw.outcomes.size();
      for (Outcome& o : bw.outcomes) {
        switch (o.fate) {
          case Fate::Hit:
            ++rec.hits;
            hit[o.target] = 1;
            if (threaded_payloads) {
              auto& slot = incoming[o.target];
              slot.push_back(std::move(o.payload));
              if (slot.size() > rc.max_payloads_per_box) slot.erase(slot.begin());
            }
            break;
          case Fate::Outside: ++rec.outside; break;
          case Fate::Excluded: ++rec.excluded; break;
          case Fate::NonFinite: ++rec.nonfinite; break;
        }
      }
    }
    std::vector<LeafKey> kept;
    std::vector<std::vector<BootstrapPayload>> kept_payloads;
    for (std::size_t b = 0; b < cur.size(); ++b) {
      if (!hit[b]) continue;
      kept.push_back(cur.keys()[b]);
      kept_payloads.push_back(threaded_payloads ? std::move(incoming[b]) : std::vector<BootstrapPayload>{});
    }
    result.covering = cur.retain(kept);
    result.payloads = std::move(kept_payloads);
    rec.boxes_after = result.covering.size();
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    result.report.steps.push_back(rec);
    if (on_step) on_step(result.covering, rec);
    if (result.covering.empty()) break;
  }
  return result;
}

SubdivisionResult run_subdivision(const DdeSystem& sys, const EmbeddingConfig& cfg, const BoxRegion& q,
                                  const RunConfig& rc, std::vector<BoxRegion> excluded, const StepCallback& on_step,
                                  std::size_t steps_per_delay) {
  const DdePointMap map(EmbeddedMap(sys, cfg, steps_per_delay));
  return run_subdivision(map, q, rc, std::move(excluded), on_step);
}

SubdivisionResult test_hook_synthetic(const ExplicitMap& f, const BoxRegion& q, const RunConfig& rc,
                                      std::vector<BoxRegion> excluded, const StepCallback& on_step) {
  const SyntheticMap map(q.dim(), f);
  return run_subdivision(map, q, rc, std::move(excluded), on_step);
}

}  // namespace dembed
