#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "dembed/error.hpp"
#include "dembed/models.hpp"
#include "dembed/subdivision.hpp"
#include "oracle.hpp"

using namespace dembed;

namespace {

BoxRegion cube(std::size_t k, double lo, double hi) {
  return BoxRegion::from_bounds(std::vector<double>(k, lo), std::vector<double>(k, hi));
}

std::set<std::string> paths(const BoxCollection& c) {
  std::set<std::string> out;
  for (LeafKey key : c.keys()) out.insert(c.bitpath(key));
  return out;
}

// Boxes of `a` that neither appear in `b` nor touch a box of `b`.
std::size_t beyond_one_layer(const BoxCollection& geometry, const std::set<std::string>& a,
                             const std::set<std::string>& b) {
  std::vector<BoxRegion> bb;
  auto key_of = [](const std::string& p) {
    LeafKey key = 0;
    for (char ch : p) key = (key << 1) | (ch == '1' ? 1U : 0U);
    return key;
  };
  for (const std::string& p : b) bb.push_back(geometry.box(key_of(p)));
  std::size_t far = 0;
  for (const std::string& p : a) {
    if (b.count(p)) continue;
    const BoxRegion x = geometry.box(key_of(p));
    bool touches = false;
    for (const BoxRegion& y : bb) {
      bool t = true;
      for (std::size_t i = 0; i < x.dim() && t; ++i) {
        t = std::abs(x.center[i] - y.center[i]) <= x.radius[i] + y.radius[i] + 1e-12;
      }
      if (t) {
        touches = true;
        break;
      }
    }
    if (!touches) ++far;
  }
  return far;
}

RunConfig config(std::size_t steps, std::size_t points, std::uint64_t seed = 1) {
  RunConfig rc;
  rc.steps = steps;
  rc.points_per_box = points;
  rc.seed = seed;
  return rc;
}

struct Comparison {
  std::set<std::string> impl, reference;
  BoxCollection covering;
};

Comparison compare(const ExplicitMap& f, const BoxRegion& q, std::size_t steps, std::size_t points) {
  const SubdivisionResult r = test_hook_synthetic(f, q, config(steps, points));
  std::vector<double> lo(q.dim()), hi(q.dim());
  for (std::size_t i = 0; i < q.dim(); ++i) {
    lo[i] = q.lower(i);
    hi[i] = q.upper(i);
  }
  return {paths(r.covering), oracle::subdivide(f, lo, hi, steps, 10), r.covering};
}

const ExplicitMap identity = [](std::span<const double> x, std::span<double> y) {
  std::copy(x.begin(), x.end(), y.begin());
};
const ExplicitMap halve = [](std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = 0.5 * x[i];
};
const ExplicitMap hyperbolic = [](std::span<const double> x, std::span<double> y) {
  y[0] = 0.5 * x[0];
  y[1] = 1.2 * x[1];
};
const double kAngle = 2.0 * std::numbers::pi * (std::numbers::sqrt2 - 1.0);
const ExplicitMap rotation = [](std::span<const double> x, std::span<double> y) {
  y[0] = std::cos(kAngle) * x[0] - std::sin(kAngle) * x[1];
  y[1] = std::sin(kAngle) * x[0] + std::cos(kAngle) * x[1];
};

}  // namespace

TEST_CASE("constant map keeps exactly the box holding the constant") {
  const std::vector<double> c{0.3, -0.55};
  const ExplicitMap f = [&](std::span<const double>, std::span<double> y) { std::copy(c.begin(), c.end(), y.begin()); };
  const BoxRegion q = cube(2, -1, 1);
  test_hook_synthetic(f, q, config(12, 20), {}, [&](const BoxCollection& cov, const StepRecord&) {
    REQUIRE(cov.size() == 1);
    CHECK(cov.box_at(0).contains(c));
    CHECK(cov.keys()[0] == *cov.cell_of(c));
  });
  const Comparison cmp = compare(f, q, 12, 20);
  CHECK(cmp.impl == cmp.reference);
}

TEST_CASE("identity keeps every box") {
  const BoxRegion q = cube(2, -1, 1);
  const SubdivisionResult r = test_hook_synthetic(identity, q, config(10, 30));
  CHECK(r.covering.size() == 1024);
  for (const StepRecord& s : r.report.steps) CHECK(s.boxes_after == s.boxes_before);
  const Comparison cmp = compare(identity, q, 10, 30);
  CHECK(cmp.impl == cmp.reference);
}

TEST_CASE("contraction x/2 collapses to the origin") {
  const BoxRegion q = cube(2, -1, 1);
  const Comparison cmp = compare(halve, q, 10, 50);
  CHECK(cmp.impl == cmp.reference);
  const double diam = cmp.covering.leaf_diameter();
  for (std::size_t i = 0; i < cmp.covering.size(); ++i) {
    const BoxRegion b = cmp.covering.box_at(i);
    for (std::size_t j = 0; j < 2; ++j) CHECK(std::abs(b.center[j]) <= std::ldexp(1.0, -5) + diam);
  }
  // the four boxes meeting at 0
  CHECK(cmp.covering.size() == 4);
}

TEST_CASE("hyperbolic map converges to the unstable axis") {
  const BoxRegion q = cube(2, -1, 1);
  const Comparison cmp = compare(hyperbolic, q, 12, 100);
  CHECK(beyond_one_layer(cmp.covering, cmp.impl, cmp.reference) == 0);
  CHECK(beyond_one_layer(cmp.covering, cmp.reference, cmp.impl) == 0);
  MESSAGE("hyperbolic: " << cmp.impl.size() << " boxes, oracle " << cmp.reference.size());
  // every retained box touches x_1 = 0 within one box width
  for (std::size_t i = 0; i < cmp.covering.size(); ++i) {
    const BoxRegion b = cmp.covering.box_at(i);
    CHECK(std::abs(b.center[0]) <= 3 * b.radius[0]);
  }
}

TEST_CASE("irrational rotation keeps the invariant circle") {
  const BoxRegion q = cube(2, -1.5, 1.5);
  std::vector<double> circle;
  for (int i = 0; i < 10000; ++i) {
    const double a = 2.0 * std::numbers::pi * i / 10000.0;
    circle.push_back(std::cos(a));
    circle.push_back(std::sin(a));
  }
  test_hook_synthetic(rotation, q, config(12, 50), {}, [&](const BoxCollection& cov, const StepRecord&) {
    std::size_t inside = 0;
    for (std::size_t i = 0; i < 10000; ++i) inside += cov.locate(std::span<const double>(circle).subspan(2 * i, 2)) ? 1 : 0;
    CHECK(inside == 10000);
  });
  // same point budget as the oracle's 10 x 10 grid
  const Comparison cmp = compare(rotation, q, 12, 100);
  CHECK(beyond_one_layer(cmp.covering, cmp.impl, cmp.reference) == 0);
  CHECK(beyond_one_layer(cmp.covering, cmp.reference, cmp.impl) == 0);
  MESSAGE("rotation: " << cmp.impl.size() << " boxes, oracle " << cmp.reference.size());
}

TEST_CASE("nested coverings and exact accounting") {
  const BoxRegion q = cube(3, -2, 2);
  const ExplicitMap henon_like = [](std::span<const double> x, std::span<double> y) {
    y[0] = 1.0 - 1.2 * x[0] * x[0] + x[1];
    y[1] = 0.3 * x[0];
    y[2] = 0.5 * x[2] + 0.1 * x[0];
  };
  std::set<LeafKey> previous{0};
  std::size_t prev_after = 1;
  test_hook_synthetic(henon_like, q, config(15, 40), {}, [&](const BoxCollection& cov, const StepRecord& rec) {
    for (LeafKey key : cov.keys()) CHECK(previous.count(key >> 1) == 1);
    CHECK(rec.boxes_before == 2 * prev_after);
    CHECK(rec.boxes_after <= rec.boxes_before);
    CHECK(rec.points_evaluated == rec.hits + rec.outside + rec.excluded + rec.nonfinite);
    CHECK(rec.points_evaluated + rec.skipped_points == rec.boxes_before * 40);
    previous = std::set<LeafKey>(cov.keys().begin(), cov.keys().end());
    prev_after = rec.boxes_after;
  });
}

TEST_CASE("runs are reproducible and independent of the thread count") {
  const BoxRegion q = cube(2, -1.5, 1.5);
  RunConfig rc = config(12, 30, 42);
  rc.threads = 1;
  const SubdivisionResult a = test_hook_synthetic(rotation, q, rc);
  rc.threads = 3;
  const SubdivisionResult b = test_hook_synthetic(rotation, q, rc);
  std::ostringstream fa, fb, ra, rb;
  write_covering(fa, a.covering);
  write_covering(fb, b.covering);
  a.report.write_kv(ra);
  b.report.write_kv(rb);
  CHECK(fa.str() == fb.str());
  CHECK(ra.str() == rb.str());
  rc.seed = 43;
  const SubdivisionResult c = test_hook_synthetic(rotation, q, rc);
  CHECK(c.report.steps.back().hits > 0);
}

TEST_CASE("per-box seeds") {
  CHECK(box_seed(1, 3, 5) == box_seed(1, 3, 5));
  CHECK(box_seed(1, 3, 5) != box_seed(2, 3, 5));
  CHECK(box_seed(1, 3, 5) != box_seed(1, 4, 5));
  CHECK(box_seed(1, 3, 5) != box_seed(1, 3, 4));
}

TEST_CASE("excluded regions") {
  const BoxRegion q = cube(2, -1, 1);
  const BoxRegion u = cube(2, -0.25, 0.25);
  const SubdivisionResult r = test_hook_synthetic(identity, q, config(8, 20), {u});
  std::size_t skipped = 0, excluded = 0;
  for (const StepRecord& s : r.report.steps) {
    skipped += s.skipped_points;
    excluded += s.excluded;
  }
  CHECK(skipped > 0);
  CHECK(excluded == 0);  // identity never maps a drawn point into U
  for (std::size_t i = 0; i < r.covering.size(); ++i) {
    const BoxRegion b = r.covering.box_at(i);
    const bool inside_u = b.lower(0) >= -0.25 && b.upper(0) <= 0.25 && b.lower(1) >= -0.25 && b.upper(1) <= 0.25;
    CHECK_FALSE(inside_u);
  }
  // contraction towards the origin: images land in U and are counted as excluded
  const SubdivisionResult c = test_hook_synthetic(halve, q, config(6, 20), {u});
  CHECK(c.report.steps.front().excluded > 0);
}

TEST_CASE("selection can empty the collection") {
  const ExplicitMap away = [](std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + 10.0;
  };
  const SubdivisionResult r = test_hook_synthetic(away, cube(2, 0, 1), config(5, 10));
  CHECK(r.covering.empty());
  CHECK(r.report.steps.size() == 1);
  CHECK(r.report.steps[0].outside == 20);
}

TEST_CASE("non-finite images are discarded") {
  const ExplicitMap blow = [](std::span<const double> x, std::span<double> y) {
    y[0] = x[0] > 0 ? std::numeric_limits<double>::infinity() : x[0];
    y[1] = x[1];
  };
  const SubdivisionResult r = test_hook_synthetic(blow, cube(2, -1, 1), config(4, 10));
  CHECK(r.report.steps[0].nonfinite == 10);
  for (std::size_t i = 0; i < r.covering.size(); ++i) CHECK(r.covering.box_at(i).center[0] < 0);
}

TEST_CASE("run configuration is validated") {
  RunConfig rc;
  rc.steps = 0;
  CHECK_THROWS_AS(rc.validate(), Error);
  rc.steps = 65;
  CHECK_THROWS_AS(rc.validate(), Error);
  rc.steps = 3;
  rc.points_per_box = 0;
  CHECK_THROWS_AS(rc.validate(), Error);
  CHECK_THROWS_AS(test_hook_synthetic(identity, cube(3, 0, 1), config(0, 10)), Error);
}

TEST_CASE("report formats leave out wall time") {
  const SubdivisionResult r = test_hook_synthetic(halve, cube(2, -1, 1), config(3, 5));
  std::ostringstream table, kv, timing;
  r.report.write_table(table);
  r.report.write_kv(kv);
  r.report.write_timing(timing);
  CHECK(table.str().find("depth") != std::string::npos);
  CHECK(kv.str().find("step.1.boxes_after") != std::string::npos);
  CHECK(kv.str().find("second") == std::string::npos);
  CHECK(timing.str().find("seconds") != std::string::npos);
}

TEST_CASE("delay equation run: equilibrium box survives and payloads are threaded") {
  const ModelPreset w = wright();
  RunConfig rc = config(10, 20, 3);
  rc.max_payloads_per_box = 4;
  const std::vector<double> origin(5, 0.0);
  std::size_t payload_points = 0;
  const SubdivisionResult r = run_subdivision(w.system, w.embedding, w.domain, rc, {},
                                              [&](const BoxCollection& cov, const StepRecord& rec) {
                                                CHECK(cov.locate(origin).has_value());
                                                payload_points += rec.payload_points;
                                              });
  CHECK(payload_points > 0);
  REQUIRE(r.payloads.size() == r.covering.size());
  for (std::size_t i = 0; i < r.covering.size(); ++i) {
    CHECK(r.payloads[i].size() <= 4);
    for (const BootstrapPayload& p : r.payloads[i]) {
      CHECK(r.covering.locate(p.z) == i);
      CHECK(p.extras.size() == w.embedding.layout.payload_extras(w.embedding.p));
    }
  }
}

TEST_CASE("boxes hit by their own orbit samples are kept") {
  // A period-3 cycle of a piecewise map: boxes holding the cycle points are
  // never discarded because the cycle maps into itself.
  const std::vector<double> cyc{0.1, 0.45, 0.8};
  const ExplicitMap f = [&](std::span<const double> x, std::span<double> y) {
    double best = 10;
    std::size_t j = 0;
    for (std::size_t i = 0; i < 3; ++i) {
      if (std::abs(x[0] - cyc[i]) < best) {
        best = std::abs(x[0] - cyc[i]);
        j = i;
      }
    }
    y[0] = cyc[(j + 1) % 3];
  };
  test_hook_synthetic(f, cube(1, 0, 1), config(20, 50), {}, [&](const BoxCollection& cov, const StepRecord& rec) {
    for (double c : cyc) CHECK(cov.locate(std::vector<double>{c}).has_value());
    if (rec.depth >= 4) CHECK(cov.size() == 3);
  });
}
