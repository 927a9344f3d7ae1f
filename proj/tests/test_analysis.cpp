#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "dembed/analysis.hpp"
#include "dembed/error.hpp"
#include "dembed/models.hpp"

using namespace dembed;

namespace {

BoxRegion cube(std::size_t k, double lo, double hi) {
  return BoxRegion::from_bounds(std::vector<double>(k, lo), std::vector<double>(k, hi));
}

PointSet points(std::size_t dim, std::initializer_list<double> coords) {
  PointSet p;
  p.dim = dim;
  p.coords = coords;
  return p;
}

PointSet random_points(std::mt19937_64& rng, std::size_t n, std::size_t dim) {
  std::normal_distribution<double> g;
  PointSet p;
  p.dim = dim;
  for (std::size_t i = 0; i < n * dim; ++i) p.coords.push_back(g(rng));
  return p;
}

// Leaves of the cyclic bisection over q that contain one of the points.
BoxCollection covering_of(const BoxRegion& q, std::size_t depth, const std::vector<std::vector<double>>& pts) {
  BoxCollection all(q);
  for (std::size_t i = 0; i < depth; ++i) all = all.subdivide().retain(std::vector<LeafKey>{});
  std::vector<LeafKey> keys;
  for (const auto& x : pts) keys.push_back(*all.cell_of(x));
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  return BoxCollection(q, depth, keys);
}

}  // namespace

TEST_CASE("containment examples") {
  BoxCollection c(cube(2, 0, 1));
  for (int i = 0; i < 6; ++i) c = c.subdivide();
  c = c.retain(std::vector<LeafKey>{c.keys()[3], c.keys()[40], c.keys()[41]});
  CHECK(containment(c, box_centers(c)) == 1.0);
  CHECK(containment(c, points(2, {2.0, 2.0, -1.0, 0.5})) == 0.0);
  CHECK(containment(c, PointSet{}) == 0.0);
  CHECK_THROWS_AS(containment(c, points(3, {0, 0, 0})), Error);
}

TEST_CASE("containment does not drop under refinement without selection") {
  std::mt19937_64 rng(2);
  const PointSet pts = random_points(rng, 400, 2);
  BoxCollection c(cube(2, -2, 2));
  for (int i = 0; i < 5; ++i) c = c.subdivide();
  std::vector<LeafKey> keep;
  for (std::size_t i = 0; i < c.size(); i += 3) keep.push_back(c.keys()[i]);
  c = c.retain(keep);
  double before = containment(c, pts);
  for (int i = 0; i < 4; ++i) {
    c = c.subdivide();
    const double after = containment(c, pts);
    CHECK(after >= before);
    before = after;
  }
}

TEST_CASE("Hausdorff distance examples") {
  const PointSet a = points(1, {0.0});
  const PointSet b = points(1, {1.0});
  const PointSet ab = points(1, {0.0, 1.0});
  CHECK(hausdorff(a, a) == 0.0);
  CHECK(hausdorff(a, b) == 1.0);
  CHECK(hausdorff(ab, a) == 1.0);
  CHECK(directed_distance(a, ab) == 0.0);
  CHECK(hausdorff(points(2, {0, 0}), points(2, {3, -4})) == 4.0);  // max norm
  CHECK_THROWS_AS(hausdorff(a, PointSet{}), Error);
}

TEST_CASE("Hausdorff distance is a metric on random sets") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t dim = 1 + trial % 5;
    const PointSet a = random_points(rng, 1 + trial % 13, dim);
    const PointSet b = random_points(rng, 1 + trial % 7, dim);
    const PointSet c = random_points(rng, 1 + trial % 29, dim);
    CHECK(hausdorff(a, b) == hausdorff(b, a));
    CHECK(hausdorff(a, c) <= hausdorff(a, b) + hausdorff(b, c) + 1e-15);
    CHECK(hausdorff(a, a) == 0.0);
  }
}

TEST_CASE("box dimension of a point") {
  const BoxRegion q = cube(3, -1, 1);
  std::vector<CoveringSize> sizes;
  for (std::size_t depth : {3u, 6u, 9u, 12u}) sizes.push_back(covering_size(covering_of(q, depth, {{0.3, -0.2, 0.7}})));
  CHECK(std::abs(estimate_box_dimension(sizes)) < 1e-9);
}

TEST_CASE("box dimension of the full cube") {
  for (std::size_t k : {1u, 2u, 3u, 5u}) {
    std::vector<std::pair<std::size_t, std::size_t>> counts;
    for (std::size_t j = 0; j <= 3; ++j) counts.emplace_back(j * k, std::size_t{1} << (j * k));
    CHECK(estimate_box_dimension(counts, cube(k, -2, 2)) == doctest::Approx(static_cast<double>(k)).epsilon(1e-9));
  }
}

TEST_CASE("box dimension of a segment") {
  const std::size_t k = 3;
  const BoxRegion q = cube(k, -1, 1);
  std::vector<std::vector<double>> seg;
  for (int i = 0; i <= 20000; ++i) seg.push_back({-1.0 + 2.0 * i / 20000.0, 0.0, 0.0});
  std::vector<CoveringSize> sizes;
  for (std::size_t depth = 4; depth <= 18; ++depth) sizes.push_back(covering_size(covering_of(q, depth, seg)));
  const double d = estimate_box_dimension(sizes);
  MESSAGE("segment estimate " << d);
  CHECK(std::abs(d - 1.0) <= 0.15);
}

TEST_CASE("box dimension is invariant under rescaling Q") {
  const std::vector<std::pair<std::size_t, std::size_t>> counts{{5, 40}, {10, 170}, {15, 610}, {20, 2300}};
  const double a = estimate_box_dimension(counts, cube(5, -2, 2));
  const double b = estimate_box_dimension(counts, cube(5, 10, 10 + 4 * 7.3));
  CHECK(a == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("box dimension needs enough data") {
  const std::vector<std::pair<std::size_t, std::size_t>> two{{4, 10}, {8, 30}};
  CHECK_THROWS_AS(estimate_box_dimension(two, cube(2, 0, 1)), Error);
  const std::vector<std::pair<std::size_t, std::size_t>> narrow{{4, 10}, {5, 14}, {6, 20}};
  CHECK_THROWS_AS(estimate_box_dimension(narrow, cube(2, 0, 1)), Error);
  const std::vector<std::pair<std::size_t, std::size_t>> empty{{2, 10}, {4, 0}, {6, 20}};
  CHECK_THROWS_AS(estimate_box_dimension(empty, cube(2, 0, 1)), Error);
}

TEST_CASE("Poincare slices") {
  BoxCollection c(cube(2, -1, 1));
  for (int i = 0; i < 6; ++i) c = c.subdivide();
  CHECK(poincare_slice(c, 1, 0.0, 1.0).size() == c.size());
  CHECK(poincare_slice(c, 0, 3.0, 0.1).empty());
  const BoxCollection band = poincare_slice(c, 1, 0.0, 0.0);
  CHECK(band.size() == 16);  // 8 columns, two rows meet at y = 0
  for (std::size_t i = 0; i < band.size(); ++i) {
    const BoxRegion b = band.box_at(i);
    CHECK(b.lower(1) <= 0.0);
    CHECK(b.upper(1) >= 0.0);
  }
  CHECK_THROWS_AS(poincare_slice(c, 2, 0.0, 0.0), Error);
}

TEST_CASE("point files round-trip") {
  const PointSet p = points(3, {1.0 / 3, -2.5e-17, 7, 0.1, 0.2, 0.3});
  const std::vector<double> labels{0.5, 1.5};
  std::ostringstream os;
  write_points(os, p, labels);
  CHECK(os.str().rfind("0.5 0.33333333333333331 ", 0) == 0);
  std::istringstream is(os.str());
  const PointSet back = read_points(is);
  CHECK(back.dim == 3);
  CHECK(back.coords == p.coords);
  std::istringstream bad("1 2 x\n");
  CHECK_THROWS_AS(read_points(bad), Error);
  std::istringstream ragged("0 1 2\n1 1 2 3\n");
  CHECK_THROWS_AS(read_points(ragged), Error);
}

TEST_CASE("embedded Wright orbit stays within the periodic orbit bound") {
  const ModelPreset w = wright();
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-0.01, 0.01);
  const HistorySegment h0 = HistorySegment::sample(1, 1.0, 16, [&](double, std::span<double> y) { y[0] = u(rng); });
  const PointSet orbit = simulate_embedded_orbit(w.system, w.embedding.layout, h0, 200.0, 500, 0.25, 1.0 / 256);
  REQUIRE(orbit.size() == 500);
  double sup = 0.0;
  for (double v : orbit.coords) sup = std::max(sup, std::abs(v));
  MESSAGE("Wright orbit sup norm " << sup);
  CHECK(sup <= 1.1);
  CHECK(sup > 0.5);  // left the unstable origin
}

TEST_CASE("orbit from an equilibrium is constant") {
  const ModelPreset a = arneodo();
  const HistorySegment h0 = HistorySegment::constant(a.equilibria[1], a.system.tau);
  const PointSet orbit = simulate_embedded_orbit(a.system, a.embedding.layout, h0, 1.3, 20, 0.065, 0.13 / 256);
  const std::vector<double> z = restrict_state(h0, a.embedding.layout);
  for (std::size_t i = 0; i < orbit.size(); ++i) {
    for (std::size_t j = 0; j < 5; ++j) CHECK(orbit.point(i)[j] == z[j]);
  }
}

TEST_CASE("Mackey-Glass orbit stays in [0, 1.5]^7") {
  const ModelPreset mg = mackey_glass();
  const double half = 0.5;
  const PointSet orbit = simulate_embedded_orbit(mg.system, mg.embedding.layout, HistorySegment::constant({&half, 1}, 2.0),
                                                 200.0, 500, 2.0 / 6, 2.0 / 258);
  for (double v : orbit.coords) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.5);
  }
}
