#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "dembed/boxcover.hpp"
#include "dembed/error.hpp"

using namespace dembed;

namespace {

BoxRegion cube(std::size_t k, double lo, double hi) {
  return BoxRegion::from_bounds(std::vector<double>(k, lo), std::vector<double>(k, hi));
}

// Geometry of a bit-path by walking it, independent of BoxCollection.
void walk(const std::string& path, std::vector<double> lo, std::vector<double> hi, std::vector<double>& center,
          std::vector<double>& radius) {
  const std::size_t k = lo.size();
  for (std::size_t i = 0; i < path.size(); ++i) {
    const std::size_t c = i % k;
    const double mid = 0.5 * (lo[c] + hi[c]);
    if (path[i] == '1') {
      lo[c] = mid;
    } else {
      hi[c] = mid;
    }
  }
  center.resize(k);
  radius.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    center[c] = 0.5 * (lo[c] + hi[c]);
    radius[c] = 0.5 * (hi[c] - lo[c]);
  }
}

BoxCollection subdivided(BoxCollection c, std::size_t times) {
  for (std::size_t i = 0; i < times; ++i) c = c.subdivide();
  return c;
}

std::string written(const BoxCollection& c) {
  std::ostringstream os;
  write_covering(os, c);
  return os.str();
}

}  // namespace

TEST_CASE("first bisection of [-2, 2]^5") {
  const BoxCollection c = BoxCollection(cube(5, -2, 2)).subdivide();
  REQUIRE(c.size() == 2);
  CHECK(c.depth() == 1);
  const BoxRegion lower = c.box_at(0), upper = c.box_at(1);
  CHECK(lower.radius == std::vector<double>{1, 2, 2, 2, 2});
  CHECK(upper.radius == std::vector<double>{1, 2, 2, 2, 2});
  CHECK(lower.center == std::vector<double>{-1, 0, 0, 0, 0});
  CHECK(upper.center == std::vector<double>{1, 0, 0, 0, 0});
}

TEST_CASE("k bisections halve every radius") {
  const std::size_t k = 4;
  const BoxCollection c = subdivided(BoxCollection(cube(k, -1, 3)), k);
  CHECK(c.size() == 16);
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (double r : c.box_at(i).radius) CHECK(r == 1.0);
  }
  CHECK(c.leaf_diameter() == 2.0);
}

TEST_CASE("children tile the parent") {
  const BoxRegion q = BoxRegion::from_bounds(std::vector<double>{-1, 0.5, 2}, std::vector<double>{5, 0.7, 2.25});
  const BoxCollection c = subdivided(BoxCollection(q), 7);
  REQUIRE(c.size() == 128);
  double volume = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const BoxRegion b = c.box_at(i);
    double v = 1.0;
    for (std::size_t j = 0; j < 3; ++j) {
      v *= 2 * b.radius[j];
      CHECK(b.lower(j) >= q.lower(j));
      CHECK(b.upper(j) <= q.upper(j));
    }
    volume += v;
  }
  CHECK(volume == doctest::Approx(6.0 * 0.2 * 0.25).epsilon(1e-12));
  // every random point of Q lands in exactly one leaf
  std::mt19937_64 rng(1);
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> x(3);
    for (std::size_t j = 0; j < 3; ++j) x[j] = std::uniform_real_distribution<double>(q.lower(j), q.upper(j))(rng);
    const auto idx = c.locate(x);
    REQUIRE(idx.has_value());
    CHECK(c.box_at(*idx).contains(x));
  }
}

TEST_CASE("radius law per coordinate") {
  const BoxRegion q = BoxRegion::from_bounds(std::vector<double>{-1, -4, -4}, std::vector<double>{5, 2, 4});
  BoxCollection c(q);
  std::vector<int> halvings(3, 0);
  for (std::size_t depth = 1; depth <= 30; ++depth) {
    c = c.subdivide();
    c = c.retain(std::vector<LeafKey>{c.keys().front(), c.keys().back()});
    ++halvings[(depth - 1) % 3];
    const auto r = c.leaf_radius();
    for (std::size_t j = 0; j < 3; ++j) CHECK(r[j] == std::ldexp(q.radius[j], -halvings[j]));
    for (std::size_t i = 0; i < c.size(); ++i) CHECK(c.box_at(i).radius == r);
  }
}

TEST_CASE("geometry from the bit-path") {
  const std::vector<double> lo{-1, -4, -4, -4, -4}, hi{5, 2, 4, 4, 4};
  BoxCollection c(BoxRegion::from_bounds(lo, hi));
  std::mt19937_64 rng(4);
  for (std::size_t depth = 1; depth <= 40; ++depth) {
    c = c.subdivide();
    std::vector<LeafKey> keep;
    for (LeafKey key : c.keys()) {
      if (keep.empty() || rng() % 3 == 0) keep.push_back(key);
    }
    if (keep.size() > 50) keep.resize(50);
    c = c.retain(keep);
  }
  for (LeafKey key : c.keys()) {
    std::vector<double> center, radius;
    walk(c.bitpath(key), lo, hi, center, radius);
    const BoxRegion b = c.box(key);
    for (std::size_t j = 0; j < 5; ++j) {
      CHECK(std::abs(b.center[j] - center[j]) <= 1e-14);
      CHECK(std::abs(b.radius[j] - radius[j]) <= 1e-14);
    }
  }
}

TEST_CASE("locate conventions") {
  const BoxCollection c = subdivided(BoxCollection(cube(2, 0, 1)), 2);  // four quarter squares
  REQUIRE(c.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(c.locate(c.box_at(i).center) == i);
  CHECK_FALSE(c.locate(std::vector<double>{1.5, 0.5}).has_value());
  CHECK_FALSE(c.locate(std::vector<double>{-1e-15, 0.5}).has_value());
  // shared face x0 = 0.5 goes to the upper box
  const auto face = c.locate(std::vector<double>{0.5, 0.25});
  REQUIRE(face.has_value());
  CHECK(c.box_at(*face).center == std::vector<double>{0.75, 0.25});
  // the upper faces of Q are inside
  const auto corner = c.locate(std::vector<double>{1.0, 1.0});
  REQUIRE(corner.has_value());
  CHECK(c.box_at(*corner).center == std::vector<double>{0.75, 0.75});
  const auto origin = c.locate(std::vector<double>{0.0, 0.0});
  REQUIRE(origin.has_value());
  CHECK(c.box_at(*origin).center == std::vector<double>{0.25, 0.25});
  // an inactive leaf does not locate
  const BoxCollection one = c.retain(std::vector<LeafKey>{c.keys()[0]});
  CHECK_FALSE(one.locate(std::vector<double>{0.75, 0.75}).has_value());
  CHECK(one.cell_of(std::vector<double>{0.75, 0.75}).has_value());
}

TEST_CASE("excluded regions filter locate") {
  const BoxRegion u = cube(2, -0.1, 0.1);
  const BoxCollection c = subdivided(BoxCollection(cube(2, -1, 1), {u}), 6);
  CHECK_FALSE(c.locate(std::vector<double>{0.0, 0.05}).has_value());
  CHECK(c.excluded_point(std::vector<double>{0.0, 0.05}));
  // U is open: its boundary still locates
  CHECK(c.locate(std::vector<double>{0.1, 0.0}).has_value());
  CHECK(c.locate(std::vector<double>{0.5, 0.5}).has_value());
}

TEST_CASE("retain") {
  const BoxCollection c = subdivided(BoxCollection(cube(3, 0, 1)), 5);
  const BoxCollection all = c.retain(c.keys());
  CHECK(all.keys() == c.keys());
  const BoxCollection none = c.retain(std::vector<LeafKey>{});
  CHECK(none.empty());
  CHECK(none.depth() == 5);
  const BoxCollection single = c.retain(std::vector<LeafKey>{c.keys()[7], c.keys()[7]});
  CHECK(single.size() == 1);
  CHECK(single.locate(c.box_at(7).center) == 0u);
  CHECK_THROWS_AS(single.retain(std::vector<LeafKey>{c.keys()[3]}), Error);
}

TEST_CASE("depth is limited to 64") {
  BoxCollection c(cube(1, 0, 1));
  for (int i = 0; i < 64; ++i) c = c.subdivide().retain(std::vector<LeafKey>{0});
  CHECK(c.depth() == 64);
  CHECK_THROWS_AS(c.subdivide(), Error);
}

TEST_CASE("covering files round-trip byte for byte") {
  const std::vector<double> lo{-1, -4, -4, -4, -4}, hi{5, 2, 4, 4, 4};
  BoxCollection c(BoxRegion::from_bounds(lo, hi));
  std::mt19937_64 rng(9);
  for (std::size_t depth = 1; depth <= 23; ++depth) {
    c = c.subdivide();
    std::vector<LeafKey> keep;
    for (LeafKey key : c.keys()) {
      if (rng() % 4 != 0) keep.push_back(key);
    }
    if (keep.size() > 300) keep.resize(300);
    c = c.retain(keep);
    const std::string text = written(c);
    std::istringstream is(text);
    const BoxCollection back = read_covering(is);
    CHECK(back.keys() == c.keys());
    CHECK(back.depth() == c.depth());
    CHECK(written(back) == text);
  }
}

TEST_CASE("depth-zero and empty coverings round-trip") {
  const BoxCollection root(cube(2, -1, 3));
  std::istringstream is(written(root));
  const BoxCollection back = read_covering(is);
  CHECK(written(back) == written(root));
  CHECK(back.root().center == root.root().center);

  const BoxCollection empty = root.subdivide().retain(std::vector<LeafKey>{});
  CHECK(written(empty) == "k=2 depth=1 count=0\n");
  std::istringstream es(written(empty));
  const BoxCollection eback = read_covering(es);
  CHECK(eback.empty());
  CHECK(eback.k() == 2);
}

TEST_CASE("covering file format") {
  const BoxCollection c = BoxCollection(cube(2, 0, 1)).subdivide();
  CHECK(written(c) == "k=2 depth=1 count=2\n0 0.25 0.5 0.25 0.5\n1 0.75 0.5 0.25 0.5\n");
}

TEST_CASE("malformed covering files") {
  const char* bad[] = {
      "",
      "k=2 depth=1\n",
      "k=2 depth=1 count=2\n0 0.25 0.5 0.25 0.5\n",
      "k=2 depth=1 count=1\n01 0.25 0.5 0.25 0.5\n",
      "k=2 depth=1 count=1\n2 0.25 0.5 0.25 0.5\n",
      "k=2 depth=1 count=1\n0 0.25 0.5 0.25\n",
      "k=2 depth=1 count=2\n0 0.25 0.5 0.25 0.5\n1 0.75 0.5 0.25 0.25\n",
  };
  for (const char* text : bad) {
    std::istringstream is(text);
    CHECK_THROWS_AS(read_covering(is), Error);
  }
}
