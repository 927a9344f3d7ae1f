#include "dembed/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "dembed/error.hpp"
#include "dembed/kernels.hpp"

namespace dembed {

void PointSet::push(std::span<const double> x) {
  if (dim == 0) dim = x.size();
  if (x.size() != dim) throw Error(ErrorKind::InvalidArgument, "point dimension mismatch");
  coords.insert(coords.end(), x.begin(), x.end());
}

PointSet simulate_embedded_orbit(const DdeSystem& sys, const ObservableLayout& layout, const HistorySegment& h0,
                                 double transient, std::size_t samples, double spacing, double step) {
  whole_steps(sys.tau, step, "the delay");
  HistorySegment state = h0;
  if (transient > 0.0) state = integrate(sys, state, transient, step).final_state;
  PointSet out;
  out.dim = layout.k();
  for (std::size_t i = 0; i < samples; ++i) {
    if (i > 0) state = integrate(sys, state, spacing, step).final_state;
    out.push(restrict_state(state, layout));
  }
  return out;
}

double containment(const BoxCollection& covering, const PointSet& points) {
  if (points.empty()) return 0.0;
  if (points.dim != covering.k()) throw Error(ErrorKind::InvalidArgument, "point dimension differs from k");
  std::size_t inside = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (covering.locate(points.point(i))) ++inside;
  }
  return static_cast<double>(inside) / static_cast<double>(points.size());
}

double directed_distance(const PointSet& a, const PointSet& b) {
  if (a.empty() || b.empty()) throw Error(ErrorKind::EmptyInput, "Hausdorff distance of an empty set");
  if (a.dim != b.dim) throw Error(ErrorKind::InvalidArgument, "point sets differ in dimension");
  return kernels::active().directed_distance(a.coords.data(), a.size(), b.coords.data(), b.size(), a.dim);
}

double hausdorff(const PointSet& a, const PointSet& b) {
  return std::max(directed_distance(a, b), directed_distance(b, a));
}

CoveringSize covering_size(const BoxCollection& c) { return {c.depth(), c.size(), c.leaf_diameter()}; }

double estimate_box_dimension(std::span<const CoveringSize> sizes) {
  if (sizes.size() < 3) throw Error(ErrorKind::InsufficientData, "need at least three depths");
  double dmin = sizes.front().diameter, dmax = dmin;
  for (const CoveringSize& s : sizes) {
    if (s.boxes == 0 || !(s.diameter > 0.0)) throw Error(ErrorKind::InsufficientData, "empty covering in dimension series");
    dmin = std::min(dmin, s.diameter);
    dmax = std::max(dmax, s.diameter);
  }
  if (dmax < 4.0 * dmin) throw Error(ErrorKind::InsufficientData, "box sizes must span at least two halvings");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const auto n = static_cast<double>(sizes.size());
  for (const CoveringSize& s : sizes) {
    const double x = -std::log(s.diameter);
    const double y = std::log(static_cast<double>(s.boxes));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double estimate_box_dimension(std::span<const std::pair<std::size_t, std::size_t>> depth_counts, const BoxRegion& root) {
  std::vector<CoveringSize> sizes;
  for (const auto& [depth, count] : depth_counts) {
    std::vector<double> r = root.radius;
    for (std::size_t i = 0; i < depth; ++i) r[i % r.size()] *= 0.5;
    sizes.push_back({depth, count, 2.0 * *std::max_element(r.begin(), r.end())});
  }
  return estimate_box_dimension(sizes);
}

BoxCollection poincare_slice(const BoxCollection& c, std::size_t coordinate, double value, double thickness) {
  if (coordinate >= c.k()) throw Error(ErrorKind::InvalidArgument, "slice coordinate out of range");
  std::vector<LeafKey> kept;
  for (LeafKey key : c.keys()) {
    const BoxRegion b = c.box(key);
    if (b.lower(coordinate) <= value + thickness && b.upper(coordinate) >= value - thickness) kept.push_back(key);
  }
  return c.retain(kept);
}

PointSet box_centers(const BoxCollection& c) {
  PointSet pts;
  pts.dim = c.k();
  for (LeafKey key : c.keys()) pts.push(c.box(key).center);
  return pts;
}

void write_points(std::ostream& os, const PointSet& pts, std::span<const double> labels) {
  char buf[32];
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", labels.empty() ? static_cast<double>(i) : labels[i]);
    os << buf;
    for (double v : pts.point(i)) {
      std::snprintf(buf, sizeof buf, " %.17g", v);
      os << buf;
    }
    os << '\n';
  }
}

void write_points(const std::string& path, const PointSet& pts, std::span<const double> labels) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::IoError, "cannot write " + path);
  write_points(os, pts, labels);
}

PointSet read_points(std::istream& is) {
  PointSet pts;
  std::string line;
  std::vector<double> row;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    row.clear();
    double v;
    while (ls >> v) row.push_back(v);
    if (!ls.eof() || row.size() < 2) throw Error(ErrorKind::IoError, "malformed point line: " + line);
    pts.push(std::span<const double>(row).subspan(1));
  }
  return pts;
}

PointSet read_points(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::IoError, "cannot read " + path);
  return read_points(is);
}

}  // namespace dembed
