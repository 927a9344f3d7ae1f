#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dembed/boxcover.hpp"
#include "dembed/dde.hpp"
#include "dembed/embedding.hpp"

namespace dembed {

/// Row-major point cloud in R^dim.
struct PointSet {
  std::size_t dim = 0;
  std::vector<double> coords;

  std::size_t size() const noexcept { return dim == 0 ? 0 : coords.size() / dim; }
  bool empty() const noexcept { return coords.empty(); }
  std::span<const double> point(std::size_t i) const { return {coords.data() + i * dim, dim}; }
  void push(std::span<const double> x);
};

/// Integrates past `transient`, then records R(state) every `spacing`.
PointSet simulate_embedded_orbit(const DdeSystem& sys, const ObservableLayout& layout, const HistorySegment& h0,
                                 double transient, std::size_t samples, double spacing, double step);

/// Fraction of points that locate to an active box (0 for an empty set).
double containment(const BoxCollection& covering, const PointSet& points);

/// Symmetric Hausdorff distance in the max norm. Throws EmptyInput.
double hausdorff(const PointSet& a, const PointSet& b);
/// sup over a of the distance to b.
double directed_distance(const PointSet& a, const PointSet& b);

struct CoveringSize {
  std::size_t depth;
  std::size_t boxes;
  double diameter;  // max-norm diameter of a leaf at this depth
};

CoveringSize covering_size(const BoxCollection& c);

/// Least-squares slope of log N against log(1 / diameter). Needs at least
/// three depths whose diameters span a factor of four; throws
/// InsufficientData otherwise.
double estimate_box_dimension(std::span<const CoveringSize> sizes);

/// Box counts per depth with diameters from the cyclic-bisection law on `root`.
double estimate_box_dimension(std::span<const std::pair<std::size_t, std::size_t>> depth_counts, const BoxRegion& root);

/// Boxes whose extent in `coordinate` meets [value - thickness, value + thickness].
BoxCollection poincare_slice(const BoxCollection& c, std::size_t coordinate, double value, double thickness);

PointSet box_centers(const BoxCollection& c);

/// Point file: one line per point, a leading label column (time or index)
/// followed by the coordinates, 17 significant digits.
void write_points(std::ostream& os, const PointSet& pts, std::span<const double> labels = {});
void write_points(const std::string& path, const PointSet& pts, std::span<const double> labels = {});
/// Reads a point file, dropping the label column.
PointSet read_points(std::istream& is);
PointSet read_points(const std::string& path);

}  // namespace dembed
