#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dembed {

/// Axis-aligned box: product of [center_i - radius_i, center_i + radius_i].
struct BoxRegion {
  std::vector<double> center;
  std::vector<double> radius;

  static BoxRegion from_bounds(std::span<const double> lower, std::span<const double> upper);

  std::size_t dim() const noexcept { return center.size(); }
  double lower(std::size_t i) const { return center[i] - radius[i]; }
  double upper(std::size_t i) const { return center[i] + radius[i]; }

  /// Closed membership.
  bool contains(std::span<const double> x) const;
  /// Open membership (used for excluded neighbourhoods).
  bool contains_interior(std::span<const double> x) const;

  /// Throws InvalidArgument unless dimensions agree and every radius is positive.
  void validate() const;
};

/// Bit-path of a leaf read as a binary number: the first subdivision step is
/// the most significant of `depth` bits, and bit value 1 picks the upper half.
using LeafKey = std::uint64_t;

/// Active leaves at one depth of the cyclic bisection tree over a root box Q.
/// Step i (0-based) halves coordinate i mod k. Only active keys are stored,
/// sorted, so lookups descend arithmetically and binary-search the key.
/// Points inside an excluded region never locate.
class BoxCollection {
 public:
  static constexpr std::size_t kMaxDepth = 64;

  explicit BoxCollection(BoxRegion root, std::vector<BoxRegion> excluded = {});
  BoxCollection(BoxRegion root, std::size_t depth, std::vector<LeafKey> active,
                std::vector<BoxRegion> excluded = {});

  std::size_t k() const noexcept { return root_.dim(); }
  std::size_t depth() const noexcept { return depth_; }
  std::size_t size() const noexcept { return keys_.size(); }
  bool empty() const noexcept { return keys_.empty(); }
  const BoxRegion& root() const noexcept { return root_; }
  const std::vector<BoxRegion>& excluded() const noexcept { return excluded_; }
  const std::vector<LeafKey>& keys() const noexcept { return keys_; }

  /// Replaces every leaf by its two children along coordinate depth mod k.
  BoxCollection subdivide() const;

  /// Keeps exactly `hits` (any order, duplicates allowed); each must be active.
  BoxCollection retain(std::span<const LeafKey> hits) const;

  /// Index (into keys()) of the active leaf containing x. Cells are
  /// half-open [lo, hi) except on the upper faces of Q, which are closed.
  std::optional<std::size_t> locate(std::span<const double> x) const;

  /// Key of the depth-level cell containing x, active or not; nullopt if x
  /// lies outside Q.
  std::optional<LeafKey> cell_of(std::span<const double> x) const;

  bool excluded_point(std::span<const double> x) const;
  bool contains_key(LeafKey key) const;

  /// Geometry of a leaf, recomputed from its bit-path.
  BoxRegion box(LeafKey key) const;
  BoxRegion box_at(std::size_t index) const { return box(keys_[index]); }

  /// Half-widths of every leaf at this depth.
  std::vector<double> leaf_radius() const;

  /// Largest edge length (max-norm diameter) of the leaves at this depth.
  double leaf_diameter() const;

  std::string bitpath(LeafKey key) const;

 private:
  void cell_bounds(LeafKey key, std::vector<double>& lo, std::vector<double>& width) const;

  BoxRegion root_;
  std::size_t depth_ = 0;
  std::vector<LeafKey> keys_;
  std::vector<BoxRegion> excluded_;
};

/// Header `k=<k> depth=<depth> count=<N>`, then one line per active leaf:
/// `<bitpath> <center_1> ... <center_k> <radius_1> ... <radius_k>`, numbers
/// printed with 17 significant digits.
void write_covering(std::ostream& os, const BoxCollection& c);
void write_covering(const std::string& path, const BoxCollection& c);

/// Parses a covering file. The root box is reconstructed from the first
/// leaf (an empty covering yields the unit cube) and checked against every
/// leaf. Throws IoError on malformed input.
BoxCollection read_covering(std::istream& is);
BoxCollection read_covering(const std::string& path);

}  // namespace dembed
