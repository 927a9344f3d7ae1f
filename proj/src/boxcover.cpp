#include "dembed/boxcover.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "dembed/error.hpp"

namespace dembed {

BoxRegion BoxRegion::from_bounds(std::span<const double> lower, std::span<const double> upper) {
  if (lower.size() != upper.size()) throw Error(ErrorKind::InvalidArgument, "box bounds differ in dimension");
  BoxRegion b;
  for (std::size_t i = 0; i < lower.size(); ++i) {
    b.center.push_back(0.5 * (lower[i] + upper[i]));
    b.radius.push_back(0.5 * (upper[i] - lower[i]));
  }
  b.validate();
  return b;
}

bool BoxRegion::contains(std::span<const double> x) const {
  for (std::size_t i = 0; i < dim(); ++i) {
    if (!(std::fabs(x[i] - center[i]) <= radius[i])) return false;
  }
  return true;
}

bool BoxRegion::contains_interior(std::span<const double> x) const {
  for (std::size_t i = 0; i < dim(); ++i) {
    if (!(std::fabs(x[i] - center[i]) < radius[i])) return false;
  }
  return true;
}

void BoxRegion::validate() const {
  if (center.empty() || center.size() != radius.size()) {
    throw Error(ErrorKind::InvalidArgument, "box center and radius must be nonempty and equal length");
  }
  for (std::size_t i = 0; i < dim(); ++i) {
    if (!(radius[i] > 0.0) || !std::isfinite(radius[i]) || !std::isfinite(center[i])) {
      throw Error(ErrorKind::InvalidArgument, "box radii must be positive and finite");
    }
  }
}

BoxCollection::BoxCollection(BoxRegion root, std::vector<BoxRegion> excluded)
    : BoxCollection(std::move(root), 0, {0}, std::move(excluded)) {}

BoxCollection::BoxCollection(BoxRegion root, std::size_t depth, std::vector<LeafKey> active,
                             std::vector<BoxRegion> excluded)
    : root_(std::move(root)), depth_(depth), keys_(std::move(active)), excluded_(std::move(excluded)) {
  root_.validate();
  if (depth_ > kMaxDepth) throw Error(ErrorKind::InvalidArgument, "collection depth exceeds 64");
  for (const BoxRegion& u : excluded_) {
    u.validate();
    if (u.dim() != k()) throw Error(ErrorKind::InvalidArgument, "excluded region dimension differs from Q");
  }
  std::sort(keys_.begin(), keys_.end());
  keys_.erase(std::unique(keys_.begin(), keys_.end()), keys_.end());
  if (depth_ < 64 && !keys_.empty() && keys_.back() >> depth_ != 0) {
    throw Error(ErrorKind::InvalidArgument, "leaf key longer than the collection depth");
  }
}

BoxCollection BoxCollection::subdivide() const {
  if (depth_ >= kMaxDepth) throw Error(ErrorKind::InvalidArgument, "cannot subdivide beyond depth 64");
  std::vector<LeafKey> children;
  children.reserve(2 * keys_.size());
  for (LeafKey key : keys_) {
    children.push_back(key << 1);
    children.push_back((key << 1) | 1U);
  }
  return BoxCollection(root_, depth_ + 1, std::move(children), excluded_);
}

BoxCollection BoxCollection::retain(std::span<const LeafKey> hits) const {
  std::vector<LeafKey> kept(hits.begin(), hits.end());
  for (LeafKey key : kept) {
    if (!contains_key(key)) throw Error(ErrorKind::InvalidArgument, "retained leaf is not active");
  }
  return BoxCollection(root_, depth_, std::move(kept), excluded_);
}

bool BoxCollection::contains_key(LeafKey key) const { return std::binary_search(keys_.begin(), keys_.end(), key); }

bool BoxCollection::excluded_point(std::span<const double> x) const {
  return std::any_of(excluded_.begin(), excluded_.end(), [&](const BoxRegion& u) { return u.contains_interior(x); });
}

std::optional<LeafKey> BoxCollection::cell_of(std::span<const double> x) const {
  const std::size_t kd = k();
  if (x.size() != kd) throw Error(ErrorKind::InvalidArgument, "point dimension differs from k");
  double lo[64];
  double width[64];
  std::vector<double> lo_heap, width_heap;
  double* plo = lo;
  double* pw = width;
  if (kd > 64) {
    lo_heap.resize(kd);
    width_heap.resize(kd);
    plo = lo_heap.data();
    pw = width_heap.data();
  }
  for (std::size_t c = 0; c < kd; ++c) {
    plo[c] = root_.center[c] - root_.radius[c];
    pw[c] = 2.0 * root_.radius[c];
    if (!(x[c] >= plo[c] && x[c] <= plo[c] + pw[c])) return std::nullopt;
  }
  LeafKey key = 0;
  for (std::size_t i = 0; i < depth_; ++i) {
    const std::size_t c = i % kd;
    pw[c] *= 0.5;
    const bool upper = x[c] >= plo[c] + pw[c];
    if (upper) plo[c] += pw[c];
    key = (key << 1) | (upper ? 1U : 0U);
  }
  return key;
}

std::optional<std::size_t> BoxCollection::locate(std::span<const double> x) const {
  const std::optional<LeafKey> key = cell_of(x);
  if (!key || excluded_point(x)) return std::nullopt;
  const auto it = std::lower_bound(keys_.begin(), keys_.end(), *key);
  if (it == keys_.end() || *it != *key) return std::nullopt;
  return static_cast<std::size_t>(it - keys_.begin());
}

void BoxCollection::cell_bounds(LeafKey key, std::vector<double>& lo, std::vector<double>& width) const {
  const std::size_t kd = k();
  lo.resize(kd);
  width.resize(kd);
  for (std::size_t c = 0; c < kd; ++c) {
    lo[c] = root_.center[c] - root_.radius[c];
    width[c] = 2.0 * root_.radius[c];
  }
  for (std::size_t i = 0; i < depth_; ++i) {
    const std::size_t c = i % kd;
    width[c] *= 0.5;
    if ((key >> (depth_ - 1 - i)) & 1U) lo[c] += width[c];
  }
}

BoxRegion BoxCollection::box(LeafKey key) const {
  std::vector<double> lo, width;
  cell_bounds(key, lo, width);
  BoxRegion b;
  for (std::size_t c = 0; c < k(); ++c) {
    b.center.push_back(lo[c] + 0.5 * width[c]);
    b.radius.push_back(0.5 * width[c]);
  }
  return b;
}

std::vector<double> BoxCollection::leaf_radius() const {
  std::vector<double> r = root_.radius;
  for (std::size_t i = 0; i < depth_; ++i) r[i % k()] *= 0.5;
  return r;
}

double BoxCollection::leaf_diameter() const {
  const std::vector<double> r = leaf_radius();
  return 2.0 * *std::max_element(r.begin(), r.end());
}

std::string BoxCollection::bitpath(LeafKey key) const {
  std::string s(depth_, '0');
  for (std::size_t i = 0; i < depth_; ++i) {
    if ((key >> (depth_ - 1 - i)) & 1U) s[i] = '1';
  }
  return s;
}

void write_covering(std::ostream& os, const BoxCollection& c) {
  os << "k=" << c.k() << " depth=" << c.depth() << " count=" << c.size() << '\n';
  char buf[32];
  std::vector<double> lo, width;
  for (LeafKey key : c.keys()) {
    const BoxRegion b = c.box(key);
    os << c.bitpath(key);
    for (double v : b.center) {
      std::snprintf(buf, sizeof buf, " %.17g", v);
      os << buf;
    }
    for (double v : b.radius) {
      std::snprintf(buf, sizeof buf, " %.17g", v);
      os << buf;
    }
    os << '\n';
  }
}

void write_covering(const std::string& path, const BoxCollection& c) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::IoError, "cannot write " + path);
  write_covering(os, c);
  if (!os) throw Error(ErrorKind::IoError, "failed writing " + path);
}

namespace {

struct ParsedLeaf {
  LeafKey key;
  std::vector<double> center;
  std::vector<double> radius;
};

BoxRegion root_from_leaf(const ParsedLeaf& leaf, std::size_t depth) {
  const std::size_t kd = leaf.center.size();
  BoxRegion root;
  root.center.resize(kd);
  root.radius.resize(kd);
  std::vector<int> splits(kd, 0);
  for (std::size_t i = 0; i < depth; ++i) ++splits[i % kd];
  for (std::size_t c = 0; c < kd; ++c) root.radius[c] = std::ldexp(leaf.radius[c], splits[c]);
  std::vector<double> width(kd), offset(kd, 0.0);
  for (std::size_t c = 0; c < kd; ++c) width[c] = 2.0 * root.radius[c];
  for (std::size_t i = 0; i < depth; ++i) {
    const std::size_t c = i % kd;
    width[c] *= 0.5;
    if ((leaf.key >> (depth - 1 - i)) & 1U) offset[c] += width[c];
  }
  for (std::size_t c = 0; c < kd; ++c) {
    const double lo = (leaf.center[c] - leaf.radius[c]) - offset[c];
    root.center[c] = lo + root.radius[c];
  }
  return root;
}

}  // namespace

BoxCollection read_covering(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorKind::IoError, "covering file is empty");
  std::size_t k = 0, depth = 0, count = 0;
  if (std::sscanf(line.c_str(), "k=%zu depth=%zu count=%zu", &k, &depth, &count) != 3 || k == 0) {
    throw Error(ErrorKind::IoError, "malformed covering header: " + line);
  }
  if (depth > BoxCollection::kMaxDepth) throw Error(ErrorKind::IoError, "covering depth exceeds 64");
  std::vector<ParsedLeaf> leaves;
  leaves.reserve(count);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string path;
    ParsedLeaf leaf{0, std::vector<double>(k), std::vector<double>(k)};
    if (depth > 0) ls >> path;
    if (path.size() != depth) throw Error(ErrorKind::IoError, "bit-path length differs from depth");
    for (char ch : path) {
      if (ch != '0' && ch != '1') throw Error(ErrorKind::IoError, "bit-path must be a 0/1 string");
      leaf.key = (leaf.key << 1) | (ch == '1' ? 1U : 0U);
    }
    for (double& v : leaf.center) ls >> v;
    for (double& v : leaf.radius) ls >> v;
    if (!ls) throw Error(ErrorKind::IoError, "malformed covering line: " + line);
    leaves.push_back(std::move(leaf));
  }
  if (leaves.size() != count) throw Error(ErrorKind::IoError, "covering count does not match its lines");
  if (leaves.empty()) {
    BoxRegion unit{std::vector<double>(k, 0.5), std::vector<double>(k, 0.5)};
    return BoxCollection(std::move(unit), depth, {});
  }
  BoxRegion root = root_from_leaf(leaves.front(), depth);
  std::vector<LeafKey> keys;
  for (const ParsedLeaf& leaf : leaves) keys.push_back(leaf.key);
  BoxCollection c(std::move(root), depth, std::move(keys));
  for (const ParsedLeaf& leaf : leaves) {
    const BoxRegion b = c.box(leaf.key);
    for (std::size_t i = 0; i < k; ++i) {
      const double scale = std::max(1.0, std::fabs(leaf.center[i]));
      if (std::fabs(b.center[i] - leaf.center[i]) > 1e-12 * scale || std::fabs(b.radius[i] - leaf.radius[i]) > 1e-12 * scale) {
        throw Error(ErrorKind::IoError, "leaf geometry inconsistent with its bit-path");
      }
    }
  }
  return c;
}

BoxCollection read_covering(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::IoError, "cannot read " + path);
  return read_covering(is);
}

}  // namespace dembed
