// Point sets, Morton-ordered quadtrees, the scaled polar transformation of
// the frequency grid, and its dyadic corona decomposition.
#ifndef BF2D_GEOMETRY_HPP
#define BF2D_GEOMETRY_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "bf2d/common.hpp"

namespace bf2d {

struct PointSet {
  std::vector<Point2> points;
  std::vector<std::size_t> ids;  // unique indices into an external ordering

  std::size_t size() const { return points.size(); }
};

// axis-aligned square, lower corner + sidelength
struct BBox {
  double lo1 = 0.0;
  double lo2 = 0.0;
  double side = 1.0;
};

// Uniform grids: X = {(n1/n, n2/n)} in [0,1)^2 and the integer frequency
// grid in [-n/2, n/2)^2, both in row-major order (first coordinate outer).
// n must be a power of two.
std::pair<PointSet, PointSet> build_uniform_grids(int n);

// Z-order index with the row (x1) bit more significant at each scale.
std::uint64_t morton_index(int level, std::uint32_t row, std::uint32_t col);
std::pair<std::uint32_t, std::uint32_t> morton_decode(int level, std::uint64_t index);

// Complete quadtree of fixed depth. Points are kept in "tree order" (sorted
// by leaf Morton index, stable), so every node at every level owns one
// contiguous slice of that order. Empty nodes are retained with empty slices.
class QuadTree {
 public:
  QuadTree() = default;
  // Throws std::invalid_argument if a point falls outside root. Points on the
  // closed upper boundary of the root box are clamped into the last cell;
  // interior splits are half-open.
  QuadTree(const PointSet& ps, const BBox& root, int depth);

  int depth() const { return depth_; }
  const BBox& root() const { return root_; }
  std::uint64_t node_count(int level) const { return std::uint64_t(1) << (2 * level); }
  std::size_t num_points() const { return pts_tree_.size(); }

  // contiguous slice [begin,end) of the tree order owned by node (level, morton)
  std::pair<std::uint64_t, std::uint64_t> span(int level, std::uint64_t morton) const {
    const auto& off = offsets_[static_cast<std::size_t>(level)];
    return {off[static_cast<std::size_t>(morton)], off[static_cast<std::size_t>(morton) + 1]};
  }
  bool empty_node(int level, std::uint64_t morton) const {
    auto s = span(level, morton);
    return s.first == s.second;
  }
  std::uint64_t node_size(int level, std::uint64_t morton) const {
    auto s = span(level, morton);
    return s.second - s.first;
  }
  BBox node_bbox(int level, std::uint64_t morton) const;

  // external ids of the node's points (PointSet::ids)
  std::vector<std::size_t> node_point_ids(int level, std::uint64_t morton) const;

  // tree-ordered views
  const std::vector<Point2>& points_tree_order() const { return pts_tree_; }
  const std::vector<std::size_t>& tree_to_external() const { return tree2ext_; }

 private:
  int depth_ = 0;
  BBox root_;
  std::vector<Point2> pts_tree_;
  std::vector<std::size_t> tree2ext_;
  // offsets_[l] has 4^l + 1 entries; node m owns [offsets_[l][m], offsets_[l][m+1])
  std::vector<std::vector<std::uint64_t>> offsets_;
};

QuadTree build_quadtree(const PointSet& ps, const BBox& root, int depth);

// Scaled polar map of the frequency grid into [0,1]^2:
//   xi = (sqrt(2)/2) * n * p1 * (cos 2*pi*p2, sin 2*pi*p2).
// xi = 0 maps to p = (0,0). The index map is the identity bijection
// (P keeps Omega's ids and ordering).
struct PolarResult {
  PointSet p;
  std::vector<std::size_t> xi_to_p;  // index map (bijection on 0..N-1)
};
PolarResult polar_transform(const PointSet& omega, int n);

// inverse of the polar map, rounded back onto the integer grid
Point2 polar_inverse(const Point2& p, int n);

struct CoronaPartition {
  // coronas[t] = indices of points with n/2^(t+2) < max|xi| <= n/2^(t+1)
  std::vector<std::vector<std::size_t>> coronas;
  std::vector<std::size_t> center;  // exact complement of the coronas
  std::vector<std::pair<double, double>> cutoffs;  // (inner, outer) per corona
};

// Dyadic corona decomposition; coronas stop once the inner cutoff reaches
// center_halfwidth (power of two >= 4), so t_max = log2(n/halfwidth) - 2.
CoronaPartition corona_decompose(const PointSet& omega, int n, int center_halfwidth);

}  // namespace bf2d

#endif
