#include "bf2d/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace bf2d {

namespace {

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

std::uint64_t part1by1(std::uint32_t v) {
  std::uint64_t x = v;
  x &= 0xffffffffULL;
  x = (x | (x << 16)) & 0x0000ffff0000ffffULL;
  x = (x | (x << 8)) & 0x00ff00ff00ff00ffULL;
  x = (x | (x << 4)) & 0x0f0f0f0f0f0f0f0fULL;
  x = (x | (x << 2)) & 0x3333333333333333ULL;
  x = (x | (x << 1)) & 0x5555555555555555ULL;
  return x;
}

std::uint32_t compact1by1(std::uint64_t x) {
  x &= 0x5555555555555555ULL;
  x = (x | (x >> 1)) & 0x3333333333333333ULL;
  x = (x | (x >> 2)) & 0x0f0f0f0f0f0f0f0fULL;
  x = (x | (x >> 4)) & 0x00ff00ff00ff00ffULL;
  x = (x | (x >> 8)) & 0x0000ffff0000ffffULL;
  x = (x | (x >> 16)) & 0x00000000ffffffffULL;
  return static_cast<std::uint32_t>(x);
}

}  // namespace

std::pair<PointSet, PointSet> build_uniform_grids(int n) {
  if (!is_pow2(n) || n < 2)
    throw std::invalid_argument("build_uniform_grids: n must be a power of two >= 2, got " +
                                std::to_string(n));
  PointSet x, om;
  const std::size_t nn = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
  x.points.reserve(nn);
  x.ids.reserve(nn);
  om.points.reserve(nn);
  om.ids.reserve(nn);
  std::size_t id = 0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      x.points.push_back({double(a) / n, double(b) / n});
      x.ids.push_back(id++);
    }
  id = 0;
  for (int a = -n / 2; a < n / 2; ++a)
    for (int b = -n / 2; b < n / 2; ++b) {
      om.points.push_back({double(a), double(b)});
      om.ids.push_back(id++);
    }
  return {std::move(x), std::move(om)};
}

std::uint64_t morton_index(int level, std::uint32_t row, std::uint32_t col) {
  const std::uint32_t lim = std::uint32_t(1) << level;
  if (row >= lim || col >= lim)
    throw std::out_of_range("morton_index: row/col out of range for level " + std::to_string(level));
  return (part1by1(row) << 1) | part1by1(col);
}

std::pair<std::uint32_t, std::uint32_t> morton_decode(int level, std::uint64_t index) {
  if (index >= (std::uint64_t(1) << (2 * level)))
    throw std::out_of_range("morton_decode: index out of range");
  return {compact1by1(index >> 1), compact1by1(index)};
}

QuadTree::QuadTree(const PointSet& ps, const BBox& root, int depth) : depth_(depth), root_(root) {
  if (depth < 0) throw std::invalid_argument("QuadTree: negative depth");
  const std::size_t n = ps.size();
  const std::uint64_t cells = std::uint64_t(1) << depth;  // per dimension

  std::vector<std::uint64_t> leaf(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Point2& p = ps.points[k];
    const double y1 = (p.x1 - root.lo1) / root.side;
    const double y2 = (p.x2 - root.lo2) / root.side;
    if (!(y1 >= 0.0 && y1 <= 1.0 && y2 >= 0.0 && y2 <= 1.0))
      throw std::invalid_argument("QuadTree: point outside root box");
    auto cell = [&](double y) {
      auto c = static_cast<std::uint64_t>(y * static_cast<double>(cells));
      return std::min(c, cells - 1);  // closed upper boundary clamps into last cell
    };
    leaf[k] = morton_index(depth, static_cast<std::uint32_t>(cell(y1)),
                           static_cast<std::uint32_t>(cell(y2)));
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return leaf[a] < leaf[b]; });

  pts_tree_.resize(n);
  tree2ext_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    pts_tree_[k] = ps.points[order[k]];
    tree2ext_[k] = ps.ids[order[k]];
  }

  // leaf prefix offsets, then coarser levels by striding
  offsets_.resize(static_cast<std::size_t>(depth) + 1);
  auto& leafoff = offsets_[static_cast<std::size_t>(depth)];
  const std::uint64_t nleaf = std::uint64_t(1) << (2 * depth);
  leafoff.assign(nleaf + 1, 0);
  for (std::size_t k = 0; k < n; ++k) ++leafoff[leaf[order[k]] + 1];
  for (std::uint64_t m = 0; m < nleaf; ++m) leafoff[m + 1] += leafoff[m];
  for (int l = depth - 1; l >= 0; --l) {
    const std::uint64_t cnt = std::uint64_t(1) << (2 * l);
    auto& off = offsets_[static_cast<std::size_t>(l)];
    off.resize(cnt + 1);
    const auto& child = offsets_[static_cast<std::size_t>(l) + 1];
    for (std::uint64_t m = 0; m <= cnt; ++m) off[m] = child[m * 4];
  }
}

BBox QuadTree::node_bbox(int level, std::uint64_t morton) const {
  auto [row, col] = morton_decode(level, morton);
  const double w = root_.side / static_cast<double>(std::uint64_t(1) << level);
  return {root_.lo1 + w * row, root_.lo2 + w * col, w};
}

std::vector<std::size_t> QuadTree::node_point_ids(int level, std::uint64_t morton) const {
  auto [b, e] = span(level, morton);
  return std::vector<std::size_t>(tree2ext_.begin() + static_cast<std::ptrdiff_t>(b),
                                  tree2ext_.begin() + static_cast<std::ptrdiff_t>(e));
}

QuadTree build_quadtree(const PointSet& ps, const BBox& root, int depth) {
  return QuadTree(ps, root, depth);
}

PolarResult polar_transform(const PointSet& omega, int n) {
  PolarResult res;
  res.p.points.resize(omega.size());
  res.p.ids = omega.ids;
  res.xi_to_p.resize(omega.size());
  for (std::size_t k = 0; k < omega.size(); ++k) {
    const Point2& xi = omega.points[k];
    Point2 p{0.0, 0.0};
    if (xi.x1 != 0.0 || xi.x2 != 0.0) {
      const double rad = std::hypot(xi.x1, xi.x2);
      p.x1 = std::min(M_SQRT2 * rad / n, 1.0);  // corner points hit 1 exactly up to roundoff
      double theta = std::atan2(xi.x2, xi.x1);
      if (theta < 0.0) theta += 2.0 * M_PI;
      p.x2 = theta / (2.0 * M_PI);
      if (p.x2 >= 1.0) p.x2 = 0.0;  // atan2 rounding at full turn
    }
    res.p.points[k] = p;
    res.xi_to_p[k] = k;
  }
  return res;
}

Point2 polar_inverse(const Point2& p, int n) {
  const double rad = M_SQRT1_2 * n * p.x1;
  const double ang = 2.0 * M_PI * p.x2;
  return {std::round(rad * std::cos(ang)), std::round(rad * std::sin(ang))};
}

CoronaPartition corona_decompose(const PointSet& omega, int n, int center_halfwidth) {
  if (center_halfwidth < 4 || (center_halfwidth & (center_halfwidth - 1)) != 0)
    throw std::invalid_argument("corona_decompose: center_halfwidth must be a power of two >= 4");
  if (n < 4 * center_halfwidth)
    throw std::invalid_argument("corona_decompose: n too small relative to center_halfwidth");

  // innermost inner cutoff n/2^(t_max+2) equals the halfwidth
  int t_max = 0;
  while (n / (1 << (t_max + 2)) > center_halfwidth) ++t_max;

  CoronaPartition part;
  part.coronas.resize(static_cast<std::size_t>(t_max) + 1);
  for (int t = 0; t <= t_max; ++t)
    part.cutoffs.emplace_back(double(n) / (1 << (t + 2)), double(n) / (1 << (t + 1)));

  for (std::size_t k = 0; k < omega.size(); ++k) {
    const double mx = std::max(std::abs(omega.points[k].x1), std::abs(omega.points[k].x2));
    bool placed = false;
    for (int t = 0; t <= t_max; ++t) {
      if (mx > part.cutoffs[static_cast<std::size_t>(t)].first &&
          mx <= part.cutoffs[static_cast<std::size_t>(t)].second) {
        part.coronas[static_cast<std::size_t>(t)].push_back(omega.ids[k]);
        placed = true;
        break;
      }
    }
    if (!placed) part.center.push_back(omega.ids[k]);
  }
  return part;
}

}  // namespace bf2d
