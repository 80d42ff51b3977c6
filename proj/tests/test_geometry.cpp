#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "bf2d/geometry.hpp"

using namespace bf2d;

TEST_CASE("uniform grids: enumeration and sizes") {
  auto [x, om] = build_uniform_grids(2);
  REQUIRE(x.size() == 4);
  CHECK(x.points[0].x1 == 0.0);
  CHECK(x.points[0].x2 == 0.0);
  CHECK(x.points[1].x1 == 0.0);
  CHECK(x.points[1].x2 == 0.5);
  CHECK(x.points[2].x1 == 0.5);
  CHECK(x.points[2].x2 == 0.0);
  CHECK(x.points[3].x1 == 0.5);
  CHECK(x.points[3].x2 == 0.5);
  CHECK(om.points[0].x1 == -1.0);
  CHECK(om.points[0].x2 == -1.0);
  CHECK(om.points[1].x1 == -1.0);
  CHECK(om.points[1].x2 == 0.0);
  CHECK(om.points[2].x1 == 0.0);
  CHECK(om.points[2].x2 == -1.0);
  CHECK(om.points[3].x1 == 0.0);
  CHECK(om.points[3].x2 == 0.0);

  auto [x64, om64] = build_uniform_grids(64);
  CHECK(x64.size() == 4096);
  CHECK(om64.size() == 4096);

  CHECK_THROWS(build_uniform_grids(6));
  CHECK_THROWS(build_uniform_grids(0));
}

TEST_CASE("morton index matches the labeled Z-order layout") {
  CHECK(morton_index(0, 0, 0) == 0);
  // cell with x1 in [0.25,0.5), x2 in [0.5,0.75) at level 2 has index 6
  CHECK(morton_index(2, 1, 2) == 6);
  // children of node i live at 4i+t
  for (std::uint64_t t = 0; t < 4; ++t) {
    auto [r, c] = morton_decode(2, 4 * 2 + t);
    auto [pr, pc] = morton_decode(1, 2);
    CHECK(r / 2 == pr);
    CHECK(c / 2 == pc);
  }
  CHECK_THROWS(morton_index(1, 2, 0));
}

TEST_CASE("morton round-trip is exact up to level 8") {
  for (int l = 0; l <= 8; ++l) {
    const std::uint32_t lim = 1u << l;
    for (std::uint32_t r = 0; r < lim; ++r)
      for (std::uint32_t c = 0; c < lim; ++c) {
        auto [rr, cc] = morton_decode(l, morton_index(l, r, c));
        REQUIRE(rr == r);
        REQUIRE(cc == c);
      }
  }
}

namespace {

// brute-force binning oracle: counts per node computed independently of the tree
std::vector<std::uint64_t> bin_counts(const PointSet& ps, const BBox& root, int level) {
  std::vector<std::uint64_t> cnt(std::size_t(1) << (2 * level), 0);
  const std::uint64_t cells = std::uint64_t(1) << level;
  for (const auto& p : ps.points) {
    auto cell = [&](double v, double lo) {
      auto c = static_cast<std::uint64_t>((v - lo) / root.side * double(cells));
      return std::min(c, cells - 1);
    };
    ++cnt[morton_index(level, std::uint32_t(cell(p.x1, root.lo1)), std::uint32_t(cell(p.x2, root.lo2)))];
  }
  return cnt;
}

void check_partition(const QuadTree& t, const PointSet& ps) {
  std::vector<std::size_t> all(ps.ids);
  std::sort(all.begin(), all.end());
  for (int l = 0; l <= t.depth(); ++l) {
    std::vector<std::size_t> got;
    for (std::uint64_t m = 0; m < t.node_count(l); ++m) {
      auto ids = t.node_point_ids(l, m);
      got.insert(got.end(), ids.begin(), ids.end());
    }
    std::sort(got.begin(), got.end());
    REQUIRE(got == all);
  }
}

}  // namespace

TEST_CASE("quadtree on uniform grids") {
  auto [x4, om4] = build_uniform_grids(4);
  QuadTree tx(x4, {0.0, 0.0, 1.0}, 2);
  for (std::uint64_t m = 0; m < tx.node_count(2); ++m) CHECK(tx.node_size(2, m) == 1);
  check_partition(tx, x4);

  QuadTree tom(om4, {-2.0, -2.0, 4.0}, 2);
  for (std::uint64_t m = 0; m < tom.node_count(1); ++m) CHECK(tom.node_size(1, m) == 4);
  check_partition(tom, om4);

  // bbox halving and child quadrant
  auto bb = tx.node_bbox(1, 2);
  CHECK(bb.side == 0.5);
  CHECK(bb.lo1 == 0.5);
  CHECK(bb.lo2 == 0.0);
}

TEST_CASE("quadtree rejects points outside the root box") {
  PointSet ps;
  ps.points = {{0.5, 0.5}, {1.5, 0.2}};
  ps.ids = {0, 1};
  CHECK_THROWS(build_quadtree(ps, {0.0, 0.0, 1.0}, 2));
}

TEST_CASE("quadtree on polar points: non-uniform counts, exact partition") {
  const int n = 16;
  auto [x, om] = build_uniform_grids(n);
  auto pol = polar_transform(om, n);
  QuadTree tp(pol.p, {0.0, 0.0, 1.0}, 4);
  check_partition(tp, pol.p);
  for (int l = 0; l <= 4; ++l) {
    auto oracle = bin_counts(pol.p, {0.0, 0.0, 1.0}, l);
    std::uint64_t total = 0;
    bool uneven = false;
    for (std::uint64_t m = 0; m < tp.node_count(l); ++m) {
      REQUIRE(tp.node_size(l, m) == oracle[m]);
      total += tp.node_size(l, m);
      if (l == 4 && tp.node_size(l, m) != tp.node_size(l, 0)) uneven = true;
    }
    CHECK(total == 256);
    if (l == 4) CHECK(uneven);
  }
}

TEST_CASE("polar transform values and round-trip") {
  const int n = 64;
  auto [x, om] = build_uniform_grids(n);
  auto pol = polar_transform(om, n);

  auto find = [&](double a, double b) {
    for (std::size_t k = 0; k < om.size(); ++k)
      if (om.points[k].x1 == a && om.points[k].x2 == b) return k;
    REQUIRE(false);
    return std::size_t(0);
  };
  auto p = pol.p.points[find(16, 16)];
  CHECK(p.x1 == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(p.x2 == doctest::Approx(0.125).epsilon(1e-13));
  p = pol.p.points[find(0, 0)];
  CHECK(p.x1 == 0.0);
  CHECK(p.x2 == 0.0);
  p = pol.p.points[find(-32, 0)];
  CHECK(p.x1 == doctest::Approx(M_SQRT1_2).epsilon(1e-13));
  CHECK(p.x2 == doctest::Approx(0.5).epsilon(1e-13));

  // every p must lie in [0,1]^2 and invert exactly after rounding
  for (int nn : {4, 16, 64, 128}) {
    auto [xx, oo] = build_uniform_grids(nn);
    auto pp = polar_transform(oo, nn);
    for (std::size_t k = 0; k < oo.size(); ++k) {
      REQUIRE(pp.p.points[k].x1 >= 0.0);
      REQUIRE(pp.p.points[k].x1 <= 1.0);
      REQUIRE(pp.p.points[k].x2 >= 0.0);
      REQUIRE(pp.p.points[k].x2 < 1.0);
      auto xi = polar_inverse(pp.p.points[k], nn);
      REQUIRE(xi.x1 == oo.points[k].x1);
      REQUIRE(xi.x2 == oo.points[k].x2);
    }
    // bijection on indices
    std::set<std::size_t> seen(pp.xi_to_p.begin(), pp.xi_to_p.end());
    REQUIRE(seen.size() == oo.size());
  }
}

TEST_CASE("corona decomposition: counts, coverage, nesting") {
  const int n = 64;
  auto [x, om] = build_uniform_grids(n);
  auto part = corona_decompose(om, n, 8);
  REQUIRE(part.coronas.size() == 2);
  CHECK(part.cutoffs[0].first == 16.0);
  CHECK(part.cutoffs[0].second == 32.0);
  CHECK(part.cutoffs[1].first == 8.0);
  CHECK(part.cutoffs[1].second == 16.0);
  CHECK(part.coronas[0].size() == 4096 - 33 * 33);  // 3007
  CHECK(part.coronas[1].size() == 33 * 33 - 17 * 17);
  CHECK(part.center.size() == 17 * 17);
  CHECK(part.coronas[0].size() + part.coronas[1].size() + part.center.size() == 4096);

  auto p32 = corona_decompose(build_uniform_grids(32).second, 32, 8);
  REQUIRE(p32.coronas.size() == 1);
  for (auto id : p32.center) {
    const auto& xi = build_uniform_grids(32).second.points[id];
    CHECK(std::max(std::abs(xi.x1), std::abs(xi.x2)) <= 8.0);
  }

  CHECK_THROWS(corona_decompose(om, 64, 5));
  CHECK_THROWS(corona_decompose(build_uniform_grids(16).second, 16, 8));
}

TEST_CASE("corona coverage exhaustive up to n=256") {
  for (int n : {32, 64, 128, 256}) {
    auto om = build_uniform_grids(n).second;
    auto part = corona_decompose(om, n, 8);
    // nesting: outer cutoff of corona t+1 equals inner cutoff of corona t
    for (std::size_t t = 0; t + 1 < part.cutoffs.size(); ++t)
      CHECK(part.cutoffs[t + 1].second == part.cutoffs[t].first);
    std::vector<int> hits(om.size(), 0);
    for (std::size_t t = 0; t < part.coronas.size(); ++t)
      for (auto id : part.coronas[t]) {
        ++hits[id];
        const auto& xi = om.points[id];
        const double mx = std::max(std::abs(xi.x1), std::abs(xi.x2));
        REQUIRE(mx > part.cutoffs[t].first);
        REQUIRE(mx <= part.cutoffs[t].second);
      }
    for (auto id : part.center) ++hits[id];
    for (auto h : hits) REQUIRE(h == 1);
  }
}
