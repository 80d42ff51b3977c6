#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bf2d/multiscale.hpp"
#include "bf2d/polar.hpp"

using namespace bf2d;

namespace {

VectorXcd random_vec(Eigen::Index n, std::uint64_t seed) {
  Rng rng(seed);
  VectorXcd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.next_cgauss();
  return v;
}

MatrixXcd dense_fio(const PhaseFunction& phi, int n) {
  auto [x, om] = build_uniform_grids(n);
  auto k = fio_kernel(phi, n);
  const auto N = static_cast<Eigen::Index>(x.size());
  MatrixXcd m(N, N);
  for (Eigen::Index i = 0; i < N; ++i)
    for (Eigen::Index j = 0; j < N; ++j)
      m(i, j) = k.entry(x.points[static_cast<std::size_t>(i)], om.points[static_cast<std::size_t>(j)]);
  return m;
}

}  // namespace

TEST_CASE("pbf on the linear phase matches the dense kernel and the plain butterfly") {
  const int n = 16;
  RandConfig cfg;
  cfg.rank = 10;
  cfg.rng_seed = 2;
  auto pf = build_pbf(dot_phase(), n, cfg);
  CHECK(pf.depth == 5);  // log2(n) + 1

  MatrixXcd dense = dense_fio(dot_phase(), n);
  VectorXcd g = random_vec(256, 3);
  VectorXcd ref = dense * g;
  CHECK((pf.apply(g) - ref).norm() / ref.norm() <= 1e-4);

  CHECK(pf.apply(VectorXcd::Zero(256)).norm() == 0.0);
  VectorXcd g2 = random_vec(256, 4);
  const cplx a(1.5, -0.25), b(-0.75, 2.0);
  CHECK((pf.apply(a * g + b * g2) - a * pf.apply(g) - b * pf.apply(g2)).norm() <=
        1e-12 * ref.norm());

  // plain butterfly of the same kernel on uniform trees, same depth
  auto [x, om] = build_uniform_grids(n);
  QuadTree tx(x, {0.0, 0.0, 1.0}, 5);
  QuadTree tom(om, {-8.0, -8.0, 16.0}, 5);
  ButterflyOptions opts;
  opts.rand = cfg;
  auto bf = build_butterfly(fio_kernel(dot_phase(), n), tx, tom, opts);
  VectorXcd diff = pf.apply(g) - bf.apply(g);
  CHECK(diff.norm() / ref.norm() <= 2e-4);
}

TEST_CASE("pbf adjoint identity") {
  const int n = 16;
  RandConfig cfg;
  cfg.rank = 8;
  cfg.rng_seed = 5;
  auto pf = build_pbf(radon_phase_fn(), n, cfg);
  for (std::uint64_t t = 0; t < 5; ++t) {
    VectorXcd g = random_vec(256, 10 + t), u = random_vec(256, 20 + t);
    const cplx lhs = pf.apply(g).dot(u);
    const cplx rhs = g.dot(pf.adjoint_apply(u));
    CHECK(std::abs(lhs - rhs) <= 1e-10 * g.norm() * u.norm() * 256.0);
  }
}

TEST_CASE("pbf rejects non-homogeneous phases") {
  PhaseFunction bad{[](const Point2& x, const Point2& xi) {
    return dot(x, xi) + 0.01 * (xi.x1 * xi.x1 + xi.x2 * xi.x2);
  }};
  RandConfig cfg;
  cfg.rank = 4;
  CHECK_THROWS_AS(build_pbf(bad, 16, cfg), std::invalid_argument);
}

TEST_CASE("mbf structure at n=64: piece depths, center block shape") {
  RandConfig cfg;
  cfg.rank = 4;  // structure only
  cfg.rng_seed = 7;
  auto mf = build_mbf(radon_phase_fn(), 64, cfg, 8, PieceDepthRule::Classic);
  REQUIRE(mf.pieces.size() == 2);
  CHECK(mf.pieces[0].depth == 6);
  CHECK(mf.pieces[1].depth == 4);

  auto mr = build_mbf(radon_phase_fn(), 64, cfg, 8);  // bandwidth-one default
  CHECK(mr.pieces[0].depth == 6);
  CHECK(mr.pieces[1].depth == 5);
  CHECK(mf.center.rows() == 4096);
  CHECK(mf.center.cols() == 289);
  CHECK(mf.pieces[0].restriction.size() == 4096 - 33 * 33);
  CHECK(mf.pieces[0].bf.ncols == 4096 - 33 * 33);

  // piece depths are even for every n the formula covers
  for (int n : {32, 64, 128, 256}) {
    int L = 0;
    while ((1 << L) < n) ++L;
    for (int t = 0; L - t >= 2 && n / (1 << (t + 2)) >= 8; ++t)
      CHECK((2 * ((L - t) / 2)) % 2 == 0);
  }
}

TEST_CASE("mbf: center-supported input is reproduced exactly") {
  const int n = 32;
  RandConfig cfg;
  cfg.rank = 6;
  cfg.rng_seed = 9;
  auto mf = build_mbf(radon_phase_fn(), n, cfg, 8);

  VectorXcd g = VectorXcd::Zero(1024);
  Rng rng(11);
  for (auto c : mf.center_idx) g(static_cast<Eigen::Index>(c)) = rng.next_cgauss();
  VectorXcd gc(static_cast<Eigen::Index>(mf.center_idx.size()));
  for (Eigen::Index c = 0; c < gc.size(); ++c)
    gc(c) = g(static_cast<Eigen::Index>(mf.center_idx[static_cast<std::size_t>(c)]));
  VectorXcd expect = mf.center * gc;
  CHECK((mf.apply(g) - expect).norm() <= 1e-12 * expect.norm());

  CHECK(mf.apply(VectorXcd::Zero(1024)).norm() == 0.0);
}

TEST_CASE("mbf piece additivity and dense-oracle error at n=32") {
  const int n = 32;
  RandConfig cfg;
  cfg.rank = 16;
  cfg.rng_seed = 13;
  auto mf = build_mbf(radon_phase_fn(), n, cfg, 8);
  VectorXcd g = random_vec(1024, 17);

  // additivity: summing piecewise-masked applications reproduces apply
  VectorXcd total = mf.apply(g);
  VectorXcd parts = VectorXcd::Zero(1024);
  {
    VectorXcd gmask = VectorXcd::Zero(1024);
    for (auto c : mf.center_idx) gmask(static_cast<Eigen::Index>(c)) = g(static_cast<Eigen::Index>(c));
    parts += mf.apply(gmask);
  }
  for (const auto& piece : mf.pieces) {
    VectorXcd gmask = VectorXcd::Zero(1024);
    for (auto c : piece.restriction) gmask(static_cast<Eigen::Index>(c)) = g(static_cast<Eigen::Index>(c));
    parts += mf.apply(gmask);
  }
  CHECK((total - parts).norm() <= 1e-12 * total.norm());

  // full apply against the dense kernel, bounded by the summed piece errors
  MatrixXcd dense = dense_fio(radon_phase_fn(), n);
  VectorXcd ref = dense * g;
  double piece_abs = 0.0;
  auto [x, om] = build_uniform_grids(n);
  for (const auto& piece : mf.pieces) {
    VectorXcd gt(static_cast<Eigen::Index>(piece.restriction.size()));
    MatrixXcd dsub(1024, gt.size());
    for (Eigen::Index c = 0; c < gt.size(); ++c) {
      gt(c) = g(static_cast<Eigen::Index>(piece.restriction[static_cast<std::size_t>(c)]));
      dsub.col(c) = dense.col(static_cast<Eigen::Index>(piece.restriction[static_cast<std::size_t>(c)]));
    }
    piece_abs += (piece.bf.apply(gt) - dsub * gt).norm();
  }
  const double err = (mf.apply(g) - ref).norm() / ref.norm();
  CHECK(err <= 1.01 * piece_abs / ref.norm());
  CHECK(err <= 1e-2);
}

TEST_CASE("corona piece trees keep the four center-adjacent cells empty") {
  for (int n : {32, 64}) {
    auto [x, om] = build_uniform_grids(n);
    auto part = corona_decompose(om, n, 8);
    int L = 0;
    while ((1 << L) < n) ++L;
    for (std::size_t t = 0; t < part.coronas.size(); ++t) {
      const auto& idx = part.coronas[t];
      PointSet sub;
      for (std::size_t k = 0; k < idx.size(); ++k) {
        sub.points.push_back(om.points[idx[k]]);
        sub.ids.push_back(k);
      }
      const int depth = 2 * ((L - static_cast<int>(t)) / 2);
      const double w = double(n) / double(1 << (t + 1));
      QuadTree tsub(sub, {-w, -w, 2.0 * w}, depth);
      for (std::uint32_t r : {1u, 2u})
        for (std::uint32_t c : {1u, 2u})
          CHECK(tsub.empty_node(2, morton_index(2, r, c)));
    }
  }
}

TEST_CASE("mbf adjoint identity") {
  const int n = 32;
  RandConfig cfg;
  cfg.rank = 10;
  cfg.rng_seed = 19;
  auto mf = build_mbf(radon_phase_fn(), n, cfg, 8);
  for (std::uint64_t t = 0; t < 5; ++t) {
    VectorXcd g = random_vec(1024, 30 + t), u = random_vec(1024, 40 + t);
    const cplx lhs = mf.apply(g).dot(u);
    const cplx rhs = g.dot(mf.adjoint_apply(u));
    CHECK(std::abs(lhs - rhs) <= 1e-10 * g.norm() * u.norm() * 1024.0);
  }
}
