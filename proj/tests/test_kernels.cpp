#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bf2d/geometry.hpp"
#include "bf2d/kernels.hpp"

using namespace bf2d;

namespace {

MatrixXcd dense_matrix(const KernelHandle& k, const PointSet& x, const PointSet& om) {
  MatrixXcd m(static_cast<Eigen::Index>(x.size()), static_cast<Eigen::Index>(om.size()));
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < om.size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          k.entry(x.points[i], om.points[j]);
  return m;
}

VectorXcd random_vec(Eigen::Index n, std::uint64_t seed) {
  Rng rng(seed);
  VectorXcd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.next_cgauss();
  return v;
}

}  // namespace

TEST_CASE("dft kernel: entries and fast matvec") {
  auto k4 = dft_kernel(4);
  CHECK(k4.entry({0.0, 0.0}, {3.0, -1.0}) == cplx(1.0, 0.0));

  auto [x4, om4] = build_uniform_grids(4);
  VectorXcd g = VectorXcd::Zero(16);
  g((0 + 2) * 4 + (0 + 2)) = 1.0;  // indicator of xi = (0,0)
  VectorXcd u = k4.matvec(g);
  for (int i = 0; i < 16; ++i) CHECK(std::abs(u(i) - cplx(1.0, 0.0)) <= 1e-12);

  auto [x8, om8] = build_uniform_grids(8);
  auto k8 = dft_kernel(8);
  MatrixXcd dense = dense_matrix(k8, x8, om8);
  for (std::uint64_t s = 0; s < 5; ++s) {
    VectorXcd gg = random_vec(64, 100 + s);
    VectorXcd fast = k8.matvec(gg);
    VectorXcd ref = dense * gg;
    CHECK((fast - ref).norm() <= 1e-10 * ref.norm());
  }
}

TEST_CASE("all four fast transform orientations match dense formulas at n=8") {
  const int n = 8;
  auto [x, om] = build_uniform_grids(n);
  const auto N = static_cast<Eigen::Index>(x.size());
  MatrixXcd fwd(N, N), tra(N, N);
  for (Eigen::Index i = 0; i < N; ++i)
    for (Eigen::Index j = 0; j < N; ++j) {
      fwd(i, j) = std::exp(cplx(0.0, -2.0 * M_PI * dot(x.points[static_cast<std::size_t>(i)],
                                                       om.points[static_cast<std::size_t>(j)])));
      tra(j, i) = fwd(i, j);  // v(eta) = sum_y e^{-2pi i y.eta} w(y)
    }
  VectorXcd g = random_vec(N, 7), w = random_vec(N, 8);
  CHECK((dft_apply(g, n) - fwd * g).norm() <= 1e-10 * g.norm() * n);
  CHECK((dft_adjoint(w, n) - fwd.adjoint() * w).norm() <= 1e-10 * w.norm() * n);
  CHECK((dft_transpose(w, n) - tra * w).norm() <= 1e-10 * w.norm() * n);
  CHECK((dft_transpose_adjoint(g, n) - tra.adjoint() * g).norm() <= 1e-10 * g.norm() * n);
}

TEST_CASE("radon phase values, homogeneity, unimodularity") {
  CHECK(radon_phase({0.0, 0.0}, {1.0, 0.0}) == doctest::Approx(0.125).epsilon(1e-14));
  CHECK(radon_phase({0.0, 0.0}, {0.0, 2.0}) == doctest::Approx(0.375).epsilon(1e-14));
  CHECK(radon_phase({0.37, 0.81}, {0.0, 0.0}) == 0.0);

  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    Point2 x{rng.next_unit(), rng.next_unit()};
    Point2 xi{rng.next_unit() * 10 - 5, rng.next_unit() * 10 - 5};
    for (double lam : {2.0, 3.5}) {
      Point2 sxi{lam * xi.x1, lam * xi.x2};
      CHECK(std::abs(radon_phase(x, sxi) - lam * radon_phase(x, xi)) <=
            1e-12 * (1.0 + std::abs(radon_phase(x, xi))));
    }
  }

  auto k = fio_kernel(radon_phase_fn(), 16);
  auto kp = polar_fio_kernel(radon_phase_fn(), 16);
  for (int trial = 0; trial < 20; ++trial) {
    Point2 x{rng.next_unit(), rng.next_unit()};
    Point2 xi{std::floor(rng.next_unit() * 16) - 8, std::floor(rng.next_unit() * 16) - 8};
    Point2 p{rng.next_unit(), rng.next_unit()};
    CHECK(std::abs(std::abs(k.entry(x, xi)) - 1.0) <= 1e-14);
    CHECK(std::abs(std::abs(kp.entry(x, p)) - 1.0) <= 1e-14);
  }
}

TEST_CASE("psi phase: linear phase formula, origin, radon value") {
  auto psi_dot = psi_phase(dot_phase(), 16);
  Rng rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    Point2 x{rng.next_unit(), rng.next_unit()};
    Point2 p{rng.next_unit(), rng.next_unit()};
    const double expect =
        M_SQRT1_2 * p.x1 * (x.x1 * std::cos(2 * M_PI * p.x2) + x.x2 * std::sin(2 * M_PI * p.x2));
    CHECK(psi_dot(x, p) == doctest::Approx(expect).epsilon(1e-13));
    CHECK(psi_dot(x, {0.0, p.x2}) == 0.0);
  }
  auto psi_radon = psi_phase(radon_phase_fn(), 16);
  CHECK(psi_radon({0.0, 0.0}, {0.5, 0.0}) == doctest::Approx(M_SQRT2 / 32.0).epsilon(1e-13));
}

TEST_CASE("polar kernel equals the FIO kernel through the polar map") {
  const int n = 16;
  auto [x, om] = build_uniform_grids(n);
  auto pol = polar_transform(om, n);
  auto k = fio_kernel(radon_phase_fn(), n);
  auto kp = polar_fio_kernel(radon_phase_fn(), n);
  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const auto i = static_cast<std::size_t>(rng.next_u64() % x.size());
    const auto j = static_cast<std::size_t>(rng.next_u64() % om.size());
    CHECK(std::abs(kp.entry(x.points[i], pol.p.points[j]) - k.entry(x.points[i], om.points[j])) <=
          1e-9);
  }
}

TEST_CASE("synthetic kernel: all-ones at r=1, exact rank bound at r=2") {
  auto k1 = synthetic_lowrank_kernel(16, 1, 42);
  auto [x, om] = build_uniform_grids(16);
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto i = static_cast<std::size_t>(rng.next_u64() % x.size());
    const auto j = static_cast<std::size_t>(rng.next_u64() % om.size());
    CHECK(k1.entry(x.points[i], om.points[j]) == cplx(1.0, 0.0));
  }

  auto k2 = synthetic_lowrank_kernel(16, 2, 42);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<std::size_t> rows(12), cols(12);
    for (auto& v : rows) v = static_cast<std::size_t>(rng.next_u64() % x.size());
    for (auto& v : cols) v = static_cast<std::size_t>(rng.next_u64() % om.size());
    MatrixXcd block(12, 12);
    for (int a = 0; a < 12; ++a)
      for (int b = 0; b < 12; ++b)
        block(a, b) = k2.entry(x.points[rows[static_cast<std::size_t>(a)]],
                               om.points[cols[static_cast<std::size_t>(b)]]);
    Eigen::JacobiSVD<MatrixXcd> svd(block);
    CHECK(svd.singularValues()(2) <= 1e-12 * svd.singularValues()(0));
  }
}

TEST_CASE("composition kernel matches the dense K F K chain at n=16") {
  const int n = 16;
  auto [x, om] = build_uniform_grids(n);
  auto k = fio_kernel(radon_phase_fn(), n);
  MatrixXcd kd = dense_matrix(k, x, om);
  LinearOperator exact_k{[kd](const MatrixXcd& b) { return MatrixXcd(kd * b); },
                         [kd](const MatrixXcd& b) { return MatrixXcd(kd.adjoint() * b); },
                         x.size(), om.size()};
  auto comp = composition_kernel(exact_k, n);
  CHECK(!comp.has_entry());

  VectorXcd zero = VectorXcd::Zero(256);
  CHECK(comp.matvec(zero).norm() == 0.0);

  // dense middle transform: F(eta, y) = e^{-2pi i y.eta}
  MatrixXcd fmid(256, 256);
  for (int a = 0; a < 256; ++a)
    for (int b = 0; b < 256; ++b)
      fmid(a, b) = std::exp(cplx(0.0, -2.0 * M_PI * dot(x.points[static_cast<std::size_t>(b)],
                                                        om.points[static_cast<std::size_t>(a)])));
  MatrixXcd chain = kd * fmid * kd;
  VectorXcd g = random_vec(256, 3);
  VectorXcd u_fast = comp.matvec(g);
  CHECK((u_fast - chain * g).norm() <= 1e-9 * (chain * g).norm());

  // adjoint identity <Kg, u> = <g, K* u>
  VectorXcd uu = random_vec(256, 4);
  const cplx lhs = comp.matvec(g).col(0).dot(uu);
  const cplx rhs = g.dot(comp.adjoint_matvec(uu).col(0));
  const double scale = g.norm() * uu.norm() * chain.norm() / 16.0;
  CHECK(std::abs(lhs - rhs) <= 1e-10 * scale);
}

TEST_CASE("matvec and entry oracle agree for the dft kernel up to n=16") {
  for (int n : {4, 8, 16}) {
    auto [x, om] = build_uniform_grids(n);
    auto k = dft_kernel(n);
    MatrixXcd dense = dense_matrix(k, x, om);
    VectorXcd g = random_vec(dense.cols(), 55 + static_cast<std::uint64_t>(n));
    CHECK((k.matvec(g) - dense * g).norm() <= 1e-10 * (dense * g).norm());
    CHECK((k.adjoint_matvec(g) - dense.adjoint() * g).norm() <=
          1e-10 * (dense.adjoint() * g).norm());
  }
}
