#include "bf2d/polar.hpp"

#include <cmath>
#include <stdexcept>

namespace bf2d {

namespace {

int default_depth(int n) {
  int l = 0;
  while ((1 << l) < n) ++l;
  return l + 1;  // bandwidth-halving depth, calibrated against the error targets
}

void check_homogeneous(const PhaseFunction& phi) {
  Rng rng(0x9021);
  for (int trial = 0; trial < 8; ++trial) {
    Point2 x{rng.next_unit(), rng.next_unit()};
    Point2 xi{rng.next_unit() * 8 - 4, rng.next_unit() * 8 - 4};
    const double base = phi.eval(x, xi);
    for (double lam : {2.0, 3.5}) {
      const double scaled = phi.eval(x, {lam * xi.x1, lam * xi.x2});
      if (std::abs(scaled - lam * base) > 1e-8 * (1.0 + std::abs(lam * base)))
        throw std::invalid_argument("build_pbf: phase is not homogeneous of degree 1");
    }
  }
}

PolarFactorization build_common(const KernelHandle& kernel, int n, const ButterflyOptions& opts,
                                int depth) {
  auto [x, om] = build_uniform_grids(n);
  auto pol = polar_transform(om, n);
  if (depth <= 0) depth = default_depth(n);
  QuadTree tx(x, {0.0, 0.0, 1.0}, depth);
  QuadTree tp(pol.p, {0.0, 0.0, 1.0}, depth);

  PolarFactorization pf;
  pf.n = n;
  pf.depth = depth;
  pf.xi_to_p.assign(pol.xi_to_p.begin(), pol.xi_to_p.end());
  pf.bf = build_butterfly(kernel, tx, tp, opts);
  return pf;
}

}  // namespace

PolarFactorization build_pbf(const PhaseFunction& phi, int n, const RandConfig& cfg, int depth) {
  check_homogeneous(phi);
  ButterflyOptions opts;
  opts.rand = cfg;
  opts.mode = BuildMode::EntrySampling;
  return build_common(polar_fio_kernel(phi, n), n, opts, depth);
}

PolarFactorization build_pbf_matvec(const LinearOperator& op, int n, const RandConfig& cfg,
                                    int depth) {
  if (!op.apply || !op.adjoint)
    throw std::invalid_argument("build_pbf_matvec: operator needs apply and adjoint");
  KernelHandle k;
  k.rows = op.rows;
  k.cols = op.cols;
  k.matvec = op.apply;
  k.adjoint_matvec = op.adjoint;
  ButterflyOptions opts;
  opts.rand = cfg;
  opts.mode = BuildMode::MatvecProbes;
  // P keeps Omega's indexing, so probe columns embed by the inverse map
  const std::size_t nn = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
  auto pol = polar_transform(build_uniform_grids(n).second, n);
  opts.global_cols.resize(nn);
  for (std::size_t i = 0; i < nn; ++i) opts.global_cols[pol.xi_to_p[i]] = i;
  opts.global_ncols = nn;
  return build_common(k, n, opts, depth);
}

VectorXcd PolarFactorization::apply(const VectorXcd& g, std::size_t* work) const {
  if (g.size() != static_cast<Eigen::Index>(bf.ncols))
    throw std::invalid_argument("PolarFactorization::apply: length mismatch");
  VectorXcd gp(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i)
    gp(static_cast<Eigen::Index>(xi_to_p[static_cast<std::size_t>(i)])) = g(i);
  return bf.apply(gp, work);
}

VectorXcd PolarFactorization::adjoint_apply(const VectorXcd& u, std::size_t* work) const {
  VectorXcd gp = bf.adjoint_apply(u, work);
  VectorXcd g(gp.size());
  for (Eigen::Index i = 0; i < g.size(); ++i)
    g(i) = gp(static_cast<Eigen::Index>(xi_to_p[static_cast<std::size_t>(i)]));
  return g;
}

MatrixXcd PolarFactorization::apply_mat(const MatrixXcd& g) const {
  MatrixXcd gp(g.rows(), g.cols());
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    gp.row(static_cast<Eigen::Index>(xi_to_p[static_cast<std::size_t>(i)])) = g.row(i);
  return bf.apply_mat(gp);
}

MatrixXcd PolarFactorization::adjoint_apply_mat(const MatrixXcd& u) const {
  MatrixXcd gp = bf.adjoint_apply_mat(u);
  MatrixXcd g(gp.rows(), gp.cols());
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    g.row(i) = gp.row(static_cast<Eigen::Index>(xi_to_p[static_cast<std::size_t>(i)]));
  return g;
}

LinearOperator PolarFactorization::as_operator() const {
  return {[this](const MatrixXcd& g) { return apply_mat(g); },
          [this](const MatrixXcd& u) { return adjoint_apply_mat(u); }, bf.nrows, bf.ncols};
}

}  // namespace bf2d
