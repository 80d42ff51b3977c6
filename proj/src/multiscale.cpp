#include "bf2d/multiscale.hpp"

#include <algorithm>
#include <stdexcept>

namespace bf2d {

namespace {

int log2i(int n) {
  int l = 0;
  while ((1 << l) < n) ++l;
  return l;
}

}  // namespace

MultiscaleFactorization build_mbf(const KernelHandle& kernel, int n, const RandConfig& cfg,
                                  int center_halfwidth, BuildMode mode, PieceDepthRule rule) {
  auto [x, om] = build_uniform_grids(n);
  auto part = corona_decompose(om, n, center_halfwidth);
  const int L = log2i(n);
  const std::size_t nn = om.size();

  if (mode == BuildMode::Auto)
    mode = kernel.has_entry() ? BuildMode::EntrySampling : BuildMode::MatvecProbes;

  MultiscaleFactorization mf;
  mf.n = n;
  mf.halfwidth = center_halfwidth;
  mf.nrows = x.size();
  mf.ncols = nn;
  mf.center_idx.assign(part.center.begin(), part.center.end());

  for (std::size_t t = 0; t < part.coronas.size(); ++t) {
    const auto& idx = part.coronas[t];
    MultiscalePiece piece;
    piece.t = static_cast<int>(t);
    const int lt = L - static_cast<int>(t);
    switch (rule) {
      case PieceDepthRule::BandwidthHalf: piece.depth = std::max(2, lt + 1); break;
      case PieceDepthRule::BandwidthOne: piece.depth = std::max(2, lt); break;
      case PieceDepthRule::Classic: piece.depth = std::max(2, 2 * (lt / 2)); break;
    }
    piece.restriction.assign(idx.begin(), idx.end());

    PointSet sub;
    sub.points.reserve(idx.size());
    sub.ids.reserve(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      sub.points.push_back(om.points[idx[k]]);
      sub.ids.push_back(k);
    }
    const double w = double(n) / double(1 << (t + 1));
    QuadTree tx(x, {0.0, 0.0, 1.0}, piece.depth);
    QuadTree tsub(sub, {-w, -w, 2.0 * w}, piece.depth);

    ButterflyOptions opts;
    opts.rand = cfg;
    opts.rand.rng_seed = Rng::mix(cfg.rng_seed, 0x4242ULL + t);
    opts.mode = mode;
    if (mode == BuildMode::MatvecProbes) {
      opts.global_cols.assign(idx.begin(), idx.end());
      opts.global_ncols = nn;
    }
    piece.bf = build_butterfly(kernel, tx, tsub, opts);
    mf.pieces.push_back(std::move(piece));
  }

  // center block evaluated directly: entries when available, otherwise
  // indicator columns through the black-box operator
  const auto nc = static_cast<Eigen::Index>(mf.center_idx.size());
  if (kernel.has_entry()) {
    mf.center.resize(static_cast<Eigen::Index>(mf.nrows), nc);
    parallel_for(static_cast<std::size_t>(mf.nrows), [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i)
        for (Eigen::Index c = 0; c < nc; ++c)
          mf.center(static_cast<Eigen::Index>(i), c) =
              kernel.entry(x.points[i], om.points[mf.center_idx[static_cast<std::size_t>(c)]]);
    });
  } else {
    MatrixXcd ind = MatrixXcd::Zero(static_cast<Eigen::Index>(nn), nc);
    for (Eigen::Index c = 0; c < nc; ++c)
      ind(static_cast<Eigen::Index>(mf.center_idx[static_cast<std::size_t>(c)]), c) = 1.0;
    mf.center = kernel.matvec(ind);
  }
  return mf;
}

MultiscaleFactorization build_mbf(const PhaseFunction& phi, int n, const RandConfig& cfg,
                                  int center_halfwidth, PieceDepthRule rule) {
  return build_mbf(fio_kernel(phi, n), n, cfg, center_halfwidth, BuildMode::EntrySampling, rule);
}

VectorXcd MultiscaleFactorization::apply(const VectorXcd& g, std::size_t* work) const {
  if (g.size() != static_cast<Eigen::Index>(ncols))
    throw std::invalid_argument("MultiscaleFactorization::apply: length mismatch");
  VectorXcd gc(static_cast<Eigen::Index>(center_idx.size()));
  for (Eigen::Index c = 0; c < gc.size(); ++c)
    gc(c) = g(static_cast<Eigen::Index>(center_idx[static_cast<std::size_t>(c)]));
  VectorXcd u = center * gc;
  if (work) *work += static_cast<std::size_t>(center.rows()) * static_cast<std::size_t>(center.cols());
  for (const auto& piece : pieces) {
    VectorXcd gt(static_cast<Eigen::Index>(piece.restriction.size()));
    for (Eigen::Index c = 0; c < gt.size(); ++c)
      gt(c) = g(static_cast<Eigen::Index>(piece.restriction[static_cast<std::size_t>(c)]));
    u += piece.bf.apply(gt, work);
  }
  return u;
}

VectorXcd MultiscaleFactorization::adjoint_apply(const VectorXcd& u, std::size_t* work) const {
  if (u.size() != static_cast<Eigen::Index>(nrows))
    throw std::invalid_argument("MultiscaleFactorization::adjoint_apply: length mismatch");
  VectorXcd g = VectorXcd::Zero(static_cast<Eigen::Index>(ncols));
  VectorXcd gc = center.adjoint() * u;
  if (work) *work += static_cast<std::size_t>(center.rows()) * static_cast<std::size_t>(center.cols());
  for (Eigen::Index c = 0; c < gc.size(); ++c)
    g(static_cast<Eigen::Index>(center_idx[static_cast<std::size_t>(c)])) = gc(c);
  for (const auto& piece : pieces) {
    VectorXcd gt = piece.bf.adjoint_apply(u, work);
    for (Eigen::Index c = 0; c < gt.size(); ++c)
      g(static_cast<Eigen::Index>(piece.restriction[static_cast<std::size_t>(c)])) = gt(c);
  }
  return g;
}

MatrixXcd MultiscaleFactorization::apply_mat(const MatrixXcd& g) const {
  if (g.rows() != static_cast<Eigen::Index>(ncols))
    throw std::invalid_argument("MultiscaleFactorization::apply_mat: length mismatch");
  MatrixXcd gc(static_cast<Eigen::Index>(center_idx.size()), g.cols());
  for (Eigen::Index c = 0; c < gc.rows(); ++c)
    gc.row(c) = g.row(static_cast<Eigen::Index>(center_idx[static_cast<std::size_t>(c)]));
  MatrixXcd u = center * gc;
  for (const auto& piece : pieces) {
    MatrixXcd gt(static_cast<Eigen::Index>(piece.restriction.size()), g.cols());
    for (Eigen::Index c = 0; c < gt.rows(); ++c)
      gt.row(c) = g.row(static_cast<Eigen::Index>(piece.restriction[static_cast<std::size_t>(c)]));
    u += piece.bf.apply_mat(gt);
  }
  return u;
}

MatrixXcd MultiscaleFactorization::adjoint_apply_mat(const MatrixXcd& u) const {
  if (u.rows() != static_cast<Eigen::Index>(nrows))
    throw std::invalid_argument("MultiscaleFactorization::adjoint_apply_mat: length mismatch");
  MatrixXcd g = MatrixXcd::Zero(static_cast<Eigen::Index>(ncols), u.cols());
  MatrixXcd gc = center.adjoint() * u;
  for (Eigen::Index c = 0; c < gc.rows(); ++c)
    g.row(static_cast<Eigen::Index>(center_idx[static_cast<std::size_t>(c)])) = gc.row(c);
  for (const auto& piece : pieces) {
    MatrixXcd gt = piece.bf.adjoint_apply_mat(u);
    for (Eigen::Index c = 0; c < gt.rows(); ++c)
      g.row(static_cast<Eigen::Index>(piece.restriction[static_cast<std::size_t>(c)])) = gt.row(c);
  }
  return g;
}

std::size_t MultiscaleFactorization::total_nnz() const {
  std::size_t total = static_cast<std::size_t>(center.rows()) * static_cast<std::size_t>(center.cols());
  for (const auto& piece : pieces) total += piece.bf.total_nnz();
  return total;
}

LinearOperator MultiscaleFactorization::as_operator() const {
  return {[this](const MatrixXcd& g) { return apply_mat(g); },
          [this](const MatrixXcd& u) { return adjoint_apply_mat(u); }, nrows, ncols};
}

}  // namespace bf2d
