#include "bf2d/randlr.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <set>
#include <stdexcept>

namespace bf2d {

namespace {

struct ThinSvd {
  MatrixXcd u;
  VectorXd sigma;
  MatrixXcd v;
};

// Thin SVD with a QR reduction first when the matrix is strongly rectangular.
ThinSvd thin_svd(const MatrixXcd& z) {
  const Eigen::Index m = z.rows(), n = z.cols();
  if (m > (4 * n) / 3 && n > 0) {
    Eigen::HouseholderQR<MatrixXcd> qr(z);
    MatrixXcd q = qr.householderQ() * MatrixXcd::Identity(m, n);
    MatrixXcd r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
    Eigen::JacobiSVD<MatrixXcd> svd(r, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return {q * svd.matrixU(), svd.singularValues(), svd.matrixV()};
  }
  if (n > (4 * m) / 3 && m > 0) {
    ThinSvd t = thin_svd(z.adjoint());
    return {t.v, t.sigma, t.u};
  }
  Eigen::JacobiSVD<MatrixXcd> svd(z, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

LowRankApprox finish_from_bases(const MatrixXcd& q_col, const MatrixXcd& q_row, const MatrixXcd& mid,
                                int r, bool converged) {
  ThinSvd ms = thin_svd(mid);
  const Eigen::Index keep = std::min<Eigen::Index>(r, ms.sigma.size());
  LowRankApprox out;
  out.U = q_col * ms.u.leftCols(keep);
  out.V = q_row * ms.v.leftCols(keep);
  out.sigma = ms.sigma.head(keep);
  out.form = LrForm::Svd;
  out.converged = converged;
  return out;
}

std::vector<Eigen::Index> leading_pivots(const MatrixXcd& a, Eigen::Index count) {
  Eigen::ColPivHouseholderQR<MatrixXcd> qr(a);
  const auto& perm = qr.colsPermutation().indices();
  count = std::min<Eigen::Index>(count, a.cols());
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(count));
  for (Eigen::Index i = 0; i < count; ++i) idx[static_cast<std::size_t>(i)] = perm(i);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::vector<Eigen::Index> union_with_random(const std::vector<Eigen::Index>& base, Eigen::Index n,
                                            Eigen::Index target, Rng& rng) {
  std::set<Eigen::Index> s(base.begin(), base.end());
  target = std::min(target, n);
  while (static_cast<Eigen::Index>(s.size()) < target)
    s.insert(static_cast<Eigen::Index>(rng.next_u64() % static_cast<std::uint64_t>(n)));
  return std::vector<Eigen::Index>(s.begin(), s.end());
}

MatrixXcd take_rows(const MatrixXcd& a, const std::vector<Eigen::Index>& rows) {
  MatrixXcd out(static_cast<Eigen::Index>(rows.size()), a.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = a.row(rows[i]);
  return out;
}

}  // namespace

MatrixXcd LowRankApprox::reconstruct() const {
  switch (form) {
    case LrForm::Svd:
      return U * sigma.asDiagonal() * V.adjoint();
    case LrForm::Usv:
      return U * s.asDiagonal() * V.adjoint();
    default:
      return U * V.adjoint();
  }
}

LowRankApprox truncated_svd(const MatrixXcd& z, int r) {
  if (r < 1) throw std::invalid_argument("truncated_svd: rank must be >= 1");
  ThinSvd t = thin_svd(z);
  const Eigen::Index keep = std::min<Eigen::Index>(r, t.sigma.size());
  LowRankApprox out;
  out.U = t.u.leftCols(keep);
  out.sigma = t.sigma.head(keep);
  out.V = t.v.leftCols(keep);
  out.form = LrForm::Svd;
  return out;
}

LowRankApprox convert_form(const LowRankApprox& a, LrForm target) {
  if (a.form != LrForm::Svd) throw std::invalid_argument("convert_form: source must be Svd form");
  LowRankApprox out;
  out.sigma = a.sigma;
  out.form = target;
  switch (target) {
    case LrForm::Svd:
      return a;
    case LrForm::Usv:
      for (Eigen::Index i = 0; i < a.sigma.size(); ++i)
        if (a.sigma(i) == 0.0)
          throw std::domain_error("convert_form: zero singular value, shrink the rank");
      out.U = a.U * a.sigma.asDiagonal();
      out.V = a.V * a.sigma.asDiagonal();
      out.s = a.sigma.cwiseInverse();
      return out;
    case LrForm::UvLeft:
      out.U = a.U * a.sigma.asDiagonal();
      out.V = a.V;
      return out;
    case LrForm::UvRight:
      out.U = a.U;
      out.V = a.V * a.sigma.asDiagonal();
      return out;
  }
  throw std::logic_error("convert_form: unreachable");
}

MatrixXcd pivoted_qr_basis(const MatrixXcd& a, Eigen::Index r) {
  const Eigen::Index k = std::min({r, a.rows(), a.cols()});
  Eigen::ColPivHouseholderQR<MatrixXcd> qr(a);
  return qr.householderQ() * MatrixXcd::Identity(a.rows(), k);
}

MatrixXcd pseudo_inverse(const MatrixXcd& a, double rel_cutoff) {
  ThinSvd t = thin_svd(a);
  const double smax = t.sigma.size() ? t.sigma(0) : 0.0;
  const double tol = rel_cutoff * smax;
  VectorXd inv = VectorXd::Zero(t.sigma.size());
  for (Eigen::Index i = 0; i < t.sigma.size(); ++i)
    if (t.sigma(i) > tol && t.sigma(i) > 0.0) inv(i) = 1.0 / t.sigma(i);
  return t.v * inv.asDiagonal() * t.u.adjoint();
}

LowRankApprox rsvd_from_probes(const MatrixXcd& zc, const MatrixXcd& zsr, const MatrixXcd& c,
                               const MatrixXcd& r_probe, int r) {
  const Eigen::Index m = zc.rows(), n = zsr.rows();
  const Eigen::Index r_eff = std::min<Eigen::Index>({static_cast<Eigen::Index>(r), m, n});
  MatrixXcd q_col = pivoted_qr_basis(zc, r_eff);
  MatrixXcd q_row = pivoted_qr_basis(zsr, r_eff);
  // M = (R^H Q_col)^+ (R^H Z C) (Q_row^H C)^+  with  R^H Z C = (Z^H R)^H C
  MatrixXcd mid = pseudo_inverse(r_probe.adjoint() * q_col) * (zsr.adjoint() * c) *
                  pseudo_inverse(q_row.adjoint() * c);
  return finish_from_bases(q_col, q_row, mid, static_cast<int>(r_eff), true);
}

LowRankApprox rsvd_matvec(const MatOracle& apply, const MatOracle& apply_adjoint, Eigen::Index m,
                          Eigen::Index n, const RandConfig& cfg) {
  const Eigen::Index q = cfg.rank + cfg.oversample;
  Rng rng(Rng::mix(cfg.rng_seed, 0x6d76ULL));
  MatrixXcd c = gaussian_matrix(n, q, rng);
  MatrixXcd r_probe = gaussian_matrix(m, q, rng);
  MatrixXcd zc = apply(c);
  MatrixXcd zsr = apply_adjoint(r_probe);
  return rsvd_from_probes(zc, zsr, c, r_probe, cfg.rank);
}

LowRankApprox rsvd_sampling(const EntryOracle& entry, Eigen::Index m, Eigen::Index n,
                            const RandConfig& cfg) {
  Rng rng(Rng::mix(cfg.rng_seed, 0x5a3fULL));
  const Eigen::Index q = std::min<Eigen::Index>(cfg.rank + cfg.oversample, std::min(m, n));
  const Eigen::Index growth =
      cfg.sample_growth > 0 ? cfg.sample_growth : 2 * (cfg.rank + cfg.oversample);

  auto rows_block = [&](const std::vector<Eigen::Index>& rows) {
    MatrixXcd b(static_cast<Eigen::Index>(rows.size()), n);
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (Eigen::Index j = 0; j < n; ++j) b(static_cast<Eigen::Index>(i), j) = entry(rows[i], j);
    return b;
  };
  auto cols_block = [&](const std::vector<Eigen::Index>& cols) {
    MatrixXcd b(m, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j)
      for (Eigen::Index i = 0; i < m; ++i) b(i, static_cast<Eigen::Index>(j)) = entry(i, cols[j]);
    return b;
  };

  // alternate between discovering representative columns from sampled rows
  // and representative rows from sampled columns, until both sets repeat
  std::vector<Eigen::Index> rep_rows, rep_cols;
  std::vector<Eigen::Index> rows_cur = sample_distinct(m, growth, rng);
  bool converged = false;
  for (int it = 0; it < cfg.max_sampling_iters; ++it) {
    auto new_cols = leading_pivots(rows_block(rows_cur), q);
    auto cols_cur = union_with_random(new_cols, n, growth, rng);
    auto new_rows = leading_pivots(cols_block(cols_cur).adjoint(), q);
    if (new_cols == rep_cols && new_rows == rep_rows) {
      converged = true;
      break;
    }
    rep_cols = std::move(new_cols);
    rep_rows = std::move(new_rows);
    rows_cur = union_with_random(rep_rows, m, growth, rng);
  }

  const Eigen::Index r_eff = std::min<Eigen::Index>({static_cast<Eigen::Index>(cfg.rank), m, n});
  MatrixXcd q_col = pivoted_qr_basis(cols_block(rep_cols), r_eff);
  MatrixXcd q_row = pivoted_qr_basis(rows_block(rep_rows).adjoint(), r_eff);

  const Eigen::Index extra = cfg.rank + cfg.oversample;
  auto i_row = union_with_random(rep_rows, m, static_cast<Eigen::Index>(rep_rows.size()) + extra, rng);
  auto i_col = union_with_random(rep_cols, n, static_cast<Eigen::Index>(rep_cols.size()) + extra, rng);
  MatrixXcd z_sub(static_cast<Eigen::Index>(i_row.size()), static_cast<Eigen::Index>(i_col.size()));
  for (std::size_t i = 0; i < i_row.size(); ++i)
    for (std::size_t j = 0; j < i_col.size(); ++j)
      z_sub(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = entry(i_row[i], i_col[j]);

  MatrixXcd mid = pseudo_inverse(take_rows(q_col, i_row)) * z_sub *
                  pseudo_inverse(take_rows(q_row, i_col).adjoint());
  return finish_from_bases(q_col, q_row, mid, static_cast<int>(r_eff), converged);
}

}  // namespace bf2d
