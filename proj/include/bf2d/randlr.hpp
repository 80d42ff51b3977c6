// Randomized low-rank factorization primitives: truncated SVD, SVD via
// random matvec probes, SVD via random sampling with representative
// row/column discovery, and conversion among the scaled factor forms.
#ifndef BF2D_RANDLR_HPP
#define BF2D_RANDLR_HPP

#include <functional>

#include "bf2d/common.hpp"

namespace bf2d {

// Factor forms: Svd is U*diag(sigma)*V^H with orthonormal U, V. The other
// three redistribute the singular values:
//   Usv:     (U0 S0) * S0^-1 * (V0 S0)^H   (both sides scaled)
//   UvLeft:  (U0 S0) * V0^H                (left scaled)
//   UvRight:  U0     * (V0 S0)^H           (right scaled)
enum class LrForm { Svd, Usv, UvLeft, UvRight };

struct LowRankApprox {
  MatrixXcd U;
  MatrixXcd V;
  VectorXd sigma;  // singular values of the underlying SVD, nonincreasing
  VectorXd s;      // diagonal middle factor, only meaningful in Usv form
  LrForm form = LrForm::Svd;
  bool converged = true;  // sampling variant: representative sets stabilized

  Eigen::Index rank() const { return U.cols(); }
  MatrixXcd reconstruct() const;
};

struct RandConfig {
  int rank = 8;
  int oversample = 8;
  std::uint64_t rng_seed = 0;
  int max_sampling_iters = 5;
  int sample_growth = 0;  // 0 -> 2*(rank+oversample)
};

// Best rank-min(r,m,n) approximation in 2-norm (r beyond min dim clamps).
LowRankApprox truncated_svd(const MatrixXcd& z, int r);

// From Svd form into one of the scaled forms. Throws std::domain_error when
// a retained singular value is exactly zero and the Usv inverse is requested.
LowRankApprox convert_form(const LowRankApprox& a, LrForm target);

// Orthonormal basis of the leading r pivoted-QR columns of a.
MatrixXcd pivoted_qr_basis(const MatrixXcd& a, Eigen::Index r);

// Moore-Penrose inverse; singular values below rel_cutoff * sigma_max drop.
MatrixXcd pseudo_inverse(const MatrixXcd& a, double rel_cutoff = 1e-12);

// Core of the matvec variant given precomputed probe products Z*C and Z^H*R.
// Shared by rsvd_matvec and the butterfly middle level, which batches the
// probes through a black-box operator.
LowRankApprox rsvd_from_probes(const MatrixXcd& zc, const MatrixXcd& zsr, const MatrixXcd& c,
                               const MatrixXcd& r_probe, int r);

using MatOracle = std::function<MatrixXcd(const MatrixXcd&)>;

LowRankApprox rsvd_matvec(const MatOracle& apply, const MatOracle& apply_adjoint, Eigen::Index m,
                          Eigen::Index n, const RandConfig& cfg);

using EntryOracle = std::function<cplx(Eigen::Index, Eigen::Index)>;

LowRankApprox rsvd_sampling(const EntryOracle& entry, Eigen::Index m, Eigen::Index n,
                            const RandConfig& cfg);

}  // namespace bf2d

#endif
