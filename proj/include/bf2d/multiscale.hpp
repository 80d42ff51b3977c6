// Multiscale butterfly factorization: one butterfly per dyadic frequency
// corona plus a dense center block covering the singularity at xi = 0.
#ifndef BF2D_MULTISCALE_HPP
#define BF2D_MULTISCALE_HPP

#include "bf2d/butterfly.hpp"

namespace bf2d {

struct MultiscalePiece {
  int t = 0;      // corona index
  int depth = 0;  // tree depth used for this piece
  std::vector<std::uint64_t> restriction;  // corona point indices into Omega
  ButterflyFactorization bf;               // over X x Omega_t
};

// Piece tree depth rules.
//   Classic:       L_t = 2*floor((L-t)/2), always even; cell bandwidth is 1
//                  or 2 cycles depending on parity.
//   BandwidthOne:  L_t = L-t, odd depths allowed; exactly one cycle per cell
//                  pair at every level, so accuracy and storage scale evenly
//                  in n.
//   BandwidthHalf: L_t = L-t+1; half-cycle cells, roughly 3x the storage for
//                  an extra order of accuracy at the same rank.
enum class PieceDepthRule { BandwidthHalf, BandwidthOne, Classic };

struct MultiscaleFactorization {
  int n = 0;
  int halfwidth = 8;
  std::uint64_t nrows = 0;
  std::uint64_t ncols = 0;
  std::vector<MultiscalePiece> pieces;
  std::vector<std::uint64_t> center_idx;
  MatrixXcd center;  // nrows x |center_idx|, evaluated directly

  VectorXcd apply(const VectorXcd& g, std::size_t* work = nullptr) const;
  VectorXcd adjoint_apply(const VectorXcd& u, std::size_t* work = nullptr) const;
  MatrixXcd apply_mat(const MatrixXcd& g) const;
  MatrixXcd adjoint_apply_mat(const MatrixXcd& u) const;
  std::size_t total_nnz() const;  // factor entries plus the dense center block
  LinearOperator as_operator() const;
};

// kernel must provide an entry oracle (sampling construction) or a black-box
// matvec pair over the full Omega ordering (probe construction).
MultiscaleFactorization build_mbf(const KernelHandle& kernel, int n, const RandConfig& cfg,
                                  int center_halfwidth = 8, BuildMode mode = BuildMode::Auto,
                                  PieceDepthRule rule = PieceDepthRule::BandwidthOne);

MultiscaleFactorization build_mbf(const PhaseFunction& phi, int n, const RandConfig& cfg,
                                  int center_halfwidth = 8,
                                  PieceDepthRule rule = PieceDepthRule::BandwidthOne);

}  // namespace bf2d

#endif
