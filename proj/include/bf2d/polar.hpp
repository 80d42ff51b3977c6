// Polar butterfly factorization: butterfly over (X, P) after the scaled
// polar change of variables that removes the xi = 0 singularity.
#ifndef BF2D_POLAR_HPP
#define BF2D_POLAR_HPP

#include "bf2d/butterfly.hpp"

namespace bf2d {

struct PolarFactorization {
  int n = 0;
  int depth = 0;
  ButterflyFactorization bf;           // over (X, P)
  std::vector<std::uint64_t> xi_to_p;  // index bijection Omega -> P

  VectorXcd apply(const VectorXcd& g, std::size_t* work = nullptr) const;
  VectorXcd adjoint_apply(const VectorXcd& u, std::size_t* work = nullptr) const;
  MatrixXcd apply_mat(const MatrixXcd& g) const;
  MatrixXcd adjoint_apply_mat(const MatrixXcd& u) const;
  std::size_t total_nnz() const { return bf.total_nnz(); }
  LinearOperator as_operator() const;
};

// Entry-oracle construction (sampling) from the phase; the phase must be
// homogeneous of degree 1 in xi (spot-checked, tolerance 1e-8). depth 0
// selects log2(n) + 1, the accuracy-calibrated default.
PolarFactorization build_pbf(const PhaseFunction& phi, int n, const RandConfig& cfg,
                             int depth = 0);

// Black-box construction (probes) for operators without an entry oracle,
// e.g. FIO compositions; `op` acts on vectors indexed over Omega.
PolarFactorization build_pbf_matvec(const LinearOperator& op, int n, const RandConfig& cfg,
                                    int depth = 0);

}  // namespace bf2d

#endif
