// Kernel abstraction (entry oracle and/or black-box matvec) and the concrete
// kernels: 2D Fourier, the Radon-type FIO phase, its polar form, the
// composition operator K F K, and an exactly low-rank synthetic kernel.
#ifndef BF2D_KERNELS_HPP
#define BF2D_KERNELS_HPP

#include <functional>

#include "bf2d/common.hpp"
#include "bf2d/geometry.hpp"

namespace bf2d {

// black-box linear operator acting on blocks of column vectors
struct LinearOperator {
  std::function<MatrixXcd(const MatrixXcd&)> apply;
  std::function<MatrixXcd(const MatrixXcd&)> adjoint;
  std::size_t rows = 0;
  std::size_t cols = 0;
};

struct KernelHandle {
  std::function<cplx(const Point2&, const Point2&)> entry;  // (x-point, xi-point)
  std::function<MatrixXcd(const MatrixXcd&)> matvec;        // blocks of N-vectors
  std::function<MatrixXcd(const MatrixXcd&)> adjoint_matvec;
  std::size_t rows = 0;
  std::size_t cols = 0;

  bool has_entry() const { return static_cast<bool>(entry); }
  bool has_matvec() const { return static_cast<bool>(matvec); }
  LinearOperator as_operator() const { return {matvec, adjoint_matvec, rows, cols}; }
};

struct PhaseFunction {
  std::function<double(const Point2&, const Point2&)> eval;  // (x, xi) -> real
};

// ---- fast 2D transforms on row-major n x n grids (n power of two) ----
// forward map of the Fourier kernel below: u(x) = sum_xi e^{-2pi i x.xi} g(xi)
VectorXcd dft_apply(const VectorXcd& g, int n);
// adjoint of dft_apply: v(xi) = sum_x e^{+2pi i x.xi} u(x)
VectorXcd dft_adjoint(const VectorXcd& u, int n);
// transposed orientation (space to frequency): v(eta) = sum_y e^{-2pi i y.eta} w(y)
VectorXcd dft_transpose(const VectorXcd& w, int n);
// adjoint of dft_transpose: w(y) = sum_eta e^{+2pi i y.eta} v(eta)
VectorXcd dft_transpose_adjoint(const VectorXcd& v, int n);

// entry(x, xi) = exp(-2pi i x.xi); matvec runs through the fast transform
KernelHandle dft_kernel(int n);

// Radon-type phase: x.xi + sqrt(c1(x)^2 xi1^2 + c2(x)^2 xi2^2) with
// c1 = (2 + sin 2pi x1 sin 2pi x2)/16, c2 = (2 + cos 2pi x1 cos 2pi x2)/16
double radon_phase(const Point2& x, const Point2& xi);
PhaseFunction radon_phase_fn();
PhaseFunction dot_phase();  // x.xi, the Fourier phase

// entry(x, xi) = exp(2pi i Phi(x, xi)) on X x Omega
KernelHandle fio_kernel(const PhaseFunction& phi, int n);

// polar-coordinates phase Psi(x,p) = (sqrt2/2) p1 Phi(x, (cos 2pi p2, sin 2pi p2));
// requires Phi homogeneous of degree 1 in xi
std::function<double(const Point2&, const Point2&)> psi_phase(const PhaseFunction& phi, int n);

// entry(x, p) = exp(2pi i n Psi(x, p)) on X x P
KernelHandle polar_fio_kernel(const PhaseFunction& phi, int n);

// matvec-only composition K F K built from a fast operator for K
KernelHandle composition_kernel(const LinearOperator& k_fast, int n);

// entry(x,xi) = sum_{t<r} a_t(x) b_t(xi) with smooth separable factors, so
// every submatrix has exact rank <= r; t=0 is the constant pair (all-ones)
KernelHandle synthetic_lowrank_kernel(int n, int r, std::uint64_t seed);

}  // namespace bf2d

#endif
