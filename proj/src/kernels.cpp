#include "bf2d/kernels.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace bf2d {

namespace {

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

void require_pow2(int n, const char* who) {
  if (!is_pow2(n)) throw std::invalid_argument(std::string(who) + ": n must be a power of two");
}

// iterative radix-2, unnormalized; sign = -1 forward, +1 inverse
void fft_1d(cplx* a, int n, int stride, int sign, std::vector<cplx>& scratch) {
  if (n == 1) return;
  scratch.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) scratch[static_cast<std::size_t>(i)] = a[i * stride];
  for (int i = 1, j = 0; i < n; ++i) {
    int bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(scratch[static_cast<std::size_t>(i)], scratch[static_cast<std::size_t>(j)]);
  }
  for (int len = 2; len <= n; len <<= 1) {
    const double ang = sign * 2.0 * M_PI / len;
    const cplx wlen(std::cos(ang), std::sin(ang));
    for (int i = 0; i < n; i += len) {
      cplx w(1.0, 0.0);
      for (int k = 0; k < len / 2; ++k) {
        const cplx even = scratch[static_cast<std::size_t>(i + k)];
        const cplx odd = scratch[static_cast<std::size_t>(i + k + len / 2)] * w;
        scratch[static_cast<std::size_t>(i + k)] = even + odd;
        scratch[static_cast<std::size_t>(i + k + len / 2)] = even - odd;
        w *= wlen;
      }
    }
  }
  for (int i = 0; i < n; ++i) a[i * stride] = scratch[static_cast<std::size_t>(i)];
}

// unnormalized 2D transform of a row-major n x n grid
void fft_2d(VectorXcd& a, int n, int sign) {
  std::vector<cplx> scratch;
  for (int r = 0; r < n; ++r) fft_1d(a.data() + r * n, n, 1, sign, scratch);
  for (int c = 0; c < n; ++c) fft_1d(a.data() + c, n, n, sign, scratch);
}

// multiply grid entry (i,j) by (-1)^(i+j); shifts the frequency origin to -n/2
void checkerboard(VectorXcd& a, int n) {
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if ((i + j) & 1) a(i * n + j) = -a(i * n + j);
}

MatrixXcd per_column(const MatrixXcd& in, int n, VectorXcd (*op)(const VectorXcd&, int)) {
  MatrixXcd out(in.rows(), in.cols());
  parallel_for(static_cast<std::size_t>(in.cols()), [&](std::size_t b, std::size_t e) {
    for (std::size_t j = b; j < e; ++j)
      out.col(static_cast<Eigen::Index>(j)) = op(in.col(static_cast<Eigen::Index>(j)), n);
  });
  return out;
}

}  // namespace

VectorXcd dft_apply(const VectorXcd& g, int n) {
  require_pow2(n, "dft_apply");
  VectorXcd a = g;
  fft_2d(a, n, -1);
  checkerboard(a, n);
  return a;
}

VectorXcd dft_adjoint(const VectorXcd& u, int n) {
  require_pow2(n, "dft_adjoint");
  VectorXcd a = u;
  checkerboard(a, n);
  fft_2d(a, n, +1);
  return a;
}

VectorXcd dft_transpose(const VectorXcd& w, int n) {
  require_pow2(n, "dft_transpose");
  VectorXcd a = w;
  checkerboard(a, n);
  fft_2d(a, n, -1);
  return a;
}

VectorXcd dft_transpose_adjoint(const VectorXcd& v, int n) {
  require_pow2(n, "dft_transpose_adjoint");
  VectorXcd a = v;
  fft_2d(a, n, +1);
  checkerboard(a, n);
  return a;
}

KernelHandle dft_kernel(int n) {
  require_pow2(n, "dft_kernel");
  KernelHandle k;
  const std::size_t nn = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
  k.rows = k.cols = nn;
  k.entry = [](const Point2& x, const Point2& xi) {
    return std::exp(cplx(0.0, -2.0 * M_PI * dot(x, xi)));
  };
  k.matvec = [n](const MatrixXcd& g) { return per_column(g, n, &dft_apply); };
  k.adjoint_matvec = [n](const MatrixXcd& u) { return per_column(u, n, &dft_adjoint); };
  return k;
}

double radon_phase(const Point2& x, const Point2& xi) {
  const double c1 = (2.0 + std::sin(2.0 * M_PI * x.x1) * std::sin(2.0 * M_PI * x.x2)) / 16.0;
  const double c2 = (2.0 + std::cos(2.0 * M_PI * x.x1) * std::cos(2.0 * M_PI * x.x2)) / 16.0;
  return dot(x, xi) + std::sqrt(c1 * c1 * xi.x1 * xi.x1 + c2 * c2 * xi.x2 * xi.x2);
}

PhaseFunction radon_phase_fn() {
  return {[](const Point2& x, const Point2& xi) { return radon_phase(x, xi); }};
}

PhaseFunction dot_phase() {
  return {[](const Point2& x, const Point2& xi) { return dot(x, xi); }};
}

KernelHandle fio_kernel(const PhaseFunction& phi, int n) {
  require_pow2(n, "fio_kernel");
  KernelHandle k;
  const std::size_t nn = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
  k.rows = k.cols = nn;
  auto f = phi.eval;
  k.entry = [f](const Point2& x, const Point2& xi) {
    return std::exp(cplx(0.0, 2.0 * M_PI * f(x, xi)));
  };
  return k;
}

std::function<double(const Point2&, const Point2&)> psi_phase(const PhaseFunction& phi, int n) {
  (void)n;  // the 1/n scale cancels against the unit-circle evaluation
  auto f = phi.eval;
  return [f](const Point2& x, const Point2& p) {
    const double ang = 2.0 * M_PI * p.x2;
    return M_SQRT1_2 * p.x1 * f(x, {std::cos(ang), std::sin(ang)});
  };
}

KernelHandle polar_fio_kernel(const PhaseFunction& phi, int n) {
  require_pow2(n, "polar_fio_kernel");
  KernelHandle k;
  const std::size_t nn = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
  k.rows = k.cols = nn;
  auto psi = psi_phase(phi, n);
  k.entry = [psi, n](const Point2& x, const Point2& p) {
    return std::exp(cplx(0.0, 2.0 * M_PI * n * psi(x, p)));
  };
  return k;
}

KernelHandle composition_kernel(const LinearOperator& k_fast, int n) {
  require_pow2(n, "composition_kernel");
  if (!k_fast.apply || !k_fast.adjoint)
    throw std::invalid_argument("composition_kernel: inner operator needs apply and adjoint");
  KernelHandle k;
  const std::size_t nn = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
  k.rows = k.cols = nn;
  auto inner = k_fast;
  k.matvec = [inner, n](const MatrixXcd& g) {
    MatrixXcd w = inner.apply(g);
    MatrixXcd v(w.rows(), w.cols());
    parallel_for(static_cast<std::size_t>(w.cols()), [&](std::size_t b, std::size_t e) {
      for (std::size_t j = b; j < e; ++j)
        v.col(static_cast<Eigen::Index>(j)) = dft_transpose(w.col(static_cast<Eigen::Index>(j)), n);
    });
    return inner.apply(v);
  };
  k.adjoint_matvec = [inner, n](const MatrixXcd& u) {
    MatrixXcd a = inner.adjoint(u);
    MatrixXcd b(a.rows(), a.cols());
    parallel_for(static_cast<std::size_t>(a.cols()), [&](std::size_t s, std::size_t e) {
      for (std::size_t j = s; j < e; ++j)
        b.col(static_cast<Eigen::Index>(j)) =
            dft_transpose_adjoint(a.col(static_cast<Eigen::Index>(j)), n);
    });
    return inner.adjoint(b);
  };
  return k;
}

KernelHandle synthetic_lowrank_kernel(int n, int r, std::uint64_t seed) {
  require_pow2(n, "synthetic_lowrank_kernel");
  if (r < 1 || r > 4) throw std::invalid_argument("synthetic_lowrank_kernel: r must be in 1..4");
  // separable terms; term 0 is the constant pair, so r=1 is the all-ones matrix
  Rng rng(Rng::mix(seed, 0x10c4ULL));
  std::vector<double> ca(4, 0.0), cb(4, 0.0), th(4, 0.0);
  for (std::size_t t = 1; t < 4; ++t) {
    ca[t] = 0.5 + rng.next_unit();
    cb[t] = 0.5 + rng.next_unit();
    th[t] = 2.0 * M_PI * rng.next_unit();
  }
  auto a_fn = [ca](int t, const Point2& x) -> double {
    switch (t) {
      case 0: return 1.0;
      case 1: return ca[1] * (x.x1 + 0.3 * x.x2 * x.x2);
      case 2: return ca[2] * (x.x2 + 0.2 * x.x1 * x.x2);
      default: return ca[3] * (x.x1 * x.x1 - x.x2 * x.x2);
    }
  };
  auto b_fn = [cb, th, n](int t, const Point2& xi) -> cplx {
    const double u = xi.x1 / n, v = xi.x2 / n;
    double val;
    switch (t) {
      case 0: return cplx(1.0, 0.0);
      case 1: val = u + 0.4 * v; break;
      case 2: val = v * v - 0.25 * u; break;
      default: val = u * v + 0.1; break;
    }
    return cb[static_cast<std::size_t>(t)] * val *
           std::exp(cplx(0.0, th[static_cast<std::size_t>(t)]));
  };
  KernelHandle k;
  const std::size_t nn = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
  k.rows = k.cols = nn;
  k.entry = [a_fn, b_fn, r](const Point2& x, const Point2& xi) {
    cplx sum(0.0, 0.0);
    for (int t = 0; t < r; ++t) sum += a_fn(t, x) * b_fn(t, xi);
    return sum;
  };
  return k;
}

}  // namespace bf2d
