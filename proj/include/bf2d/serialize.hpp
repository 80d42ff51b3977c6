// Binary file formats (little-endian throughout).
//
// Butterfly ("BF2D"): magic, version u16, L u16, h u16, r u16, nrows u64,
//   ncols u64, factor_count u16; per factor: block_count u64, then per block
//   row_offset u64, col_offset u64, rows u32, cols u32, data as complex
//   double pairs in row-major order; then row_perm u64[nrows] and
//   col_perm u64[ncols]. Round-trips are bit-exact.
// Polar ("PBF2"): n u64, depth u16, xi->p map u64[N], embedded BF2D payload.
// Multiscale ("MBF2"): n u64, halfwidth u16, nrows u64, ncols u64,
//   piece_count u16; per piece t u16, depth u16, restriction u64 count +
//   values, embedded BF2D payload; then center index set and dense block.
#ifndef BF2D_SERIALIZE_HPP
#define BF2D_SERIALIZE_HPP

#include <iosfwd>
#include <memory>
#include <string>

#include "bf2d/multiscale.hpp"
#include "bf2d/polar.hpp"

namespace bf2d {

void save_butterfly(std::ostream& out, const ButterflyFactorization& bf);
ButterflyFactorization load_butterfly(std::istream& in);

void save_polar(std::ostream& out, const PolarFactorization& pf);
PolarFactorization load_polar(std::istream& in);

void save_multiscale(std::ostream& out, const MultiscaleFactorization& mf);
MultiscaleFactorization load_multiscale(std::istream& in);

void save_butterfly_file(const std::string& path, const ButterflyFactorization& bf);
void save_polar_file(const std::string& path, const PolarFactorization& pf);
void save_multiscale_file(const std::string& path, const MultiscaleFactorization& mf);

// owns whichever factorization kind a file holds; dispatches apply/adjoint
struct LoadedFactorization {
  std::unique_ptr<ButterflyFactorization> bf;
  std::unique_ptr<PolarFactorization> pf;
  std::unique_ptr<MultiscaleFactorization> mf;

  std::uint64_t rows() const;
  std::uint64_t cols() const;
  std::size_t total_nnz() const;
  VectorXcd apply(const VectorXcd& g) const;
  VectorXcd adjoint_apply(const VectorXcd& u) const;
  MatrixXcd apply_mat(const MatrixXcd& g) const;
  MatrixXcd adjoint_apply_mat(const MatrixXcd& u) const;
  LinearOperator as_operator() const;
};

// dispatches on the file's magic; throws std::runtime_error on bad files
LoadedFactorization load_factorization_file(const std::string& path);

}  // namespace bf2d

#endif
