// Dense-block sparse matrix: the storage format of every butterfly factor.
#ifndef BF2D_BLOCK_SPARSE_HPP
#define BF2D_BLOCK_SPARSE_HPP

#include <cstdint>
#include <vector>

#include "bf2d/common.hpp"

namespace bf2d {

struct Block {
  std::uint64_t row_off = 0;
  std::uint64_t col_off = 0;
  MatrixXcd data;
};

struct BlockSparseFactor {
  std::uint64_t nrows = 0;
  std::uint64_t ncols = 0;
  std::vector<Block> blocks;

  // stored scalar entries (sum of block areas)
  std::size_t nnz() const;

  // y += F x; blocks processed in stored order. work, when given, accumulates
  // rows*cols per block actually multiplied.
  void apply(const VectorXcd& x, VectorXcd& y, std::size_t* work = nullptr) const;
  void apply_adjoint(const VectorXcd& x, VectorXcd& y, std::size_t* work = nullptr) const;

  VectorXcd apply(const VectorXcd& x, std::size_t* work = nullptr) const;
  VectorXcd apply_adjoint(const VectorXcd& x, std::size_t* work = nullptr) const;

  // block-matrix forms; one gemm per block
  MatrixXcd apply_mat(const MatrixXcd& x) const;
  MatrixXcd apply_adjoint_mat(const MatrixXcd& x) const;

  // materialize the conjugate transpose as its own factor
  BlockSparseFactor adjoint() const;

  MatrixXcd dense() const;  // small-problem diagnostics and tests
};

}  // namespace bf2d

#endif
