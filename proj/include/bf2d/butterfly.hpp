// 2D butterfly factorization core: middle level factorization (matvec-probe
// and entry-sampling construction), recursive factorization of the left and
// right factor chains, assembly, apply, and adjoint apply.
#ifndef BF2D_BUTTERFLY_HPP
#define BF2D_BUTTERFLY_HPP

#include <cstdint>
#include <vector>

#include "bf2d/block_sparse.hpp"
#include "bf2d/geometry.hpp"
#include "bf2d/kernels.hpp"
#include "bf2d/randlr.hpp"

namespace bf2d {

enum class BuildMode { Auto, EntrySampling, MatvecProbes };

struct ButterflyOptions {
  RandConfig rand;
  BuildMode mode = BuildMode::Auto;
  // Restricted subproblems constructed through a global black-box operator:
  // maps a column point-set external id to the operator's column index, and
  // the operator's full width. Empty means the identity embedding.
  std::vector<std::size_t> global_cols;
  std::size_t global_ncols = 0;
};

// column layout of the per-block factor table at one level: block (i, j) of
// the conceptual block-diagonal factor owns `width` columns at `offset`
struct ColumnLayout {
  std::vector<std::uint64_t> offset;  // flat (i,j) index -> first column
  std::vector<int> width;             // 0 when the pair is absent
  std::uint64_t total = 0;
};

// tall per-block factors at one level of the recursion (U^l or V^l)
struct FactorTable {
  int level = 0;  // level in the row tree; co-tree level is depth - level
  std::vector<MatrixXcd> blocks;  // flat index i * 4^(depth-level) + j
  ColumnLayout layout;
};

struct MiddleLevel {
  FactorTable u;        // level h over T_X
  FactorTable v;        // level L-h over T_Omega
  BlockSparseFactor m;  // transposed-block middle factor
  bool unconverged = false;
};

struct ButterflyFactorization {
  int L = 0;
  int h = 0;
  int rank = 0;
  std::uint64_t nrows = 0;
  std::uint64_t ncols = 0;
  // ordered chain U^L, G^{L-1}..G^h, M^h, (H^*)s ascending, (V^L)^*
  std::vector<BlockSparseFactor> factors;
  // tree position -> external point index
  std::vector<std::uint64_t> row_perm;
  std::vector<std::uint64_t> col_perm;
  bool unconverged = false;

  std::size_t total_nnz() const;
  VectorXcd apply(const VectorXcd& g, std::size_t* work = nullptr) const;
  VectorXcd adjoint_apply(const VectorXcd& u, std::size_t* work = nullptr) const;
  MatrixXcd apply_mat(const MatrixXcd& g) const;
  MatrixXcd adjoint_apply_mat(const MatrixXcd& u) const;
  LinearOperator as_operator() const;
};

std::size_t flat_index(std::uint64_t i, std::uint64_t j, int co_level);

MiddleLevel middle_level_factorize(const KernelHandle& kernel, const QuadTree& tx,
                                   const QuadTree& tom, const ButterflyOptions& opts);

// U^h (or V^h) assembled as the block-diagonal sparse factor; diagnostics/tests
BlockSparseFactor assemble_outer(const FactorTable& table, const QuadTree& row_tree);

// One split/merge/truncate/assemble step: consumes `cur` at level l, fills
// `next` at level l+1 and returns the sparse transfer factor (G^l or H^l).
BlockSparseFactor recursive_factorize_level(FactorTable& cur, const QuadTree& row_tree,
                                            const QuadTree& co_tree, int r, FactorTable& next);

ButterflyFactorization build_butterfly(const KernelHandle& kernel, const QuadTree& tx,
                                       const QuadTree& tom, const ButterflyOptions& opts);

}  // namespace bf2d

#endif
