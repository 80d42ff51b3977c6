#include "bf2d/block_sparse.hpp"

#include <stdexcept>

namespace bf2d {

std::size_t BlockSparseFactor::nnz() const {
  std::size_t total = 0;
  for (const auto& b : blocks)
    total += static_cast<std::size_t>(b.data.rows()) * static_cast<std::size_t>(b.data.cols());
  return total;
}

void BlockSparseFactor::apply(const VectorXcd& x, VectorXcd& y, std::size_t* work) const {
  if (x.size() != static_cast<Eigen::Index>(ncols) || y.size() != static_cast<Eigen::Index>(nrows))
    throw std::invalid_argument("BlockSparseFactor::apply: dimension mismatch");
  for (const auto& b : blocks) {
    y.segment(static_cast<Eigen::Index>(b.row_off), b.data.rows()).noalias() +=
        b.data * x.segment(static_cast<Eigen::Index>(b.col_off), b.data.cols());
    if (work)
      *work += static_cast<std::size_t>(b.data.rows()) * static_cast<std::size_t>(b.data.cols());
  }
}

void BlockSparseFactor::apply_adjoint(const VectorXcd& x, VectorXcd& y, std::size_t* work) const {
  if (x.size() != static_cast<Eigen::Index>(nrows) || y.size() != static_cast<Eigen::Index>(ncols))
    throw std::invalid_argument("BlockSparseFactor::apply_adjoint: dimension mismatch");
  for (const auto& b : blocks) {
    y.segment(static_cast<Eigen::Index>(b.col_off), b.data.cols()).noalias() +=
        b.data.adjoint() * x.segment(static_cast<Eigen::Index>(b.row_off), b.data.rows());
    if (work)
      *work += static_cast<std::size_t>(b.data.rows()) * static_cast<std::size_t>(b.data.cols());
  }
}

VectorXcd BlockSparseFactor::apply(const VectorXcd& x, std::size_t* work) const {
  VectorXcd y = VectorXcd::Zero(static_cast<Eigen::Index>(nrows));
  apply(x, y, work);
  return y;
}

VectorXcd BlockSparseFactor::apply_adjoint(const VectorXcd& x, std::size_t* work) const {
  VectorXcd y = VectorXcd::Zero(static_cast<Eigen::Index>(ncols));
  apply_adjoint(x, y, work);
  return y;
}

MatrixXcd BlockSparseFactor::apply_mat(const MatrixXcd& x) const {
  if (x.rows() != static_cast<Eigen::Index>(ncols))
    throw std::invalid_argument("BlockSparseFactor::apply_mat: dimension mismatch");
  MatrixXcd y = MatrixXcd::Zero(static_cast<Eigen::Index>(nrows), x.cols());
  for (const auto& b : blocks)
    y.middleRows(static_cast<Eigen::Index>(b.row_off), b.data.rows()).noalias() +=
        b.data * x.middleRows(static_cast<Eigen::Index>(b.col_off), b.data.cols());
  return y;
}

MatrixXcd BlockSparseFactor::apply_adjoint_mat(const MatrixXcd& x) const {
  if (x.rows() != static_cast<Eigen::Index>(nrows))
    throw std::invalid_argument("BlockSparseFactor::apply_adjoint_mat: dimension mismatch");
  MatrixXcd y = MatrixXcd::Zero(static_cast<Eigen::Index>(ncols), x.cols());
  for (const auto& b : blocks)
    y.middleRows(static_cast<Eigen::Index>(b.col_off), b.data.cols()).noalias() +=
        b.data.adjoint() * x.middleRows(static_cast<Eigen::Index>(b.row_off), b.data.rows());
  return y;
}

BlockSparseFactor BlockSparseFactor::adjoint() const {
  BlockSparseFactor out;
  out.nrows = ncols;
  out.ncols = nrows;
  out.blocks.reserve(blocks.size());
  for (const auto& b : blocks) out.blocks.push_back({b.col_off, b.row_off, b.data.adjoint()});
  return out;
}

MatrixXcd BlockSparseFactor::dense() const {
  MatrixXcd m = MatrixXcd::Zero(static_cast<Eigen::Index>(nrows), static_cast<Eigen::Index>(ncols));
  for (const auto& b : blocks)
    m.block(static_cast<Eigen::Index>(b.row_off), static_cast<Eigen::Index>(b.col_off),
            b.data.rows(), b.data.cols()) = b.data;
  return m;
}

}  // namespace bf2d
