#include "bf2d/serialize.hpp"

#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace bf2d {

namespace {

constexpr std::uint16_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("load: truncated file");
  return v;
}

void write_magic(std::ostream& out, const char m[4]) { out.write(m, 4); }

void expect_magic(std::istream& in, const char m[4]) {
  char got[4];
  in.read(got, 4);
  if (!in || std::memcmp(got, m, 4) != 0) throw std::runtime_error("load: magic mismatch");
}

void expect_version(std::istream& in) {
  if (read_pod<std::uint16_t>(in) != kVersion) throw std::runtime_error("load: version mismatch");
}

void write_u64s(std::ostream& out, const std::vector<std::uint64_t>& v) {
  for (auto x : v) write_pod(out, x);
}

std::vector<std::uint64_t> read_u64s(std::istream& in, std::uint64_t count) {
  std::vector<std::uint64_t> v(count);
  for (auto& x : v) x = read_pod<std::uint64_t>(in);
  return v;
}

void write_dense(std::ostream& out, const MatrixXcd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      write_pod(out, m(i, j).real());
      write_pod(out, m(i, j).imag());
    }
}

MatrixXcd read_dense(std::istream& in, Eigen::Index rows, Eigen::Index cols) {
  MatrixXcd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) {
      const double re = read_pod<double>(in);
      const double im = read_pod<double>(in);
      m(i, j) = cplx(re, im);
    }
  return m;
}

}  // namespace

void save_butterfly(std::ostream& out, const ButterflyFactorization& bf) {
  write_magic(out, "BF2D");
  write_pod<std::uint16_t>(out, kVersion);
  write_pod<std::uint16_t>(out, static_cast<std::uint16_t>(bf.L));
  write_pod<std::uint16_t>(out, static_cast<std::uint16_t>(bf.h));
  write_pod<std::uint16_t>(out, static_cast<std::uint16_t>(bf.rank));
  write_pod<std::uint64_t>(out, bf.nrows);
  write_pod<std::uint64_t>(out, bf.ncols);
  write_pod<std::uint16_t>(out, static_cast<std::uint16_t>(bf.factors.size()));
  for (const auto& f : bf.factors) {
    write_pod<std::uint64_t>(out, f.nrows);
    write_pod<std::uint64_t>(out, f.ncols);
    write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(f.blocks.size()));
    for (const auto& b : f.blocks) {
      write_pod<std::uint64_t>(out, b.row_off);
      write_pod<std::uint64_t>(out, b.col_off);
      write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(b.data.rows()));
      write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(b.data.cols()));
      write_dense(out, b.data);
    }
  }
  write_u64s(out, bf.row_perm);
  write_u64s(out, bf.col_perm);
}

ButterflyFactorization load_butterfly(std::istream& in) {
  expect_magic(in, "BF2D");
  expect_version(in);
  ButterflyFactorization bf;
  bf.L = read_pod<std::uint16_t>(in);
  bf.h = read_pod<std::uint16_t>(in);
  bf.rank = read_pod<std::uint16_t>(in);
  bf.nrows = read_pod<std::uint64_t>(in);
  bf.ncols = read_pod<std::uint64_t>(in);
  const auto nfac = read_pod<std::uint16_t>(in);
  bf.factors.resize(nfac);
  for (auto& f : bf.factors) {
    f.nrows = read_pod<std::uint64_t>(in);
    f.ncols = read_pod<std::uint64_t>(in);
    const auto nb = read_pod<std::uint64_t>(in);
    f.blocks.resize(nb);
    for (auto& b : f.blocks) {
      b.row_off = read_pod<std::uint64_t>(in);
      b.col_off = read_pod<std::uint64_t>(in);
      const auto rows = read_pod<std::uint32_t>(in);
      const auto cols = read_pod<std::uint32_t>(in);
      b.data = read_dense(in, rows, cols);
    }
  }
  bf.row_perm = read_u64s(in, bf.nrows);
  bf.col_perm = read_u64s(in, bf.ncols);
  return bf;
}

void save_polar(std::ostream& out, const PolarFactorization& pf) {
  write_magic(out, "PBF2");
  write_pod<std::uint16_t>(out, kVersion);
  write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(pf.n));
  write_pod<std::uint16_t>(out, static_cast<std::uint16_t>(pf.depth));
  write_u64s(out, pf.xi_to_p);
  save_butterfly(out, pf.bf);
}

PolarFactorization load_polar(std::istream& in) {
  expect_magic(in, "PBF2");
  expect_version(in);
  PolarFactorization pf;
  pf.n = static_cast<int>(read_pod<std::uint64_t>(in));
  pf.depth = read_pod<std::uint16_t>(in);
  const std::uint64_t nn =
      static_cast<std::uint64_t>(pf.n) * static_cast<std::uint64_t>(pf.n);
  pf.xi_to_p = read_u64s(in, nn);
  pf.bf = load_butterfly(in);
  return pf;
}

void save_multiscale(std::ostream& out, const MultiscaleFactorization& mf) {
  write_magic(out, "MBF2");
  write_pod<std::uint16_t>(out, kVersion);
  write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(mf.n));
  write_pod<std::uint16_t>(out, static_cast<std::uint16_t>(mf.halfwidth));
  write_pod<std::uint64_t>(out, mf.nrows);
  write_pod<std::uint64_t>(out, mf.ncols);
  write_pod<std::uint16_t>(out, static_cast<std::uint16_t>(mf.pieces.size()));
  for (const auto& piece : mf.pieces) {
    write_pod<std::uint16_t>(out, static_cast<std::uint16_t>(piece.t));
    write_pod<std::uint16_t>(out, static_cast<std::uint16_t>(piece.depth));
    write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(piece.restriction.size()));
    write_u64s(out, piece.restriction);
    save_butterfly(out, piece.bf);
  }
  write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(mf.center_idx.size()));
  write_u64s(out, mf.center_idx);
  write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(mf.center.rows()));
  write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(mf.center.cols()));
  write_dense(out, mf.center);
}

MultiscaleFactorization load_multiscale(std::istream& in) {
  expect_magic(in, "MBF2");
  expect_version(in);
  MultiscaleFactorization mf;
  mf.n = static_cast<int>(read_pod<std::uint64_t>(in));
  mf.halfwidth = read_pod<std::uint16_t>(in);
  mf.nrows = read_pod<std::uint64_t>(in);
  mf.ncols = read_pod<std::uint64_t>(in);
  const auto npieces = read_pod<std::uint16_t>(in);
  mf.pieces.resize(npieces);
  for (auto& piece : mf.pieces) {
    piece.t = read_pod<std::uint16_t>(in);
    piece.depth = read_pod<std::uint16_t>(in);
    const auto nr = read_pod<std::uint64_t>(in);
    piece.restriction = read_u64s(in, nr);
    piece.bf = load_butterfly(in);
  }
  const auto nc = read_pod<std::uint64_t>(in);
  mf.center_idx = read_u64s(in, nc);
  const auto rows = read_pod<std::uint64_t>(in);
  const auto cols = read_pod<std::uint64_t>(in);
  mf.center = read_dense(in, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  return mf;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

}  // namespace

void save_butterfly_file(const std::string& path, const ButterflyFactorization& bf) {
  auto out = open_out(path);
  save_butterfly(out, bf);
}

void save_polar_file(const std::string& path, const PolarFactorization& pf) {
  auto out = open_out(path);
  save_polar(out, pf);
}

void save_multiscale_file(const std::string& path, const MultiscaleFactorization& mf) {
  auto out = open_out(path);
  save_multiscale(out, mf);
}

std::uint64_t LoadedFactorization::rows() const {
  if (bf) return bf->nrows;
  if (pf) return pf->bf.nrows;
  return mf->nrows;
}

std::uint64_t LoadedFactorization::cols() const {
  if (bf) return bf->ncols;
  if (pf) return pf->bf.ncols;
  return mf->ncols;
}

std::size_t LoadedFactorization::total_nnz() const {
  if (bf) return bf->total_nnz();
  if (pf) return pf->total_nnz();
  return mf->total_nnz();
}

VectorXcd LoadedFactorization::apply(const VectorXcd& g) const {
  if (bf) return bf->apply(g);
  if (pf) return pf->apply(g);
  return mf->apply(g);
}

VectorXcd LoadedFactorization::adjoint_apply(const VectorXcd& u) const {
  if (bf) return bf->adjoint_apply(u);
  if (pf) return pf->adjoint_apply(u);
  return mf->adjoint_apply(u);
}

MatrixXcd LoadedFactorization::apply_mat(const MatrixXcd& g) const {
  if (bf) return bf->apply_mat(g);
  if (pf) return pf->apply_mat(g);
  return mf->apply_mat(g);
}

MatrixXcd LoadedFactorization::adjoint_apply_mat(const MatrixXcd& u) const {
  if (bf) return bf->adjoint_apply_mat(u);
  if (pf) return pf->adjoint_apply_mat(u);
  return mf->adjoint_apply_mat(u);
}

LinearOperator LoadedFactorization::as_operator() const {
  return {[this](const MatrixXcd& g) { return apply_mat(g); },
          [this](const MatrixXcd& u) { return adjoint_apply_mat(u); }, rows(), cols()};
}

LoadedFactorization load_factorization_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in) throw std::runtime_error("load: truncated file");
  in.seekg(0);
  LoadedFactorization lf;
  if (std::memcmp(magic, "BF2D", 4) == 0)
    lf.bf = std::make_unique<ButterflyFactorization>(load_butterfly(in));
  else if (std::memcmp(magic, "PBF2", 4) == 0)
    lf.pf = std::make_unique<PolarFactorization>(load_polar(in));
  else if (std::memcmp(magic, "MBF2", 4) == 0)
    lf.mf = std::make_unique<MultiscaleFactorization>(load_multiscale(in));
  else
    throw std::runtime_error("load: unknown file magic");
  return lf;
}

}  // namespace bf2d
