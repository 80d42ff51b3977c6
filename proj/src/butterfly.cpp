#include "bf2d/butterfly.hpp"

#include <atomic>
#include <stdexcept>
#include <utility>

namespace bf2d {

namespace {

std::uint64_t pow4(int l) { return std::uint64_t(1) << (2 * l); }

ColumnLayout compute_layout(const std::vector<MatrixXcd>& blocks) {
  ColumnLayout lay;
  lay.offset.resize(blocks.size());
  lay.width.resize(blocks.size());
  std::uint64_t off = 0;
  for (std::size_t f = 0; f < blocks.size(); ++f) {
    lay.offset[f] = off;
    lay.width[f] = static_cast<int>(blocks[f].cols());
    off += static_cast<std::uint64_t>(blocks[f].cols());
  }
  lay.total = off;
  return lay;
}

// middle factor diagonal 1/sigma with the relative conditioning cutoff
VectorXd inverted_sigma(const VectorXd& sigma) {
  const double smax = sigma.size() ? sigma(0) : 0.0;
  const double tol = 1e-12 * smax;
  VectorXd s = VectorXd::Zero(sigma.size());
  for (Eigen::Index t = 0; t < sigma.size(); ++t)
    if (sigma(t) > tol && sigma(t) > 0.0) s(t) = 1.0 / sigma(t);
  return s;
}

std::vector<std::pair<std::uint64_t, std::uint64_t>> nonempty_pairs(const QuadTree& row_tree,
                                                                    int row_level,
                                                                    const QuadTree& co_tree,
                                                                    int co_level) {
  std::vector<std::pair<std::uint64_t, std::uint64_t>> pairs;
  for (std::uint64_t i = 0; i < pow4(row_level); ++i) {
    if (row_tree.empty_node(row_level, i)) continue;
    for (std::uint64_t j = 0; j < pow4(co_level); ++j) {
      if (co_tree.empty_node(co_level, j)) continue;
      pairs.emplace_back(i, j);
    }
  }
  return pairs;
}

BlockSparseFactor make_leaf_factor(const FactorTable& table, const QuadTree& row_tree) {
  const int L = row_tree.depth();
  BlockSparseFactor f;
  f.nrows = row_tree.num_points();
  f.ncols = table.layout.total;
  for (std::uint64_t i = 0; i < pow4(L); ++i) {
    if (table.layout.width[i] == 0) continue;
    f.blocks.push_back({row_tree.span(L, i).first, table.layout.offset[i], table.blocks[i]});
  }
  return f;
}

BuildMode resolve_mode(const ButterflyOptions& opts, const KernelHandle& k) {
  if (opts.mode != BuildMode::Auto) return opts.mode;
  if (k.has_entry()) return BuildMode::EntrySampling;
  if (k.has_matvec()) return BuildMode::MatvecProbes;
  throw std::invalid_argument("build_butterfly: kernel provides neither entry nor matvec oracle");
}

}  // namespace

std::size_t flat_index(std::uint64_t i, std::uint64_t j, int co_level) {
  return static_cast<std::size_t>(i * pow4(co_level) + j);
}

MiddleLevel middle_level_factorize(const KernelHandle& kernel, const QuadTree& tx,
                                   const QuadTree& tom, const ButterflyOptions& opts) {
  if (tx.depth() != tom.depth())
    throw std::invalid_argument("middle_level_factorize: trees must share the same depth");
  const int L = tx.depth();
  const int h = L / 2;
  const int hco = L - h;
  const int r = opts.rand.rank;
  if (r < 1) throw std::invalid_argument("middle_level_factorize: rank must be >= 1");

  MiddleLevel mid;
  mid.u.level = h;
  mid.v.level = hco;
  mid.u.blocks.assign(pow4(L), MatrixXcd());
  mid.v.blocks.assign(pow4(L), MatrixXcd());
  std::vector<VectorXd> s_table(pow4(L));

  const auto pairs = nonempty_pairs(tx, h, tom, hco);
  const BuildMode mode = resolve_mode(opts, kernel);
  std::atomic<bool> unconv{false};

  auto store = [&](std::uint64_t i, std::uint64_t j, const LowRankApprox& lr) {
    const auto fu = flat_index(i, j, hco);
    const auto fv = flat_index(j, i, h);
    mid.u.blocks[fu] = lr.U * lr.sigma.asDiagonal();
    mid.v.blocks[fv] = lr.V * lr.sigma.asDiagonal();
    s_table[fu] = inverted_sigma(lr.sigma);
    if (!lr.converged) unconv = true;
  };

  if (mode == BuildMode::EntrySampling) {
    if (!kernel.has_entry())
      throw std::invalid_argument("middle_level_factorize: entry oracle required for sampling");
    const auto& xp = tx.points_tree_order();
    const auto& op = tom.points_tree_order();
    parallel_for(pairs.size(), [&](std::size_t pb, std::size_t pe) {
      for (std::size_t idx = pb; idx < pe; ++idx) {
        const auto [i, j] = pairs[idx];
        const auto sa = tx.span(h, i);
        const auto sb = tom.span(hco, j);
        RandConfig cfg = opts.rand;
        cfg.rng_seed = Rng::mix(opts.rand.rng_seed, 0xB10C000000000000ULL + flat_index(i, j, hco));
        auto entry = [&](Eigen::Index a, Eigen::Index b) {
          return kernel.entry(xp[sa.first + static_cast<std::uint64_t>(a)],
                              op[sb.first + static_cast<std::uint64_t>(b)]);
        };
        store(i, j, rsvd_sampling(entry, static_cast<Eigen::Index>(sa.second - sa.first),
                                  static_cast<Eigen::Index>(sb.second - sb.first), cfg));
      }
    });
  } else {
    if (!kernel.has_matvec())
      throw std::invalid_argument("middle_level_factorize: matvec oracle required for probing");
    if (kernel.rows != tx.num_points())
      throw std::invalid_argument("middle_level_factorize: operator rows mismatch X");
    const std::size_t global_n = opts.global_ncols ? opts.global_ncols : tom.num_points();
    if (kernel.cols != global_n)
      throw std::invalid_argument("middle_level_factorize: operator cols mismatch");
    const Eigen::Index q = r + opts.rand.oversample;
    const auto& t2e_col = tom.tree_to_external();
    const auto& t2e_row = tx.tree_to_external();
    auto gcol = [&](std::uint64_t pos) {
      const std::size_t e = t2e_col[pos];
      return opts.global_cols.empty() ? e : opts.global_cols[e];
    };

    // one zero-padded probe per frequency node feeds every (i, j) with that j
    std::vector<MatrixXcd> cprobe(pow4(hco));
    std::vector<MatrixXcd> zc(pow4(L));
    for (std::uint64_t j = 0; j < pow4(hco); ++j) {
      if (tom.empty_node(hco, j)) continue;
      const auto sb = tom.span(hco, j);
      const auto mb = static_cast<Eigen::Index>(sb.second - sb.first);
      Rng rng(Rng::mix(opts.rand.rng_seed, 0xC010000000000000ULL + j));
      cprobe[j] = gaussian_matrix(mb, q, rng);
      MatrixXcd padded = MatrixXcd::Zero(static_cast<Eigen::Index>(global_n), q);
      for (std::uint64_t p = sb.first; p < sb.second; ++p)
        padded.row(static_cast<Eigen::Index>(gcol(p))) =
            cprobe[j].row(static_cast<Eigen::Index>(p - sb.first));
      MatrixXcd y = kernel.matvec(padded);
      for (std::uint64_t i = 0; i < pow4(h); ++i) {
        if (tx.empty_node(h, i)) continue;
        const auto sa = tx.span(h, i);
        MatrixXcd slab(static_cast<Eigen::Index>(sa.second - sa.first), q);
        for (std::uint64_t p = sa.first; p < sa.second; ++p)
          slab.row(static_cast<Eigen::Index>(p - sa.first)) =
              y.row(static_cast<Eigen::Index>(t2e_row[p]));
        zc[flat_index(i, j, hco)] = std::move(slab);
      }
    }

    // adjoint probes per space node, then finish each block factorization
    for (std::uint64_t i = 0; i < pow4(h); ++i) {
      if (tx.empty_node(h, i)) continue;
      const auto sa = tx.span(h, i);
      const auto ma = static_cast<Eigen::Index>(sa.second - sa.first);
      Rng rng(Rng::mix(opts.rand.rng_seed, 0xE0F0000000000000ULL + i));
      MatrixXcd rprobe = gaussian_matrix(ma, q, rng);
      MatrixXcd padded = MatrixXcd::Zero(static_cast<Eigen::Index>(kernel.rows), q);
      for (std::uint64_t p = sa.first; p < sa.second; ++p)
        padded.row(static_cast<Eigen::Index>(t2e_row[p])) =
            rprobe.row(static_cast<Eigen::Index>(p - sa.first));
      MatrixXcd w = kernel.adjoint_matvec(padded);

      std::vector<std::uint64_t> js;
      for (std::uint64_t j = 0; j < pow4(hco); ++j)
        if (!tom.empty_node(hco, j)) js.push_back(j);
      parallel_for(js.size(), [&](std::size_t jb, std::size_t je) {
        for (std::size_t jj = jb; jj < je; ++jj) {
          const std::uint64_t j = js[jj];
          const auto sb = tom.span(hco, j);
          MatrixXcd zsr(static_cast<Eigen::Index>(sb.second - sb.first), q);
          for (std::uint64_t p = sb.first; p < sb.second; ++p)
            zsr.row(static_cast<Eigen::Index>(p - sb.first)) =
                w.row(static_cast<Eigen::Index>(gcol(p)));
          const auto fu = flat_index(i, j, hco);
          store(i, j, rsvd_from_probes(zc[fu], zsr, cprobe[j], rprobe, r));
          zc[fu] = MatrixXcd();
        }
      });
    }
  }

  mid.u.layout = compute_layout(mid.u.blocks);
  mid.v.layout = compute_layout(mid.v.blocks);
  mid.m.nrows = mid.u.layout.total;
  mid.m.ncols = mid.v.layout.total;
  for (const auto& [i, j] : pairs) {
    const auto fu = flat_index(i, j, hco);
    const auto fv = flat_index(j, i, h);
    const VectorXd& s = s_table[fu];
    MatrixXcd d = MatrixXcd::Zero(s.size(), s.size());
    d.diagonal() = s.cast<cplx>();
    mid.m.blocks.push_back({mid.u.layout.offset[fu], mid.v.layout.offset[fv], std::move(d)});
  }
  mid.unconverged = unconv.load();
  return mid;
}

BlockSparseFactor assemble_outer(const FactorTable& table, const QuadTree& row_tree) {
  const int L = row_tree.depth();
  const int co = L - table.level;
  BlockSparseFactor f;
  f.nrows = row_tree.num_points();
  f.ncols = table.layout.total;
  for (std::uint64_t i = 0; i < pow4(table.level); ++i) {
    if (row_tree.empty_node(table.level, i)) continue;
    const auto si = row_tree.span(table.level, i);
    int wtot = 0;
    std::uint64_t first = 0;
    bool seen = false;
    for (std::uint64_t j = 0; j < pow4(co); ++j) {
      const auto fl = flat_index(i, j, co);
      if (table.layout.width[fl] == 0) continue;
      if (!seen) {
        first = table.layout.offset[fl];
        seen = true;
      }
      wtot += table.layout.width[fl];
    }
    if (!seen) continue;
    MatrixXcd blockmat(static_cast<Eigen::Index>(si.second - si.first), wtot);
    int c0 = 0;
    for (std::uint64_t j = 0; j < pow4(co); ++j) {
      const auto fl = flat_index(i, j, co);
      const int w = table.layout.width[fl];
      if (w == 0) continue;
      blockmat.middleCols(c0, w) = table.blocks[fl];
      c0 += w;
    }
    f.blocks.push_back({si.first, first, std::move(blockmat)});
  }
  return f;
}

BlockSparseFactor recursive_factorize_level(FactorTable& cur, const QuadTree& row_tree,
                                            const QuadTree& co_tree, int r, FactorTable& next) {
  const int L = row_tree.depth();
  const int l = cur.level;
  if (l >= L) throw std::logic_error("recursive_factorize_level: already at the leaf level");
  const int co_cur = L - l;
  const int co_next = co_cur - 1;

  next.level = l + 1;
  next.blocks.assign(pow4(L), MatrixXcd());
  std::vector<MatrixXcd> gdata(pow4(L));
  std::vector<std::uint64_t> gsrc(pow4(L), 0);

  const auto pairs = nonempty_pairs(row_tree, l + 1, co_tree, co_next);
  parallel_for(pairs.size(), [&](std::size_t pb, std::size_t pe) {
    for (std::size_t idx = pb; idx < pe; ++idx) {
      const auto [i2, j] = pairs[idx];
      const std::uint64_t i = i2 / 4;
      const auto si = row_tree.span(l, i);
      const auto si2 = row_tree.span(l + 1, i2);
      const auto rows_off = static_cast<Eigen::Index>(si2.first - si.first);
      const auto nrows2 = static_cast<Eigen::Index>(si2.second - si2.first);

      // merge the split row-parts of the four sibling frequency blocks
      int wtot = 0;
      std::uint64_t first_src = 0;
      bool seen = false;
      for (std::uint64_t s = 0; s < 4; ++s) {
        const auto fl = flat_index(i, 4 * j + s, co_cur);
        const int w = cur.layout.width[fl];
        if (w == 0) continue;
        if (!seen) {
          first_src = cur.layout.offset[fl];
          seen = true;
        }
        wtot += w;
      }
      MatrixXcd merged(nrows2, wtot);
      int c0 = 0;
      for (std::uint64_t s = 0; s < 4; ++s) {
        const auto fl = flat_index(i, 4 * j + s, co_cur);
        const int w = cur.layout.width[fl];
        if (w == 0) continue;
        merged.middleCols(c0, w) = cur.blocks[fl].middleRows(rows_off, nrows2);
        c0 += w;
      }

      auto t = truncated_svd(merged, r);  // left-scaled split: U S | V^H
      const auto f2 = flat_index(i2, j, co_next);
      next.blocks[f2] = t.U * t.sigma.asDiagonal();
      gdata[f2] = t.V.adjoint();
      gsrc[f2] = first_src;
    }
  });

  next.layout = compute_layout(next.blocks);
  BlockSparseFactor g;
  g.nrows = next.layout.total;
  g.ncols = cur.layout.total;
  for (const auto& [i2, j] : pairs) {
    const auto f2 = flat_index(i2, j, co_next);
    g.blocks.push_back({next.layout.offset[f2], gsrc[f2], std::move(gdata[f2])});
  }
  cur.blocks.clear();
  return g;
}

ButterflyFactorization build_butterfly(const KernelHandle& kernel, const QuadTree& tx,
                                       const QuadTree& tom, const ButterflyOptions& opts) {
  if (tx.depth() != tom.depth())
    throw std::invalid_argument("build_butterfly: trees must share the same depth");
  if (tx.depth() < 2) throw std::invalid_argument("build_butterfly: depth must be >= 2");

  const int L = tx.depth();
  const int h = L / 2;
  const int hco = L - h;
  const int r = opts.rand.rank;

  MiddleLevel mid = middle_level_factorize(kernel, tx, tom, opts);

  ButterflyFactorization bf;
  bf.L = L;
  bf.h = h;
  bf.rank = r;
  bf.nrows = tx.num_points();
  bf.ncols = tom.num_points();
  bf.unconverged = mid.unconverged;

  std::vector<BlockSparseFactor> glist;
  FactorTable cur = std::move(mid.u);
  for (int l = h; l < L; ++l) {
    FactorTable next;
    glist.push_back(recursive_factorize_level(cur, tx, tom, r, next));
    cur = std::move(next);
  }
  BlockSparseFactor u_leaf = make_leaf_factor(cur, tx);

  std::vector<BlockSparseFactor> hlist;
  FactorTable vcur = std::move(mid.v);
  for (int l = hco; l < L; ++l) {
    FactorTable next;
    hlist.push_back(recursive_factorize_level(vcur, tom, tx, r, next));
    vcur = std::move(next);
  }
  BlockSparseFactor v_leaf = make_leaf_factor(vcur, tom);

  bf.factors.push_back(std::move(u_leaf));
  for (auto it = glist.rbegin(); it != glist.rend(); ++it) bf.factors.push_back(std::move(*it));
  bf.factors.push_back(std::move(mid.m));
  for (auto& hfac : hlist) bf.factors.push_back(hfac.adjoint());
  bf.factors.push_back(v_leaf.adjoint());

  const auto& t2e_row = tx.tree_to_external();
  const auto& t2e_col = tom.tree_to_external();
  bf.row_perm.assign(t2e_row.begin(), t2e_row.end());
  bf.col_perm.assign(t2e_col.begin(), t2e_col.end());

  // structural checks: factor count and dimension chaining
  if (bf.factors.size() != static_cast<std::size_t>(L + 3))
    throw std::logic_error("build_butterfly: unexpected factor count");
  for (std::size_t f = 0; f + 1 < bf.factors.size(); ++f)
    if (bf.factors[f].ncols != bf.factors[f + 1].nrows)
      throw std::logic_error("build_butterfly: factor dimension chain broken");
  return bf;
}

std::size_t ButterflyFactorization::total_nnz() const {
  std::size_t total = 0;
  for (const auto& f : factors) total += f.nnz();
  return total;
}

VectorXcd ButterflyFactorization::apply(const VectorXcd& g, std::size_t* work) const {
  if (g.size() != static_cast<Eigen::Index>(ncols))
    throw std::invalid_argument("ButterflyFactorization::apply: length mismatch");
  VectorXcd cur(static_cast<Eigen::Index>(ncols));
  for (std::size_t p = 0; p < col_perm.size(); ++p)
    cur(static_cast<Eigen::Index>(p)) = g(static_cast<Eigen::Index>(col_perm[p]));
  for (auto it = factors.rbegin(); it != factors.rend(); ++it) cur = it->apply(cur, work);
  VectorXcd u(static_cast<Eigen::Index>(nrows));
  for (std::size_t p = 0; p < row_perm.size(); ++p)
    u(static_cast<Eigen::Index>(row_perm[p])) = cur(static_cast<Eigen::Index>(p));
  return u;
}

VectorXcd ButterflyFactorization::adjoint_apply(const VectorXcd& uvec, std::size_t* work) const {
  if (uvec.size() != static_cast<Eigen::Index>(nrows))
    throw std::invalid_argument("ButterflyFactorization::adjoint_apply: length mismatch");
  VectorXcd cur(static_cast<Eigen::Index>(nrows));
  for (std::size_t p = 0; p < row_perm.size(); ++p)
    cur(static_cast<Eigen::Index>(p)) = uvec(static_cast<Eigen::Index>(row_perm[p]));
  for (const auto& f : factors) cur = f.apply_adjoint(cur, work);
  VectorXcd g(static_cast<Eigen::Index>(ncols));
  for (std::size_t p = 0; p < col_perm.size(); ++p)
    g(static_cast<Eigen::Index>(col_perm[p])) = cur(static_cast<Eigen::Index>(p));
  return g;
}

MatrixXcd ButterflyFactorization::apply_mat(const MatrixXcd& g) const {
  if (g.rows() != static_cast<Eigen::Index>(ncols))
    throw std::invalid_argument("ButterflyFactorization::apply_mat: length mismatch");
  MatrixXcd out(static_cast<Eigen::Index>(nrows), g.cols());
  parallel_for(static_cast<std::size_t>(g.cols()), [&](std::size_t cb, std::size_t ce) {
    MatrixXcd cur(static_cast<Eigen::Index>(ncols), static_cast<Eigen::Index>(ce - cb));
    for (std::size_t p = 0; p < col_perm.size(); ++p)
      cur.row(static_cast<Eigen::Index>(p)) =
          g.block(static_cast<Eigen::Index>(col_perm[p]), static_cast<Eigen::Index>(cb), 1,
                  static_cast<Eigen::Index>(ce - cb));
    for (auto it = factors.rbegin(); it != factors.rend(); ++it) cur = it->apply_mat(cur);
    for (std::size_t p = 0; p < row_perm.size(); ++p)
      out.block(static_cast<Eigen::Index>(row_perm[p]), static_cast<Eigen::Index>(cb), 1,
                static_cast<Eigen::Index>(ce - cb)) = cur.row(static_cast<Eigen::Index>(p));
  });
  return out;
}

MatrixXcd ButterflyFactorization::adjoint_apply_mat(const MatrixXcd& u) const {
  if (u.rows() != static_cast<Eigen::Index>(nrows))
    throw std::invalid_argument("ButterflyFactorization::adjoint_apply_mat: length mismatch");
  MatrixXcd out(static_cast<Eigen::Index>(ncols), u.cols());
  parallel_for(static_cast<std::size_t>(u.cols()), [&](std::size_t cb, std::size_t ce) {
    MatrixXcd cur(static_cast<Eigen::Index>(nrows), static_cast<Eigen::Index>(ce - cb));
    for (std::size_t p = 0; p < row_perm.size(); ++p)
      cur.row(static_cast<Eigen::Index>(p)) =
          u.block(static_cast<Eigen::Index>(row_perm[p]), static_cast<Eigen::Index>(cb), 1,
                  static_cast<Eigen::Index>(ce - cb));
    for (const auto& f : factors) cur = f.apply_adjoint_mat(cur);
    for (std::size_t p = 0; p < col_perm.size(); ++p)
      out.block(static_cast<Eigen::Index>(col_perm[p]), static_cast<Eigen::Index>(cb), 1,
                static_cast<Eigen::Index>(ce - cb)) = cur.row(static_cast<Eigen::Index>(p));
  });
  return out;
}

LinearOperator ButterflyFactorization::as_operator() const {
  // captures this; the factorization must outlive the operator
  return {[this](const MatrixXcd& g) { return apply_mat(g); },
          [this](const MatrixXcd& u) { return adjoint_apply_mat(u); }, nrows, ncols};
}

}  // namespace bf2d
