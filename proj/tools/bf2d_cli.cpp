// Command-line driver: factor / apply / bench / verify.
#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "bf2d/bench.hpp"
#include "bf2d/serialize.hpp"

using namespace bf2d;

namespace {

VectorXcd read_vector_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw std::runtime_error("cannot open: " + path);
  const auto bytes = static_cast<std::size_t>(in.tellg());
  if (bytes % 16 != 0) throw std::runtime_error("vector file must hold complex double pairs");
  in.seekg(0);
  VectorXcd v(static_cast<Eigen::Index>(bytes / 16));
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(bytes));
  if (!in) throw std::runtime_error("vector file read failed");
  return v;
}

void write_vector_file(const std::string& path, const VectorXcd& v, const std::string& format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  if (format == "csv") {
    out << "re,im\n";
    for (Eigen::Index i = 0; i < v.size(); ++i)
      out << v(i).real() << ',' << v(i).imag() << '\n';
  } else {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(static_cast<std::size_t>(v.size()) * 16));
  }
}

struct CommonArgs {
  std::string kernel = "dft";
  std::string method = "bf";
  int n = 64;
  int rank = 8;
  int oversample = 8;
  std::uint64_t seed = 0;
  int center_halfwidth = 8;
  int tree_depth = 0;
  int synthetic_rank = 2;
  std::string inner_factor;
  int threads = 0;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--kernel", a.kernel, "dft|fio-radon|composition|synthetic")
      ->check(CLI::IsMember({"dft", "fio-radon", "composition", "synthetic"}));
  cmd->add_option("--method", a.method, "bf|pbf-s|pbf-m|mbf-s|mbf-m")
      ->check(CLI::IsMember({"bf", "pbf-s", "pbf-m", "mbf-s", "mbf-m"}));
  cmd->add_option("--n", a.n, "grid points per dimension (power of two)");
  cmd->add_option("--rank", a.rank, "truncation rank r");
  cmd->add_option("--oversample", a.oversample, "oversampling k (default 8)");
  cmd->add_option("--seed", a.seed, "rng seed (default 0)");
  cmd->add_option("--center-halfwidth", a.center_halfwidth, "mbf center halfwidth (default 8)");
  cmd->add_option("--tree-depth", a.tree_depth, "quadtree depth; 0 = log2(n)+1");
  cmd->add_option("--synthetic-rank", a.synthetic_rank, "rank of the synthetic kernel (<= 4)");
  cmd->add_option("--inner-factor", a.inner_factor, "inner factorization file (composition only)");
  cmd->add_option("--threads", a.threads, "worker threads, 0 = auto");
}

BenchConfig to_config(const CommonArgs& a) {
  BenchConfig cfg;
  cfg.kernel = a.kernel;
  cfg.method = a.method;
  cfg.ns = {a.n};
  cfg.ranks = {a.rank};
  cfg.oversample = a.oversample;
  cfg.seed = a.seed;
  cfg.center_halfwidth = a.center_halfwidth;
  cfg.tree_depth = a.tree_depth;
  cfg.synthetic_rank = a.synthetic_rank;
  cfg.inner_factor_path = a.inner_factor;
  return cfg;
}

int run_factor(const CommonArgs& a, const std::string& out_path) {
  set_num_threads(a.threads);
  RandConfig rc;
  rc.rank = a.rank;
  rc.oversample = a.oversample;
  rc.rng_seed = a.seed;
  int depth = a.tree_depth;
  if (depth <= 0) {
    depth = 1;
    int l = 0;
    while ((1 << l) < a.n) ++l;
    depth = l + 1;
  }

  std::unique_ptr<LoadedFactorization> inner;
  KernelHandle kernel;
  if (a.kernel == "dft") {
    kernel = dft_kernel(a.n);
  } else if (a.kernel == "fio-radon") {
    kernel = fio_kernel(radon_phase_fn(), a.n);
  } else if (a.kernel == "synthetic") {
    kernel = synthetic_lowrank_kernel(a.n, a.synthetic_rank, a.seed);
  } else {
    if (a.inner_factor.empty())
      throw std::invalid_argument("composition kernel needs --inner-factor");
    inner = std::make_unique<LoadedFactorization>(load_factorization_file(a.inner_factor));
    kernel = composition_kernel(inner->as_operator(), a.n);
  }

  if (a.method == "bf") {
    auto [x, om] = build_uniform_grids(a.n);
    QuadTree tx(x, {0.0, 0.0, 1.0}, depth);
    QuadTree tom(om, {-double(a.n) / 2, -double(a.n) / 2, double(a.n)}, depth);
    ButterflyOptions opts;
    opts.rand = rc;
    auto bf = build_butterfly(kernel, tx, tom, opts);
    save_butterfly_file(out_path, bf);
    std::cout << "factor bf n=" << a.n << " r=" << a.rank << " nnz=" << bf.total_nnz() << " -> "
              << out_path << "\n";
  } else if (a.method == "pbf-s" || a.method == "pbf-m") {
    PolarFactorization pf =
        a.method == "pbf-s"
            ? build_pbf(a.kernel == "dft" ? dot_phase() : radon_phase_fn(), a.n, rc, depth)
            : build_pbf_matvec(kernel.as_operator(), a.n, rc, depth);
    save_polar_file(out_path, pf);
    std::cout << "factor " << a.method << " n=" << a.n << " r=" << a.rank
              << " nnz=" << pf.total_nnz() << " -> " << out_path << "\n";
  } else {
    auto mf = build_mbf(kernel, a.n, rc, a.center_halfwidth,
                        a.method == "mbf-s" ? BuildMode::EntrySampling : BuildMode::MatvecProbes);
    save_multiscale_file(out_path, mf);
    std::cout << "factor " << a.method << " n=" << a.n << " r=" << a.rank
              << " nnz=" << mf.total_nnz() << " -> " << out_path << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"butterfly factorization of 2D Fourier-type and FIO kernel matrices"};
  app.require_subcommand(1);

  CommonArgs fa, ba, va, ve;
  std::string factor_out, factor_file, apply_in, apply_out = "u.bin", bench_out, fmt = "csv";
  double max_err = -1.0;
  bool adjoint = false;

  auto* cmd_factor = app.add_subcommand("factor", "build a factorization and save it");
  add_common(cmd_factor, fa);
  cmd_factor->add_option("--out", factor_out, "output file")->required();

  auto* cmd_apply = app.add_subcommand("apply", "apply a saved factorization to a vector");
  cmd_apply->add_option("--factor", factor_file, "factorization file")->required();
  cmd_apply->add_option("--in", apply_in, "input vector file (raw complex doubles)");
  cmd_apply->add_option("--out", apply_out, "output vector file");
  cmd_apply->add_option("--format", fmt, "output format: bin|csv");
  cmd_apply->add_option("--seed", va.seed, "seed for a random input when --in is absent");
  cmd_apply->add_flag("--adjoint", adjoint, "apply the adjoint instead");
  cmd_apply->add_option("--threads", va.threads, "worker threads, 0 = auto");

  auto* cmd_bench = app.add_subcommand("bench", "run benchmark sweeps and emit records");
  std::vector<int> bench_ns{64}, bench_rs{8};
  add_common(cmd_bench, ba);
  cmd_bench->add_option("--n-list", bench_ns, "grid sizes")->delimiter(',');
  cmd_bench->add_option("--rank-list", bench_rs, "ranks")->delimiter(',');
  cmd_bench->add_option("--out", bench_out, "output file (default stdout)");
  cmd_bench->add_option("--format", fmt, "csv|json")->check(CLI::IsMember({"csv", "json"}));
  cmd_bench->add_option("--max-err", max_err, "fail (exit 3) if any record err exceeds this");

  auto* cmd_verify = app.add_subcommand("verify", "build one configuration and check its error");
  add_common(cmd_verify, ve);
  cmd_verify->add_option("--max-err", max_err, "fail (exit 3) above this error");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (cmd_factor->parsed()) return run_factor(fa, factor_out);

    if (cmd_apply->parsed()) {
      set_num_threads(va.threads);
      auto lf = load_factorization_file(factor_file);
      VectorXcd g;
      if (!apply_in.empty()) {
        g = read_vector_file(apply_in);
      } else {
        Rng rng(Rng::mix(va.seed, 0x6e9fULL));
        g.resize(static_cast<Eigen::Index>(adjoint ? lf.rows() : lf.cols()));
        for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = rng.next_cgauss();
      }
      VectorXcd u = adjoint ? lf.adjoint_apply(g) : lf.apply(g);
      write_vector_file(apply_out, u, fmt);
      std::cout << "apply " << (adjoint ? "adjoint " : "") << factor_file << " -> " << apply_out
                << " (" << u.size() << " values)\n";
      return 0;
    }

    if (cmd_bench->parsed()) {
      set_num_threads(ba.threads);
      BenchConfig cfg = to_config(ba);
      cfg.ns = bench_ns;
      cfg.ranks = bench_rs;
      auto records = run_bench(cfg, &std::cerr);
      if (bench_out.empty()) {
        if (fmt == "json") write_json(std::cout, records, cfg);
        else write_csv(std::cout, records);
      } else {
        std::ofstream out(bench_out);
        if (!out) throw std::runtime_error("cannot open for writing: " + bench_out);
        if (fmt == "json") write_json(out, records, cfg);
        else write_csv(out, records);
      }
      if (max_err >= 0)
        for (const auto& r : records)
          if (r.err > max_err) {
            std::cerr << "error " << r.err << " above --max-err " << max_err << "\n";
            return 3;
          }
      return 0;
    }

    if (cmd_verify->parsed()) {
      set_num_threads(ve.threads);
      auto records = run_bench(to_config(ve), nullptr);
      const auto& r = records.front();
      std::cout << "verify " << r.kernel << " " << r.method << " n=" << r.n << " r=" << r.r
                << " err=" << r.err << " nnz=" << r.nnz_total << " t_factor=" << r.t_factor_sec
                << "s\n";
      if (max_err >= 0 && r.err > max_err) {
        std::cerr << "FAIL: error above --max-err " << max_err << "\n";
        return 3;
      }
      if (max_err >= 0) std::cout << "PASS\n";
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
