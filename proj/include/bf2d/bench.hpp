// Benchmark and verification harness: dense oracle, sampled relative-error
// estimator, and the experiment runner with CSV/JSON emission.
#ifndef BF2D_BENCH_HPP
#define BF2D_BENCH_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "bf2d/multiscale.hpp"
#include "bf2d/polar.hpp"

namespace bf2d {

struct BenchRecord {
  std::string kernel;
  std::string method;  // bf | pbf-s | pbf-m | mbf-s | mbf-m
  int n = 0;
  int r = 0;
  int k = 0;
  std::uint64_t seed = 0;
  double err = 0.0;
  double t_factor_sec = 0.0;
  double t_apply_sec = 0.0;
  double t_direct_sec = 0.0;  // measured on the sample set, scaled to full N
  std::size_t nnz_total = 0;
  double speedup = 0.0;  // t_direct_sec / t_apply_sec
};

struct BenchConfig {
  std::string kernel = "dft";  // dft | fio-radon | composition | synthetic
  std::string method = "bf";
  std::vector<int> ns{64};
  std::vector<int> ranks{8};
  int oversample = 8;
  std::uint64_t seed = 0;
  int center_halfwidth = 8;
  int tree_depth = 0;  // bf/pbf trees; 0 = accuracy default log2(n)+1
  int synthetic_rank = 2;
  std::string inner_factor_path;  // composition only
};

// u[i] = sum_j entry(x_i, xi_j) g[j] in a fixed order; optionally only the
// given output rows. Throws when the kernel has no entry oracle.
VectorXcd dense_oracle_apply(const KernelHandle& kernel, const PointSet& x, const PointSet& om,
                             const VectorXcd& g,
                             const std::vector<Eigen::Index>* rows = nullptr);

// sqrt( sum |approx - exact|^2 / sum |exact|^2 ) over equal-length samples
double estimate_error(const VectorXcd& approx, const VectorXcd& exact);

// deterministic sample of min(256, N) distinct output coordinates
std::vector<Eigen::Index> error_sample_set(std::size_t n_points, std::uint64_t seed);

std::vector<BenchRecord> run_bench(const BenchConfig& cfg, std::ostream* log = nullptr);

void write_csv(std::ostream& out, const std::vector<BenchRecord>& records);
void write_json(std::ostream& out, const std::vector<BenchRecord>& records,
                const BenchConfig& cfg);

}  // namespace bf2d

#endif
