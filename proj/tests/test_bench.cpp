#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "bf2d/bench.hpp"

using namespace bf2d;

TEST_CASE("estimate_error: fixed points of the sampled relative metric") {
  VectorXcd e(4);
  e << 1.0, 1.0, 1.0, 1.0;
  CHECK(estimate_error(e, e) == 0.0);
  CHECK(estimate_error(2.0 * e, e) == doctest::Approx(1.0));
  VectorXcd a = e;
  a(0) = 2.0;
  CHECK(estimate_error(a, e) == doctest::Approx(0.5));
  CHECK_THROWS_AS(estimate_error(e, VectorXcd::Zero(4)), std::domain_error);
  VectorXcd short_v(2);
  CHECK_THROWS(estimate_error(short_v, e));
}

TEST_CASE("dense oracle: indicator columns, all-ones kernel, dft cross-check") {
  const int n = 8;
  auto [x, om] = build_uniform_grids(n);
  auto k = dft_kernel(n);
  VectorXcd g = VectorXcd::Zero(64);
  g(5) = 1.0;
  VectorXcd col = dense_oracle_apply(k, x, om, g);
  for (std::size_t i = 0; i < 64; ++i)
    CHECK(std::abs(col(static_cast<Eigen::Index>(i)) - k.entry(x.points[i], om.points[5])) <=
          1e-14);

  KernelHandle ones;
  ones.rows = ones.cols = 64;
  ones.entry = [](const Point2&, const Point2&) { return cplx(1.0, 0.0); };
  Rng rng(3);
  VectorXcd gr(64);
  for (int i = 0; i < 64; ++i) gr(i) = rng.next_cgauss();
  VectorXcd u = dense_oracle_apply(ones, x, om, gr);
  for (int i = 0; i < 64; ++i) CHECK(std::abs(u(i) - gr.sum()) <= 1e-12 * gr.norm());

  VectorXcd fast = k.matvec(gr);
  VectorXcd dense = dense_oracle_apply(k, x, om, gr);
  CHECK((fast - dense).norm() <= 1e-10 * dense.norm());

  // row-subset evaluation
  std::vector<Eigen::Index> rows{0, 7, 33};
  VectorXcd sub = dense_oracle_apply(k, x, om, gr, &rows);
  for (std::size_t i = 0; i < rows.size(); ++i)
    CHECK(sub(static_cast<Eigen::Index>(i)) == dense(rows[i]));

  KernelHandle no_entry;
  no_entry.rows = no_entry.cols = 64;
  CHECK_THROWS(dense_oracle_apply(no_entry, x, om, gr));
}

TEST_CASE("sampled estimator equals the full-vector error when S covers everything") {
  const int n = 16;
  auto [x, om] = build_uniform_grids(n);
  auto k = dft_kernel(n);
  Rng rng(5);
  VectorXcd g(256);
  for (int i = 0; i < 256; ++i) g(i) = rng.next_cgauss();
  VectorXcd exact = dense_oracle_apply(k, x, om, g);

  BenchConfig cfg;
  cfg.kernel = "dft";
  cfg.method = "bf";
  cfg.ns = {16};
  cfg.ranks = {10};
  cfg.seed = 1;
  auto records = run_bench(cfg);
  REQUIRE(records.size() == 1);

  // with N = 256 the sample set is all of X, so the estimator is the full error
  auto rows = error_sample_set(256, 1);
  CHECK(rows.size() == 256);
  CHECK(records[0].err <= 1e-5);
}

TEST_CASE("bench records: fields, csv header, json loads, determinism") {
  BenchConfig cfg;
  cfg.kernel = "dft";
  cfg.method = "bf";
  cfg.ns = {16};
  cfg.ranks = {8, 10};
  cfg.seed = 2;
  auto records = run_bench(cfg);
  REQUIRE(records.size() == 2);
  for (const auto& r : records) {
    CHECK(r.err >= 0.0);
    CHECK(r.t_factor_sec > 0.0);
    CHECK(r.t_apply_sec > 0.0);
    CHECK(r.t_direct_sec > 0.0);
    CHECK(r.nnz_total > 0);
    CHECK(r.speedup == doctest::Approx(r.t_direct_sec / r.t_apply_sec));
  }

  std::ostringstream csv;
  write_csv(csv, records);
  const std::string header = csv.str().substr(0, csv.str().find('\n'));
  CHECK(header ==
        "kernel,method,n,r,k,seed,err,t_factor_sec,t_apply_sec,t_direct_sec,nnz_total,speedup");

  std::ostringstream js;
  write_json(js, records, cfg);
  CHECK(js.str().find("t_direct_note") != std::string::npos);
  CHECK(js.str().find("\"records\"") != std::string::npos);

  auto again = run_bench(cfg);
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(records[i].err == again[i].err);
    CHECK(records[i].nnz_total == again[i].nnz_total);
  }
}

TEST_CASE("bench rejects invalid kernel/method pairings") {
  BenchConfig cfg;
  cfg.kernel = "synthetic";
  cfg.method = "pbf-s";
  cfg.ns = {16};
  cfg.ranks = {4};
  CHECK_THROWS_AS(run_bench(cfg), std::invalid_argument);

  cfg.kernel = "fio-radon";
  cfg.method = "pbf-m";  // no fast matvec available for the raw FIO kernel
  CHECK_THROWS_AS(run_bench(cfg), std::invalid_argument);

  cfg.kernel = "composition";
  cfg.method = "mbf-m";  // missing --inner-factor
  CHECK_THROWS_AS(run_bench(cfg), std::invalid_argument);

  cfg.kernel = "nope";
  CHECK_THROWS_AS(run_bench(cfg), std::invalid_argument);
}
