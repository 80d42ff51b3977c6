// Shared basics: complex scalar type, 2D points, seeded RNG streams,
// and a small thread-pool-free parallel_for.
#ifndef BF2D_COMMON_HPP
#define BF2D_COMMON_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace bf2d {

using cplx = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

struct Point2 {
  double x1 = 0.0;
  double x2 = 0.0;
};

inline double dot(const Point2& a, const Point2& b) { return a.x1 * b.x1 + a.x2 * b.x2; }

// Counter-friendly splittable generator (splitmix64 core). Every block of
// randomized work derives its own stream from (seed, tags), so results do
// not depend on scheduling order.
struct Rng {
  std::uint64_t state;

  explicit Rng(std::uint64_t seed) : state(seed) {}

  static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL + (b << 1 | 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t next_u64() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0,1)
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // standard normal via Box-Muller; platform-stable (no std::normal_distribution)
  double next_gauss() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1 = next_unit();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double u2 = next_unit();
    const double rad = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * M_PI * u2;
    cached_ = rad * std::sin(ang);
    have_cached_ = true;
    return rad * std::cos(ang);
  }

  // standard complex normal CN(0,1)
  cplx next_cgauss() {
    const double re = next_gauss();
    const double im = next_gauss();
    return cplx(re * M_SQRT1_2, im * M_SQRT1_2);
  }

 private:
  double cached_ = 0.0;
  bool have_cached_ = false;
};

MatrixXcd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng);

// k distinct indices drawn from [0,n), sorted ascending
std::vector<Eigen::Index> sample_distinct(Eigen::Index n, Eigen::Index k, Rng& rng);

// Global worker count used by parallel_for (0 = hardware concurrency).
void set_num_threads(int n);
int num_threads();

// Runs fn(first,last) on disjoint chunks of [0,count). Caller guarantees
// chunks touch disjoint state; result placement must not depend on timing.
void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace bf2d

#endif
