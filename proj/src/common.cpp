#include "bf2d/common.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

namespace bf2d {

MatrixXcd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  MatrixXcd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.next_cgauss();
  return m;
}

std::vector<Eigen::Index> sample_distinct(Eigen::Index n, Eigen::Index k, Rng& rng) {
  k = std::min(k, n);
  // partial Fisher-Yates over an index vector
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto j = i + static_cast<Eigen::Index>(rng.next_u64() % static_cast<std::uint64_t>(n - i));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  idx.resize(static_cast<std::size_t>(k));
  std::sort(idx.begin(), idx.end());
  return idx;
}

namespace {
std::atomic<int> g_threads{0};
}

void set_num_threads(int n) { g_threads.store(n < 0 ? 0 : n); }

int num_threads() {
  int n = g_threads.load();
  if (n == 0) {
    n = static_cast<int>(std::thread::hardware_concurrency());
    if (n <= 0) n = 1;
  }
  return n;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t)>& fn) {
  const int nt = num_threads();
  if (count == 0) return;
  if (nt <= 1 || count == 1) {
    fn(0, count);
    return;
  }
  const std::size_t nchunk = std::min<std::size_t>(static_cast<std::size_t>(nt), count);
  const std::size_t base = count / nchunk, rem = count % nchunk;
  std::vector<std::thread> pool;
  pool.reserve(nchunk);
  std::size_t begin = 0;
  for (std::size_t c = 0; c < nchunk; ++c) {
    const std::size_t len = base + (c < rem ? 1 : 0);
    const std::size_t end = begin + len;
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
    begin = end;
  }
  for (auto& t : pool) t.join();
}

}  // namespace bf2d
