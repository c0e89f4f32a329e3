#include "heislab/reduce.hpp"

#include <cmath>
#include <thread>

namespace heis {

namespace {

double pairwise_sum_range(const std::vector<double>& xs, std::size_t lo, std::size_t hi) {
  std::size_t n = hi - lo;
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += xs[i];
    return s;
  }
  std::size_t mid = lo + n / 2;
  return pairwise_sum_range(xs, lo, mid) + pairwise_sum_range(xs, mid, hi);
}

}  // namespace

double pairwise_sum(const std::vector<double>& xs) {
  return pairwise_sum_range(xs, 0, xs.size());
}

double cross_term(double x0, double y0, double x1, double y1) {
  double p = x0 * y1;
  double ep = std::fma(x0, y1, -p);
  double q = y0 * x1;
  double eq = std::fma(y0, x1, -q);
  return (p - q) + (ep - eq);
}

std::vector<double> parallel_map(std::size_t n, int workers,
                                 const std::function<double(std::size_t)>& f) {
  std::vector<double> out(n);
  if (workers <= 1 || n < 256) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
    return out;
  }
  std::size_t nthreads = std::min<std::size_t>(workers, n);
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  std::size_t chunk = (n + nthreads - 1) / nthreads;
  for (std::size_t t = 0; t < nthreads; ++t) {
    std::size_t lo = t * chunk;
    std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi] {
      for (std::size_t i = lo; i < hi; ++i) out[i] = f(i);
    });
  }
  for (auto& th : pool) th.join();
  return out;
}

int default_workers() {
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

}  // namespace heis
