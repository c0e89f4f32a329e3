#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace heis {

/// Compensated (Neumaier) accumulator.
class Accumulator {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double total() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Fixed pairwise summation tree; result independent of chunking.
double pairwise_sum(const std::vector<double>& xs);

/// x0*y1 - y0*x1 with fma-corrected products (Kahan 2x2 determinant).
double cross_term(double x0, double y0, double x1, double y1);

/// Evaluates f(0..n-1) into a vector using `workers` threads. The output
/// order is fixed by index, so downstream ordered reductions are
/// bit-stable across worker counts.
std::vector<double> parallel_map(std::size_t n, int workers,
                                 const std::function<double(std::size_t)>& f);

/// Default worker count (hardware concurrency, at least 1).
int default_workers();

}  // namespace heis
