#pragma once

#include <Eigen/Core>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

#include "heislab/curve.hpp"
#include "heislab/dyadic.hpp"

namespace heis {

/// Parameters of the recursive square-insertion curve family: stage i
/// lives on the grid 2^-r[i] and inserts squares traced by the k[i]-fold
/// tracer. Requires r[i+1] >= r[i] + 16 k[i] + 2.
struct PathParams {
  std::vector<int> r;
  std::vector<int> k;

  PathParams(std::vector<int> r_seq, std::vector<int> k_seq);
  int depth() const { return static_cast<int>(r.size()) - 1; }
};

struct AbPair {
  Dyadic a;  // (1 - 4^-i) / 3
  Dyadic b;  // (1 + 2 * 4^-i) / 3
};

/// Dyadic sequences increasing/decreasing to 1/3.
AbPair ab_sequences(int i);

/// The unbounded staircase: piecewise linear, value i at both a_i and b_i,
/// affine on [a_i, a_i+1] and [b_i+1, b_i]. Defined at every dyadic t.
double staircase(const Dyadic& t);

/// Level-m dyadic approximation of the staircase in closed form: agrees
/// with the staircase outside [a_floor(m/2), b_ceil(m/2)], affine inside.
double staircase_dyadic(int m, const Dyadic& t);

/// Its graph as an exact PL curve (values are 1-dimensional).
PlCurve staircase_dyadic_graph(int m);

/// Unit-speed CCW boundary of the unit square from the origin corner,
/// constant (0,0) for s >= 4.
Eigen::Vector2d square_path(double s);

/// theta_k(t) = square_path(staircase_dyadic(8k, t) / k): traces the unit
/// square forward as t goes to 1/3, then backward.
Eigen::Vector2d square_tracer(int k, const Dyadic& t);

/// theta_k as an exact PL curve over its true breakpoints
/// {a_0..a_4k, b_4k..b_0}.
PlCurve square_tracer_pl(int k);

/// The recursive limit curve: dyadic areas vanish at every level while
/// refined partitions see the inserted squares.
class PathologicalCurve : public CurveSource {
 public:
  explicit PathologicalCurve(PathParams params);

  int dim() const override { return 2; }
  Eigen::VectorXd at(double t) const override;
  Eigen::VectorXd at(const Dyadic& t) const override { return limit(t); }
  int max_param_exponent() const override { return params_.r.back(); }

  /// The refined partitions double as stress partitions for the area
  /// estimator: any stage whose grid is at least comparable to the
  /// probed mesh (and small enough to evaluate) is exposed.
  std::vector<std::vector<double>> stress_partitions(int level) const override;

  /// Restricts which stages stress_partitions may expose (default: all).
  void set_stress_stage_cap(int cap) { stress_stage_cap_ = cap; }

  /// gamma_i evaluated pointwise through the recursion (no vertex
  /// materialization); memoized on grid values.
  Eigen::Vector2d stage(int i, const Dyadic& t) const;

  /// gamma(t) for t with exponent <= r.back(): the first stage whose grid
  /// resolves t already equals the limit there.
  Eigen::Vector2d limit(const Dyadic& t) const;

  /// The partition that inserts the four square-vertex times in every
  /// level-r[i] cell; its inscribed polygon has area 1.
  Partition refined_partition(int stage, std::int64_t point_cap) const;

  const PathParams& params() const { return params_; }

 private:
  PathParams params_;
  int stress_stage_cap_ = 1 << 20;
  mutable std::shared_mutex memo_mutex_;
  mutable std::unordered_map<std::uint64_t, Eigen::Vector2d> memo_;
};

struct CertEntry {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  bool pass = false;
};

struct SigmaCertificates {
  std::vector<CertEntry> tracer;     // sigma(theta_k) <= 128 / k
  std::vector<CertEntry> staircase;  // sigma(D_2i alpha) <= 32 i
  std::optional<CertEntry> gamma;    // only when the lemma hypotheses hold
  bool gamma_hypotheses_met = false;
  std::string note;
  bool all_pass = true;
};

/// Exact sigma values with their closed-form bounds. The gamma entry is
/// only asserted when k_i >= max(i, 1) for all stages; otherwise the
/// ratio is reported without a verdict.
SigmaCertificates sigma_certificates(const std::vector<int>& k_list,
                                     const std::vector<int>& staircase_levels,
                                     const std::optional<PathParams>& params = std::nullopt,
                                     int gamma_level = 12);

}  // namespace heis
