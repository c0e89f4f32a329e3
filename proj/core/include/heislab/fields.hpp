#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "heislab/heis.hpp"
#include "heislab/vertical.hpp"

namespace heis {

/// An evaluable map H_n -> R^2n. `hgrad`, when set, returns the 2n x 2n
/// matrix whose columns are derivatives along the left-invariant
/// horizontal frame X_1, Y_1, ..., X_n, Y_n; otherwise central
/// differences along the horizontal one-parameter subgroups are used.
struct MapField {
  int n = 1;
  std::function<Eigen::VectorXd(const HeisPoint&)> eval;
  std::function<Eigen::MatrixXd(const HeisPoint&)> hgrad;
  double fd_step = 1e-6;
};

/// Registry of named analytic test fields:
///   projection            f = pi
///   linear     (A row-major 2n x 2n)
///   translated (q horizontal coords)   f(p) = pi(inv(q) p)
///   scale      (s)                     f = s pi
///   shear      (a)        n=1          f = (x + a z^2, y)
///   parabolic  (a, b)     n=1          f = (x + a z^2, y + b z)
///   tilt       (c)        n=1          f = (x + c z, y)
MapField make_field(const std::string& name, const std::vector<double>& params, int n = 1);

Eigen::MatrixXd horizontal_jacobian(const MapField& f, const HeisPoint& p);
/// det of the horizontal Jacobian.
double jh(const MapField& f, const HeisPoint& p);

struct Ball {
  HeisPoint center;
  double radius = 1.0;
};

/// Uniform samples in the Koranyi ball by coordinate-box rejection
/// against the gauge profile, seeded and deterministic.
std::vector<HeisPoint> sample_ball(const Ball& b, std::size_t count, std::uint64_t seed);

struct DegenerateSamplesError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AffineFit {
  Eigen::MatrixXd M;
  Eigen::VectorXd b;
  double residual = 0.0;  // RMS error / rad(D)
};

/// Least-squares fit of f by w -> M pi(w) + b over uniform ball samples.
AffineFit affine_fit(const MapField& f, const Ball& D, std::size_t samples, std::uint64_t seed);

/// Scale-invariant distance from f to its best affine approximation on
/// the ball: the affine_fit residual.
double beta_number(const MapField& f, const Ball& D, std::size_t samples, std::uint64_t seed);

struct BilipReport {
  bool hypothesis_met = false;
  double max_deviation = 0.0;  // sup of ||hgrad - id|| sampled on 5D
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  bool within = false;  // singular values inside [1/2, 2]
};

/// When ||D_H f - id|| < c sampled on 5D, asserts the fitted affine map
/// is 2-bilipschitz; otherwise reports the failed hypothesis and asserts
/// nothing.
BilipReport bilip_check(const MapField& f, const Ball& D, double c, std::size_t samples,
                        std::uint64_t seed);

/// Coordinate box: horizontal ranges plus a vertical range.
struct CoordBox {
  Eigen::VectorXd h_lo;
  Eigen::VectorXd h_hi;
  double z_lo = 0.0;
  double z_hi = 1.0;

  static CoordBox unit(int n);
  bool contains_h(const Eigen::VectorXd& h) const;
  bool contains(const HeisPoint& p) const;
  double volume() const;
};

/// Per-level maximal 2^-i separated point sets inside a working box,
/// built greedily over a deterministic reference lattice.
class NetFamily {
 public:
  NetFamily(const CoordBox& box, int min_level, int max_level,
            std::int64_t lattice_cap = 6'000'000);

  int min_level() const { return min_level_; }
  int max_level() const { return max_level_; }
  const std::vector<HeisPoint>& level(int i) const;
  const CoordBox& box() const { return box_; }

 private:
  CoordBox box_;
  int min_level_;
  int max_level_;
  std::vector<std::vector<HeisPoint>> levels_;
};

struct TSumConfig {
  int depth = 3;               // finest net level used
  std::size_t beta_samples = 512;
  std::uint64_t seed = 42;
};

/// Multi-scale sum of squared beta-numbers over net points whose
/// 2^-i balls meet the sample set; 0 when the set is a singleton.
double t_sum(const std::vector<HeisPoint>& gamma_samples, const MapField& f,
             const NetFamily& nets, double A, const TSumConfig& cfg);

struct TraceConfig {
  double step = 1.0 / 64;
  double min_step = 1e-5;
  double max_step = 0.25;
  double corrector_tol = 1e-11;
  double jh_min = 1e-6;
  int max_newton = 12;
  double lambda = 2.0;
  std::int64_t max_samples = std::int64_t{1} << 20;
};

struct TraceError : std::runtime_error {
  TraceError(const std::string& msg, HeisPoint last)
      : std::runtime_error(msg), last_good(std::move(last)) {}
  HeisPoint last_good;
};

/// Predictor-corrector continuation of f^-1(w) through the seed point:
/// predictor steps along the vertical, corrector is damped Newton in the
/// horizontal coordinates at fixed z. Terminates at the box boundary.
/// The output is validated as an increasing vertical curve.
VerticalCurveSamples trace_fiber(const MapField& f, const Eigen::VectorXd& w,
                                 const HeisPoint& seed, const CoordBox& box,
                                 const TraceConfig& cfg = {});

}  // namespace heis
