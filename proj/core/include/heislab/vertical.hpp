#pragma once

#include <limits>
#include <string>
#include <vector>

#include "heislab/area.hpp"
#include "heislab/curve.hpp"
#include "heislab/heis.hpp"

namespace heis {

/// Ordered samples of a vertical curve: strictly increasing in the
/// vertical order, pairwise inside each other's lambda-cone.
struct VerticalCurveSamples {
  std::vector<HeisPoint> pts;
  double lambda = 2.0;
  std::vector<double> knots;  // optional parameters in [0,1]

  std::size_t size() const { return pts.size(); }
  double knot(std::size_t i) const {
    if (!knots.empty()) return knots[i];
    return pts.size() < 2 ? 0.0 : static_cast<double>(i) / (pts.size() - 1);
  }
};

struct VerticalCheck {
  bool ok = true;
  std::string reason;
  std::ptrdiff_t first = -1;
  std::ptrdiff_t second = -1;
};

/// Verifies the order and cone invariants. Pairwise mode is O(k^2); the
/// consecutive-only mode is O(k) and strictly weaker.
VerticalCheck check_vertical(const VerticalCurveSamples& s, bool pairwise = true);

/// z(inv(first) * last); requires monotone samples.
double height(const VerticalCurveSamples& s);

/// Tree of nested sample ranges with per-generation diameter control:
/// gen-i node diameters lie in [mu^-1 2^-i, mu 2^-i] * diam(root).
struct Patchwork {
  struct Node {
    int lo = 0;
    int hi = 0;
    int gen = 0;
    double diam = 0.0;
    std::vector<int> children;
  };
  std::vector<Node> nodes;
  std::vector<std::vector<int>> generations;  // ids per generation, ranges in order
  double diam_root = 0.0;
  double mu = 1.0;  // measured, not assumed

  int depth() const { return static_cast<int>(generations.size()) - 1; }
};

struct PatchworkError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Greedy construction: a node is split by walking its range and cutting
/// whenever the accumulated diameter reaches half the node diameter;
/// undersized nodes are carried down as single-child chains. Generations
/// are added until the diameter window can no longer be met.
Patchwork build_patchwork(const VerticalCurveSamples& s, double mu_cap = 64.0);

struct PatchworkCheck {
  bool ok = true;
  double mu = 1.0;
  std::string reason;
};

/// Independent validator: degree, partition structure, distinct
/// endpoints, and the diameter window, with diameters recomputed from
/// the samples. Never trusts the builder.
PatchworkCheck validate_patchwork(const VerticalCurveSamples& s, const Patchwork& pw,
                                  double mu_cap);

/// Per-node planar points shadowing the projected curve.
struct ApproxPoints {
  std::vector<Eigen::VectorXd> pts;  // indexed by node id
  double C = 0.0;                    // certified max of |pt - gamma(m_v)| 2^gen / diam
};

/// The plumbing instance: each node takes the projection of the sample
/// nearest its parameter midpoint.
ApproxPoints approx_from_curve(const VerticalCurveSamples& s, const Patchwork& pw);

/// Piecewise-linear curve through the generation-i points, endpoints
/// doubled so the curve is defined on all of [0,1].
PolyCurve g_curve(const VerticalCurveSamples& s, const Patchwork& pw, const ApproxPoints& ap,
                  int gen);

/// Sum over generations 0..depth-1 of squared diameters of consecutive
/// g-curve pieces restricted to each node's parameter interval.
double sigma_patchwork(const VerticalCurveSamples& s, const Patchwork& pw,
                       const ApproxPoints& ap, int depth);

struct FiberMeasure {
  bool defined = false;
  double measure = std::numeric_limits<double>::quiet_NaN();
  double height = 0.0;
  double symplectic = 0.0;  // S of the closed-up projection
  ConvergenceReport report;
};

/// height - S(closed projection). The symplectic term is the exact
/// polygon value of the samples; the attached report re-derives it via
/// the generic area estimator on the interpolated projection, and the
/// measure is left undefined if that estimate diverges.
FiberMeasure fiber_measure(const VerticalCurveSamples& s, const AreaConfig& cfg = {});

struct ZIdentity {
  double lhs = 0.0;  // z of the full product
  double rhs = 0.0;  // S(partial-product projections) + sum of z increments
};

/// z(v_1 ... v_k) = S(polyline of partial-product projections) + sum z(v_i).
ZIdentity discrete_z_identity(const std::vector<HeisPoint>& increments);

struct BoxCountResult {
  double estimate = 0.0;
  std::vector<std::pair<double, double>> per_scale;  // (scale, value)
};

/// Covering-sum estimate sum diam^2 / 4 over greedy runs at each scale,
/// extrapolated linearly to scale 0. Calibrated so the unit vertical
/// segment returns exactly 1 (a subsegment of height h has diameter
/// 2 sqrt(h)). Run diameters use endpoint distances, exact on monotone
/// vertical data up to (1 + lambda^-2/16)^(1/4).
BoxCountResult hausdorff2_boxcount(const VerticalCurveSamples& s,
                                   const std::vector<double>& scales);

}  // namespace heis
