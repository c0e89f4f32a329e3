#pragma once

#include <Eigen/Core>
#include <stdexcept>

namespace heis {

/// A point of the n-th Heisenberg group in exponential coordinates:
/// 2n horizontal coordinates ordered (x1,y1,...,xn,yn) plus one vertical.
/// n is a runtime parameter so one binary handles H_1 and H_2 alike.
struct HeisPoint {
  Eigen::VectorXd h;
  double z = 0.0;

  HeisPoint() = default;
  HeisPoint(Eigen::VectorXd horizontal, double vertical)
      : h(std::move(horizontal)), z(vertical) {
    if (h.size() % 2 != 0) throw std::invalid_argument("HeisPoint: odd horizontal size");
  }

  int n() const { return static_cast<int>(h.size()) / 2; }
};

HeisPoint identity(int n);
/// The point with h = 0, z = 1 (generator of the center).
HeisPoint vertical_unit(int n);
/// exp of a horizontal vector: (v, 0).
HeisPoint horizontal_point(const Eigen::VectorXd& v);

/// Standard symplectic form sum_i (x_i ybar_i - xbar_i y_i).
double omega(const Eigen::VectorXd& u, const Eigen::VectorXd& v);

/// Group product; z(ab) = z_a + z_b + omega(pi(a), pi(b)) / 2.
HeisPoint mul(const HeisPoint& a, const HeisPoint& b);
HeisPoint inv(const HeisPoint& a);

/// Koranyi gauge (|h|^4 + 16 z^2)^(1/4).
double kor_norm(const HeisPoint& p);
/// Left-invariant metric kor_norm(inv(p) * q).
double kor_dist(const HeisPoint& p, const HeisPoint& q);

/// Scaling automorphism (r h, r^2 z), r > 0.
HeisPoint dilate(double r, const HeisPoint& p);

/// |pi(p)| + 4 sqrt(|z|): an upper bound for the Carnot-Caratheodory
/// distance from the origin, always within [kor_norm, 3 kor_norm].
double cc_upper_bound(const HeisPoint& p);

/// Homogeneous cone |z| >= lambda |pi|^2 around the center, optionally
/// restricted to one sign of z.
struct VConeSpec {
  enum class Sign { both, plus, minus };
  double lambda = 2.0;
  Sign sign = Sign::both;

  explicit VConeSpec(double l = 2.0, Sign s = Sign::both) : lambda(l), sign(s) {
    if (!(lambda > 0)) throw std::invalid_argument("VConeSpec: lambda must be > 0");
  }
};

/// Whether q lies in the cone translated to base.
bool in_vcone(const HeisPoint& base, const HeisPoint& q, const VConeSpec& cone);

/// Total order on vertical curves: z(inv(g) * h) > 0.
bool precedes(const HeisPoint& g, const HeisPoint& h);

}  // namespace heis
