#include "heislab/heis.hpp"

#include <cmath>

namespace heis {

namespace {

void require_same_n(const HeisPoint& a, const HeisPoint& b, const char* op) {
  if (a.h.size() != b.h.size()) {
    throw std::invalid_argument(std::string(op) + ": group index mismatch");
  }
}

}  // namespace

HeisPoint identity(int n) { return HeisPoint(Eigen::VectorXd::Zero(2 * n), 0.0); }

HeisPoint vertical_unit(int n) { return HeisPoint(Eigen::VectorXd::Zero(2 * n), 1.0); }

HeisPoint horizontal_point(const Eigen::VectorXd& v) { return HeisPoint(v, 0.0); }

double omega(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  if (u.size() != v.size() || u.size() % 2 != 0) {
    throw std::invalid_argument("omega: vectors must have equal even length");
  }
  double s = 0.0;
  for (Eigen::Index i = 0; i + 1 < u.size(); i += 2) {
    s += u[i] * v[i + 1] - v[i] * u[i + 1];
  }
  return s;
}

HeisPoint mul(const HeisPoint& a, const HeisPoint& b) {
  require_same_n(a, b, "mul");
  return HeisPoint(a.h + b.h, a.z + b.z + 0.5 * omega(a.h, b.h));
}

HeisPoint inv(const HeisPoint& a) { return HeisPoint(-a.h, -a.z); }

double kor_norm(const HeisPoint& p) {
  double h2 = p.h.squaredNorm();
  return std::pow(h2 * h2 + 16.0 * p.z * p.z, 0.25);
}

double kor_dist(const HeisPoint& p, const HeisPoint& q) {
  require_same_n(p, q, "kor_dist");
  return kor_norm(mul(inv(p), q));
}

HeisPoint dilate(double r, const HeisPoint& p) {
  if (!(r > 0)) throw std::invalid_argument("dilate: r must be > 0");
  return HeisPoint(r * p.h, r * r * p.z);
}

double cc_upper_bound(const HeisPoint& p) {
  return p.h.norm() + 4.0 * std::sqrt(std::abs(p.z));
}

bool in_vcone(const HeisPoint& base, const HeisPoint& q, const VConeSpec& cone) {
  require_same_n(base, q, "in_vcone");
  HeisPoint g = mul(inv(base), q);
  if (std::abs(g.z) < cone.lambda * g.h.squaredNorm()) return false;
  switch (cone.sign) {
    case VConeSpec::Sign::plus:
      return g.z >= 0;
    case VConeSpec::Sign::minus:
      return g.z <= 0;
    case VConeSpec::Sign::both:
      return true;
  }
  return false;
}

bool precedes(const HeisPoint& g, const HeisPoint& h) {
  require_same_n(g, h, "precedes");
  return mul(inv(g), h).z > 0;
}

}  // namespace heis
