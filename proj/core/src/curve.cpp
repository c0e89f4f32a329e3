#include "heislab/curve.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "heislab/reduce.hpp"

namespace heis {

Eigen::VectorXd PlCurve::at(const Dyadic& t) const {
  if (t < knots.front() || t > knots.back()) {
    throw std::invalid_argument("PlCurve::at: parameter outside [0,1]");
  }
  auto it = std::upper_bound(knots.begin(), knots.end(), t);
  std::size_t k = (it == knots.end()) ? knots.size() - 2 : (it - knots.begin()) - 1;
  if (t == knots[k]) return values[k];
  double den = (knots[k + 1] - knots[k]).value();
  double s = (t - knots[k]).value() / den;
  return values[k] + s * (values[k + 1] - values[k]);
}

int PlCurve::max_knot_exponent() const {
  int e = 0;
  for (const auto& t : knots) e = std::max(e, t.exponent());
  return e;
}

void PlCurve::validate() const {
  if (knots.size() < 2 || knots.size() != values.size()) {
    throw std::invalid_argument("PlCurve: need matching knots/values, >= 2");
  }
  if (!(knots.front() == Dyadic()) || !(knots.back() == Dyadic::from_int(1))) {
    throw std::invalid_argument("PlCurve: knots must span [0,1]");
  }
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (!(knots[i - 1] < knots[i])) throw std::invalid_argument("PlCurve: knots not increasing");
    if (values[i].size() != values[0].size()) {
      throw std::invalid_argument("PlCurve: inconsistent value dimensions");
    }
  }
}

namespace {

double diam3(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c) {
  return std::max({(a - b).norm(), (a - c).norm(), (b - c).norm()});
}

}  // namespace

double sigma_exact(const PlCurve& c) {
  c.validate();
  const int estar = c.max_knot_exponent();
  const std::size_t npieces = c.knots.size() - 1;

  std::vector<double> speed_sq(npieces), len(npieces);
  for (std::size_t k = 0; k < npieces; ++k) {
    len[k] = (c.knots[k + 1] - c.knots[k]).value();
    speed_sq[k] = (c.values[k + 1] - c.values[k]).squaredNorm() / (len[k] * len[k]);
  }

  Accumulator total;
  for (int l = 0; l < estar; ++l) {
    // cells whose interior contains a knot get the three-point diameter
    // evaluated directly; cells inside one affine piece contribute
    // (speed * 2^-l)^2 and are only counted.
    std::set<int128> mixed;
    for (const auto& t : c.knots) {
      if (t.exponent() > l) mixed.insert(t.floor_mul_pow2(l));
    }
    for (int128 j : mixed) {
      Dyadic a(j, l);
      Dyadic b(j + 1, l);
      Dyadic m = Dyadic::midpoint(a, b);
      double d = diam3(c.at(a), c.at(m), c.at(b));
      total.add(d * d);
    }
    const double cell_sq = std::ldexp(1.0, -2 * l);
    for (std::size_t k = 0; k < npieces; ++k) {
      int128 jlo = c.knots[k].ceil_mul_pow2(l);
      int128 jhi = c.knots[k + 1].floor_mul_pow2(l);
      int128 count = jhi - jlo;
      if (count > 0) total.add(static_cast<double>(count) * speed_sq[k] * cell_sq);
    }
  }

  // all cells at levels >= estar are pure; geometric series in closed form
  double rate = 0.0;
  for (std::size_t k = 0; k < npieces; ++k) rate += len[k] * speed_sq[k];
  total.add(std::ldexp(rate, 1 - estar));
  return total.total();
}

Partition::Partition(std::vector<double> points) : pts_(std::move(points)) {
  if (pts_.size() < 2 || pts_.front() != 0.0 || pts_.back() != 1.0) {
    throw std::invalid_argument("Partition: endpoints must be exactly 0 and 1");
  }
  for (std::size_t i = 1; i < pts_.size(); ++i) {
    if (!(pts_[i - 1] < pts_[i])) throw std::invalid_argument("Partition: not strictly increasing");
  }
}

Partition Partition::uniform(int cells) {
  if (cells < 1) throw std::invalid_argument("Partition::uniform: cells >= 1");
  std::vector<double> pts(cells + 1);
  for (int j = 0; j <= cells; ++j) pts[j] = static_cast<double>(j) / cells;
  pts.front() = 0.0;
  pts.back() = 1.0;
  return Partition(std::move(pts));
}

Partition Partition::dyadic(int level) {
  if (level < 0 || level > 40) throw std::invalid_argument("Partition::dyadic: bad level");
  std::int64_t cells = std::int64_t{1} << level;
  std::vector<double> pts(cells + 1);
  for (std::int64_t j = 0; j <= cells; ++j) pts[j] = std::ldexp(static_cast<double>(j), -level);
  return Partition(std::move(pts));
}

double Partition::mesh() const {
  double m = 0.0;
  for (std::size_t i = 1; i < pts_.size(); ++i) m = std::max(m, pts_[i] - pts_[i - 1]);
  return m;
}

bool PolyCurve::closed() const {
  return vertices.size() >= 2 && vertices.front() == vertices.back();
}

double PolyCurve::length() const {
  double s = 0.0;
  for (std::size_t i = 1; i < vertices.size(); ++i) s += (vertices[i] - vertices[i - 1]).norm();
  return s;
}

void PolyCurve::validate() const {
  if (vertices.empty()) throw std::invalid_argument("PolyCurve: needs >= 1 vertex");
  for (const auto& v : vertices) {
    if (v.size() != vertices.front().size()) {
      throw std::invalid_argument("PolyCurve: inconsistent dimensions");
    }
  }
  if (!knots.empty()) {
    if (knots.size() != vertices.size()) throw std::invalid_argument("PolyCurve: knot count");
    for (std::size_t i = 1; i < knots.size(); ++i) {
      if (!(knots[i - 1] <= knots[i])) throw std::invalid_argument("PolyCurve: knots decreasing");
    }
  }
}

PolyCurve concat(const PolyCurve& a, const PolyCurve& b) {
  a.validate();
  b.validate();
  if (a.vertices.empty() || b.vertices.empty() || a.vertices.back() != b.vertices.front()) {
    throw std::invalid_argument("concat: endpoints must match exactly");
  }
  PolyCurve out;
  out.vertices = a.vertices;
  out.vertices.insert(out.vertices.end(), b.vertices.begin() + 1, b.vertices.end());
  return out;
}

PolyCurve translate(const PolyCurve& c, const Eigen::VectorXd& v) {
  PolyCurve out = c;
  for (auto& p : out.vertices) p += v;
  return out;
}

void ApproxGrid::validate() const {
  if (levels.empty()) throw std::invalid_argument("ApproxGrid: no levels");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    std::size_t expect = (std::size_t{1} << i) + 1;
    if (levels[i].size() != expect) {
      throw std::invalid_argument("ApproxGrid: level " + std::to_string(i) + " must have " +
                                  std::to_string(expect) + " entries");
    }
    for (const auto& p : levels[i]) {
      if (p.size() != levels[0][0].size()) {
        throw std::invalid_argument("ApproxGrid: inconsistent dimensions");
      }
    }
  }
}

std::string to_string(ConvergenceReport::Verdict v) {
  switch (v) {
    case ConvergenceReport::Verdict::converged:
      return "converged";
    case ConvergenceReport::Verdict::diverging:
      return "diverging";
    case ConvergenceReport::Verdict::inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

}  // namespace heis
