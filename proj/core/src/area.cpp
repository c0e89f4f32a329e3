#include "heislab/area.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "heislab/reduce.hpp"

namespace heis {

namespace {

void require_even_dim(int dim, const char* op) {
  if (dim < 2 || dim % 2 != 0) {
    throw std::invalid_argument(std::string(op) + ": curve dimension must be even");
  }
}

/// Symplectic cross of one segment: sum_j (x_j(a) y_j(b) - y_j(a) x_j(b)).
double segment_cross(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double s = 0.0;
  for (Eigen::Index j = 0; j + 1 < a.size(); j += 2) {
    s += cross_term(a[j], a[j + 1], b[j], b[j + 1]);
  }
  return s;
}

}  // namespace

PolyCurve poly_from_partition(const CurveSource& gamma, const Partition& p) {
  PolyCurve out;
  out.knots = p.points();
  out.vertices.reserve(p.size());
  for (double t : p.points()) out.vertices.push_back(gamma.at(t));
  return out;
}

double signed_area(const PolyCurve& c) {
  c.validate();
  require_even_dim(c.dim(), "signed_area");
  if (c.vertices.size() < 2) return 0.0;
  std::vector<double> terms(c.vertices.size() - 1);
  for (std::size_t i = 0; i + 1 < c.vertices.size(); ++i) {
    terms[i] = segment_cross(c.vertices[i], c.vertices[i + 1]);
  }
  return 0.5 * pairwise_sum(terms);
}

PolyCurve close_curve(const PolyCurve& c) {
  c.validate();
  PolyCurve out = c;
  out.knots.clear();
  if (!out.closed()) out.vertices.push_back(out.vertices.front());
  return out;
}

PolyCurve dyadic_approx(const CurveSource& gamma, int level, std::int64_t eval_cap) {
  if (level < 0) throw std::invalid_argument("dyadic_approx: level >= 0");
  std::int64_t n = (std::int64_t{1} << level) + 1;
  if (n > eval_cap) {
    throw ResourceLimitError("dyadic_approx: 2^" + std::to_string(level) +
                             " exceeds the evaluation cap");
  }
  PolyCurve out;
  out.vertices.reserve(n);
  out.knots.reserve(n);
  for (std::int64_t j = 0; j < n; ++j) {
    double t = std::ldexp(static_cast<double>(j), -level);
    out.knots.push_back(t);
    out.vertices.push_back(gamma.at(t));
  }
  return out;
}

double delta_ij(const CurveSource& gamma, int level, std::int64_t j) {
  if (level < 0 || j < 0 || j >= (std::int64_t{1} << level)) {
    throw std::invalid_argument("delta_ij: index out of range");
  }
  double a = std::ldexp(static_cast<double>(j), -level);
  double m = std::ldexp(static_cast<double>(2 * j + 1), -level - 1);
  double b = std::ldexp(static_cast<double>(j + 1), -level);
  Eigen::VectorXd va = gamma.at(a), vm = gamma.at(m), vb = gamma.at(b);
  return std::max({(va - vm).norm(), (va - vb).norm(), (vm - vb).norm()});
}

SigmaResult sigma_partial(const CurveSource& gamma, int max_level, std::optional<double> lip,
                          int workers, std::int64_t eval_cap) {
  if (max_level < 0) throw std::invalid_argument("sigma_partial: max_level >= 0");
  std::int64_t fine = std::int64_t{1} << (max_level + 1);
  if (fine + 1 > eval_cap) {
    throw ResourceLimitError("sigma_partial: 2^" + std::to_string(max_level + 1) +
                             " exceeds the evaluation cap");
  }
  // sample the finest grid once; every three-point stencil reads from it
  std::vector<Eigen::VectorXd> samples(fine + 1);
  {
    std::vector<double> dummy = parallel_map(fine + 1, workers, [&](std::size_t j) {
      samples[j] = gamma.at(std::ldexp(static_cast<double>(j), -(max_level + 1)));
      return 0.0;
    });
  }
  Accumulator acc;
  for (int i = 0; i <= max_level; ++i) {
    std::int64_t cells = std::int64_t{1} << i;
    std::int64_t stride = std::int64_t{1} << (max_level + 1 - i);
    std::vector<double> terms(cells);
    for (std::int64_t j = 0; j < cells; ++j) {
      const auto& a = samples[j * stride];
      const auto& m = samples[j * stride + stride / 2];
      const auto& b = samples[(j + 1) * stride];
      double d = std::max({(a - m).norm(), (a - b).norm(), (m - b).norm()});
      terms[j] = d * d;
    }
    acc.add(pairwise_sum(terms));
  }
  SigmaResult r;
  r.value = acc.total();
  r.max_level = max_level;
  if (lip) r.tail_bound = 2.0 * (*lip) * (*lip) * std::ldexp(1.0, -max_level);
  return r;
}

namespace {

struct ProbePolygon {
  std::vector<double> pts;
  PolyCurve poly;
};

/// Near-uniform partition at the given level with deterministic jitter,
/// quantized so exact-parameter curves stay inside their grid.
ProbePolygon jittered_probe(const CurveSource& gamma, int level, std::uint64_t seed) {
  int q = std::min(level + 8, gamma.max_param_exponent());
  q = std::max(q, level + 1);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-0.45, 0.45);
  std::int64_t cells = std::int64_t{1} << level;
  std::vector<double> pts;
  pts.reserve(cells + 1);
  pts.push_back(0.0);
  for (std::int64_t j = 1; j < cells; ++j) {
    double raw = (static_cast<double>(j) + jitter(rng)) * std::ldexp(1.0, q - level);
    std::int64_t m = std::llround(raw);
    m = std::clamp<std::int64_t>(m, 1, (std::int64_t{1} << q) - 1);
    pts.push_back(std::ldexp(static_cast<double>(m), -q));
  }
  pts.push_back(1.0);
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  ProbePolygon out;
  out.pts = pts;
  out.poly = poly_from_partition(gamma, Partition(pts));
  return out;
}

/// Refinement that inserts midpoints only where the inserted triangle has
/// the requested orientation. This deliberately breaks cancellation
/// between forward and backward passes over the same image, which a
/// plain dyadic refinement cannot see.
ProbePolygon biased_probe(const CurveSource& gamma, int level, int sign, int rounds,
                          std::int64_t eval_cap) {
  int base = std::max(0, level - 2);
  std::int64_t cells = std::int64_t{1} << base;
  std::vector<double> pts(cells + 1);
  for (std::int64_t j = 0; j <= cells; ++j) pts[j] = std::ldexp(static_cast<double>(j), -base);
  std::vector<Eigen::VectorXd> vals(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) vals[i] = gamma.at(pts[i]);

  int exponent = base;
  for (int r = 0; r < rounds; ++r) {
    if (exponent + 1 > gamma.max_param_exponent()) break;
    if (static_cast<std::int64_t>(pts.size()) * 2 > eval_cap) break;
    std::vector<double> npts;
    std::vector<Eigen::VectorXd> nvals;
    npts.reserve(pts.size() * 2);
    nvals.reserve(pts.size() * 2);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      npts.push_back(pts[i]);
      nvals.push_back(vals[i]);
      double mid = 0.5 * (pts[i] + pts[i + 1]);
      Eigen::VectorXd vm = gamma.at(mid);
      double delta = 0.5 * (segment_cross(vals[i], vm) + segment_cross(vm, vals[i + 1]) -
                            segment_cross(vals[i], vals[i + 1]));
      if (sign * delta > 0) {
        npts.push_back(mid);
        nvals.push_back(vm);
      }
    }
    npts.push_back(pts.back());
    nvals.push_back(vals.back());
    pts.swap(npts);
    vals.swap(nvals);
    ++exponent;
  }
  ProbePolygon out;
  out.pts = pts;
  out.poly.vertices = std::move(vals);
  out.poly.knots = pts;
  return out;
}

std::vector<double> probe_areas(const CurveSource& gamma, int level, const AreaConfig& cfg) {
  std::vector<double> out;
  for (int s = 0; s < cfg.jitter_probes; ++s) {
    out.push_back(signed_area(jittered_probe(gamma, level, cfg.seed + 0x100 * s + level).poly));
  }
  out.push_back(signed_area(biased_probe(gamma, level, +1, cfg.bias_rounds, cfg.eval_cap).poly));
  out.push_back(signed_area(biased_probe(gamma, level, -1, cfg.bias_rounds, cfg.eval_cap).poly));
  for (const auto& pts : gamma.stress_partitions(level)) {
    if (static_cast<std::int64_t>(pts.size()) > cfg.eval_cap) continue;
    out.push_back(signed_area(poly_from_partition(gamma, Partition(pts))));
  }
  return out;
}

}  // namespace

ConvergenceReport estimate_area(const CurveSource& gamma, const AreaConfig& cfg) {
  require_even_dim(gamma.dim(), "estimate_area");
  ConvergenceReport rep;
  rep.tolerance = cfg.tolerance;

  std::vector<double> values;
  bool capped = false;
  for (int i = 0; i <= cfg.level_cap; ++i) {
    std::int64_t n = (std::int64_t{1} << i) + 1;
    if (n > cfg.eval_cap) {
      capped = true;
      rep.note = "level cap reached before convergence";
      break;
    }
    double a = signed_area(dyadic_approx(gamma, i, cfg.eval_cap));
    values.push_back(a);
    rep.terms.push_back({static_cast<double>(i), a});
    if (values.size() >= 2) rep.increments.push_back(values.back() - values[values.size() - 2]);

    bool settled = static_cast<int>(values.size()) > cfg.min_levels &&
                   std::abs(rep.increments[rep.increments.size() - 1]) <= cfg.tolerance / 2 &&
                   std::abs(rep.increments[rep.increments.size() - 2]) <= cfg.tolerance / 2;
    if (!settled && i < cfg.level_cap) continue;

    rep.probe_values = probe_areas(gamma, i, cfg);
    double gap = 0.0;
    for (double p : rep.probe_values) gap = std::max(gap, std::abs(p - a));
    if (settled && gap <= cfg.tolerance) {
      rep.verdict = ConvergenceReport::Verdict::converged;
      rep.limit = a;
      rep.tail_bound = std::abs(rep.increments.back());
      return rep;
    }
    if (i == cfg.level_cap || gap > 10 * cfg.tolerance) {
      // dyadic sequence and probe family disagree persistently
      if (settled && gap > 10 * cfg.tolerance) {
        rep.verdict = ConvergenceReport::Verdict::diverging;
        rep.note = "dyadic values settled but probe partitions disagree";
        return rep;
      }
    }
  }

  if (!rep.terms.empty() && rep.probe_values.empty()) {
    rep.probe_values = probe_areas(gamma, static_cast<int>(rep.terms.back().level), cfg);
  }
  if (!rep.terms.empty() && !rep.probe_values.empty()) {
    double a = rep.terms.back().value;
    double gap = 0.0;
    for (double p : rep.probe_values) gap = std::max(gap, std::abs(p - a));
    bool tail_small =
        rep.increments.size() >= 2 &&
        std::abs(rep.increments[rep.increments.size() - 1]) <= cfg.tolerance / 2 &&
        std::abs(rep.increments[rep.increments.size() - 2]) <= cfg.tolerance / 2;
    if (tail_small && gap > 10 * cfg.tolerance) {
      rep.verdict = ConvergenceReport::Verdict::diverging;
      rep.note = "dyadic values settled but probe partitions disagree";
      return rep;
    }
    // growing dyadic oscillation is divergence too
    if (rep.increments.size() >= 3) {
      std::size_t m = rep.increments.size();
      double i0 = std::abs(rep.increments[m - 3]);
      double i1 = std::abs(rep.increments[m - 2]);
      double i2 = std::abs(rep.increments[m - 1]);
      if (i2 > 10 * cfg.tolerance && i2 >= i1 && i1 >= i0 && i0 > 0) {
        rep.verdict = ConvergenceReport::Verdict::diverging;
        rep.note = "dyadic increments growing";
        return rep;
      }
    }
  }
  rep.verdict = ConvergenceReport::Verdict::inconclusive;
  if (rep.note.empty() && capped) rep.note = "level cap reached before convergence";
  return rep;
}

GridAreaResult area_from_grid(const ApproxGrid& grid, double tolerance) {
  grid.validate();
  require_even_dim(static_cast<int>(grid.levels[0][0].size()), "area_from_grid");
  GridAreaResult out;
  out.report.tolerance = tolerance;
  out.report.note = "grid data: dyadic-level evidence only";

  std::vector<double> values;
  for (std::size_t i = 0; i < grid.levels.size(); ++i) {
    PolyCurve h;
    h.vertices = grid.levels[i];
    double a = signed_area(close_curve(h));
    values.push_back(a);
    out.report.terms.push_back({static_cast<double>(i), a});
    if (i > 0) out.report.increments.push_back(values[i] - values[i - 1]);
  }

  Accumulator sig;
  for (std::size_t i = 0; i + 1 < grid.levels.size(); ++i) {
    const auto& cur = grid.levels[i];
    const auto& nxt = grid.levels[i + 1];
    std::int64_t cells = std::int64_t{1} << i;
    for (std::int64_t j = 0; j < cells; ++j) {
      const Eigen::VectorXd* pts[5] = {&cur[j], &cur[j + 1], &nxt[2 * j], &nxt[2 * j + 1],
                                       &nxt[2 * j + 2]};
      double d = 0.0;
      for (int u = 0; u < 5; ++u) {
        for (int v = u + 1; v < 5; ++v) d = std::max(d, (*pts[u] - *pts[v]).norm());
      }
      sig.add(d * d);
    }
  }
  out.sigma = sig.total();

  if (out.report.increments.size() >= 2 &&
      std::abs(out.report.increments.back()) <= tolerance &&
      std::abs(out.report.increments[out.report.increments.size() - 2]) <= tolerance) {
    out.report.verdict = ConvergenceReport::Verdict::converged;
    out.report.limit = values.back();
    out.report.tail_bound = std::abs(out.report.increments.back());
  }
  return out;
}

double sq_variation(const CurveSource& gamma, const Partition& p) {
  const auto& pts = p.points();
  Accumulator acc;
  Eigen::VectorXd prev = gamma.at(pts[0]);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    Eigen::VectorXd cur = gamma.at(pts[i]);
    acc.add((cur - prev).squaredNorm());
    prev = std::move(cur);
  }
  return acc.total();
}

namespace {

double point_segment_dist(const Eigen::Vector2d& z, const Eigen::Vector2d& p,
                          const Eigen::Vector2d& q) {
  Eigen::Vector2d d = q - p;
  double len2 = d.squaredNorm();
  if (len2 == 0.0) return (z - p).norm();
  double t = std::clamp((z - p).dot(d) / len2, 0.0, 1.0);
  return (z - (p + t * d)).norm();
}

}  // namespace

int winding(const PolyCurve& c, const Eigen::Vector2d& z) {
  c.validate();
  if (c.dim() != 2) throw std::invalid_argument("winding: planar curves only");
  if (!c.closed()) throw std::invalid_argument("winding: curve must be closed");

  Eigen::Vector2d lo = c.vertices.front().head<2>(), hi = lo;
  for (const auto& v : c.vertices) {
    lo = lo.cwiseMin(v.head<2>());
    hi = hi.cwiseMax(v.head<2>());
  }
  double tol = 1e-12 * std::max((hi - lo).norm(), 1e-300);

  int wn = 0;
  for (std::size_t i = 0; i + 1 < c.vertices.size(); ++i) {
    Eigen::Vector2d p = c.vertices[i].head<2>();
    Eigen::Vector2d q = c.vertices[i + 1].head<2>();
    if (point_segment_dist(z, p, q) <= tol) {
      throw OnBoundaryError("winding: point lies on the curve");
    }
    double is_left = cross_term(q.x() - p.x(), q.y() - p.y(), z.x() - p.x(), z.y() - p.y());
    if (p.y() <= z.y()) {
      if (q.y() > z.y() && is_left > 0) ++wn;
    } else {
      if (q.y() <= z.y() && is_left < 0) --wn;
    }
  }
  return wn;
}

double winding_integral(const PolyCurve& c, double grid_step, int workers) {
  c.validate();
  if (c.dim() != 2) throw std::invalid_argument("winding_integral: planar curves only");
  if (!(grid_step > 0)) throw std::invalid_argument("winding_integral: grid_step > 0");
  PolyCurve cc = close_curve(c);

  Eigen::Vector2d lo = cc.vertices.front().head<2>(), hi = lo;
  for (const auto& v : cc.vertices) {
    lo = lo.cwiseMin(v.head<2>());
    hi = hi.cwiseMax(v.head<2>());
  }
  std::int64_t nx = std::max<std::int64_t>(1, std::llround(std::ceil((hi.x() - lo.x()) / grid_step)));
  std::int64_t ny = std::max<std::int64_t>(1, std::llround(std::ceil((hi.y() - lo.y()) / grid_step)));

  const double h2 = grid_step / 2;
  // deterministic sub-cell fallbacks for midpoints that land on the curve
  const Eigen::Vector2d shifts[4] = {{0.0, 0.0}, {h2 * 0.5, h2 * 0.25}, {-h2 * 0.25, h2 * 0.5},
                                     {h2 * 0.125, -h2 * 0.375}};

  std::vector<double> rows = parallel_map(static_cast<std::size_t>(ny), workers, [&](std::size_t iy) {
    std::vector<double> row(nx);
    for (std::int64_t ix = 0; ix < nx; ++ix) {
      Eigen::Vector2d z(lo.x() + (ix + 0.5) * grid_step, lo.y() + (iy + 0.5) * grid_step);
      int wn = 0;
      for (const auto& s : shifts) {
        try {
          wn = winding(cc, z + s);
          break;
        } catch (const OnBoundaryError&) {
          wn = 0;
        }
      }
      row[ix] = wn;
    }
    return pairwise_sum(row);
  });
  return pairwise_sum(rows) * grid_step * grid_step;
}

std::unique_ptr<CurveSource> make_builtin_curve(const std::string& name) {
  using std::numbers::pi;
  if (name == "circle") {
    return std::make_unique<FunctionCurve>(
        2,
        [](double t) {
          return Eigen::Vector2d(std::cos(2 * pi * t), std::sin(2 * pi * t));
        },
        2 * pi);
  }
  if (name == "ellipse") {
    return std::make_unique<FunctionCurve>(
        2,
        [](double t) {
          return Eigen::Vector2d(1.25 * std::cos(2 * pi * t), 0.75 * std::sin(2 * pi * t));
        },
        2.5 * pi);
  }
  if (name == "lissajous") {
    return std::make_unique<FunctionCurve>(
        2,
        [](double t) {
          return Eigen::Vector2d(std::cos(2 * pi * t), std::sin(4 * pi * t));
        },
        4 * pi);
  }
  if (name == "line") {
    PlCurve pl;
    pl.knots = {Dyadic(), Dyadic::from_int(1)};
    pl.values = {Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0)};
    return std::make_unique<PlCurveSource>(std::move(pl), 1.0);
  }
  if (name == "constant") {
    PlCurve pl;
    pl.knots = {Dyadic(), Dyadic::from_int(1)};
    pl.values = {Eigen::Vector2d(0, 0), Eigen::Vector2d(0, 0)};
    return std::make_unique<PlCurveSource>(std::move(pl), 0.0);
  }
  throw std::invalid_argument("unknown builtin curve: " + name);
}

}  // namespace heis
