#include "heislab/fields.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <unordered_map>

#include "heislab/reduce.hpp"

namespace heis {

namespace {

Eigen::MatrixXd read_matrix(const std::vector<double>& params, int dim) {
  if (static_cast<int>(params.size()) != dim * dim) {
    throw std::invalid_argument("linear field: expected " + std::to_string(dim * dim) +
                                " row-major entries");
  }
  Eigen::MatrixXd A(dim, dim);
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) A(r, c) = params[r * dim + c];
  }
  return A;
}

}  // namespace

MapField make_field(const std::string& name, const std::vector<double>& params, int n) {
  if (n < 1) throw std::invalid_argument("make_field: n >= 1");
  const int dim = 2 * n;
  MapField f;
  f.n = n;

  if (name == "projection") {
    f.eval = [](const HeisPoint& p) { return p.h; };
    f.hgrad = [dim](const HeisPoint&) { return Eigen::MatrixXd::Identity(dim, dim); };
    return f;
  }
  if (name == "linear") {
    Eigen::MatrixXd A = read_matrix(params, dim);
    f.eval = [A](const HeisPoint& p) -> Eigen::VectorXd { return A * p.h; };
    f.hgrad = [A](const HeisPoint&) { return A; };
    return f;
  }
  if (name == "translated") {
    if (static_cast<int>(params.size()) != dim) {
      throw std::invalid_argument("translated field: expected 2n horizontal coordinates");
    }
    Eigen::VectorXd q = Eigen::Map<const Eigen::VectorXd>(params.data(), dim);
    f.eval = [q](const HeisPoint& p) -> Eigen::VectorXd { return p.h - q; };
    f.hgrad = [dim](const HeisPoint&) { return Eigen::MatrixXd::Identity(dim, dim); };
    return f;
  }
  if (name == "scale") {
    if (params.size() != 1) throw std::invalid_argument("scale field: expected one parameter");
    double s = params[0];
    f.eval = [s](const HeisPoint& p) -> Eigen::VectorXd { return s * p.h; };
    f.hgrad = [s, dim](const HeisPoint&) -> Eigen::MatrixXd {
      return s * Eigen::MatrixXd::Identity(dim, dim);
    };
    return f;
  }
  if (name == "shear") {
    if (n != 1 || params.size() != 1) throw std::invalid_argument("shear field: n=1, one parameter");
    double a = params[0];
    f.eval = [a](const HeisPoint& p) {
      return Eigen::Vector2d(p.h[0] + a * p.z * p.z, p.h[1]);
    };
    f.hgrad = [a](const HeisPoint& p) {
      Eigen::Matrix2d J;
      J << 1.0 - a * p.z * p.h[1], a * p.z * p.h[0], 0.0, 1.0;
      return J;
    };
    return f;
  }
  if (name == "parabolic") {
    if (n != 1 || params.size() != 2) {
      throw std::invalid_argument("parabolic field: n=1, two parameters");
    }
    double a = params[0], b = params[1];
    f.eval = [a, b](const HeisPoint& p) {
      return Eigen::Vector2d(p.h[0] + a * p.z * p.z, p.h[1] + b * p.z);
    };
    f.hgrad = [a, b](const HeisPoint& p) {
      Eigen::Matrix2d J;
      J << 1.0 - a * p.z * p.h[1], a * p.z * p.h[0],
          -b * p.h[1] / 2, 1.0 + b * p.h[0] / 2;
      return J;
    };
    return f;
  }
  if (name == "tilt") {
    if (n != 1 || params.size() != 1) throw std::invalid_argument("tilt field: n=1, one parameter");
    double c = params[0];
    f.eval = [c](const HeisPoint& p) { return Eigen::Vector2d(p.h[0] + c * p.z, p.h[1]); };
    f.hgrad = [c](const HeisPoint& p) {
      Eigen::Matrix2d J;
      J << 1.0 - c * p.h[1] / 2, c * p.h[0] / 2, 0.0, 1.0;
      return J;
    };
    return f;
  }
  if (name == "degenerate") {
    // collapses the second component; J_H vanishes identically
    if (n != 1) throw std::invalid_argument("degenerate field: n=1 only");
    f.eval = [](const HeisPoint& p) { return Eigen::Vector2d(p.h[0], 0.0); };
    f.hgrad = [](const HeisPoint&) {
      Eigen::Matrix2d J;
      J << 1.0, 0.0, 0.0, 0.0;
      return J;
    };
    return f;
  }
  throw std::invalid_argument("unknown field: " + name);
}

Eigen::MatrixXd horizontal_jacobian(const MapField& f, const HeisPoint& p) {
  const int dim = 2 * f.n;
  if (p.n() != f.n) throw std::invalid_argument("horizontal_jacobian: group index mismatch");
  if (f.hgrad) {
    Eigen::MatrixXd J = f.hgrad(p);
    if (!J.allFinite()) throw std::runtime_error("horizontal_jacobian: non-finite derivative");
    return J;
  }
  double h = f.fd_step * std::max(1.0, kor_norm(p));
  Eigen::MatrixXd J(dim, dim);
  for (int i = 0; i < dim; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
    e[i] = h;
    Eigen::VectorXd fp = f.eval(mul(p, horizontal_point(e)));
    Eigen::VectorXd fm = f.eval(mul(p, horizontal_point(-e)));
    J.col(i) = (fp - fm) / (2 * h);
  }
  if (!J.allFinite()) throw std::runtime_error("horizontal_jacobian: non-finite derivative");
  return J;
}

double jh(const MapField& f, const HeisPoint& p) { return horizontal_jacobian(f, p).determinant(); }

std::vector<HeisPoint> sample_ball(const Ball& b, std::size_t count, std::uint64_t seed) {
  if (!(b.radius > 0)) throw std::invalid_argument("sample_ball: radius > 0");
  const int dim = 2 * b.center.n();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uh(-1.0, 1.0);
  std::uniform_real_distribution<double> uz(-0.25, 0.25);
  std::vector<HeisPoint> out;
  out.reserve(count);
  Eigen::VectorXd v(dim);
  while (out.size() < count) {
    for (int i = 0; i < dim; ++i) v[i] = uh(rng);
    double z = uz(rng);
    double r2 = v.squaredNorm();
    if (r2 >= 1.0) continue;
    // gauge profile of the unit ball: |z| < sqrt(1 - |v|^4) / 4
    if (16 * z * z >= 1.0 - r2 * r2) continue;
    out.push_back(mul(b.center, dilate(b.radius, HeisPoint(v, z))));
  }
  return out;
}

AffineFit affine_fit(const MapField& f, const Ball& D, std::size_t samples, std::uint64_t seed) {
  const int dim = 2 * f.n;
  if (samples < static_cast<std::size_t>(dim + 2)) {
    throw std::invalid_argument("affine_fit: sample budget below the affine dimension");
  }
  std::vector<HeisPoint> pts = sample_ball(D, samples, seed);

  Eigen::MatrixXd X(samples, dim + 1);
  Eigen::MatrixXd Y(samples, dim);
  for (std::size_t i = 0; i < samples; ++i) {
    X.row(i).head(dim) = pts[i].h.transpose();
    X(i, dim) = 1.0;
    Y.row(i) = f.eval(pts[i]).transpose();
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < dim + 1) {
    throw DegenerateSamplesError("affine_fit: rank-deficient sample matrix");
  }
  Eigen::MatrixXd coef = qr.solve(Y);  // (dim+1) x dim

  AffineFit fit;
  fit.M = coef.topRows(dim).transpose();
  fit.b = coef.row(dim).transpose();
  double rss = (X * coef - Y).squaredNorm();
  fit.residual = std::sqrt(rss / static_cast<double>(samples)) / D.radius;
  return fit;
}

double beta_number(const MapField& f, const Ball& D, std::size_t samples, std::uint64_t seed) {
  return affine_fit(f, D, samples, seed).residual;
}

BilipReport bilip_check(const MapField& f, const Ball& D, double c, std::size_t samples,
                        std::uint64_t seed) {
  BilipReport rep;
  Ball wide{D.center, 5 * D.radius};
  std::vector<HeisPoint> probes = sample_ball(wide, std::max<std::size_t>(samples / 4, 64),
                                              seed ^ 0x5bd1e995);
  const int dim = 2 * f.n;
  Eigen::MatrixXd id = Eigen::MatrixXd::Identity(dim, dim);
  double dev = 0.0;
  for (const auto& p : probes) {
    Eigen::MatrixXd J = horizontal_jacobian(f, p);
    dev = std::max(dev, (J - id).operatorNorm());
  }
  rep.max_deviation = dev;
  rep.hypothesis_met = dev < c;
  if (!rep.hypothesis_met) return rep;

  AffineFit fit = affine_fit(f, D, samples, seed);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(fit.M);
  rep.sigma_min = svd.singularValues().minCoeff();
  rep.sigma_max = svd.singularValues().maxCoeff();
  rep.within = rep.sigma_min >= 0.5 && rep.sigma_max <= 2.0;
  return rep;
}

CoordBox CoordBox::unit(int n) {
  CoordBox b;
  b.h_lo = Eigen::VectorXd::Zero(2 * n);
  b.h_hi = Eigen::VectorXd::Ones(2 * n);
  b.z_lo = 0.0;
  b.z_hi = 1.0;
  return b;
}

bool CoordBox::contains_h(const Eigen::VectorXd& h) const {
  return (h.array() >= h_lo.array()).all() && (h.array() <= h_hi.array()).all();
}

bool CoordBox::contains(const HeisPoint& p) const {
  return contains_h(p.h) && p.z >= z_lo && p.z <= z_hi;
}

double CoordBox::volume() const {
  double v = z_hi - z_lo;
  for (Eigen::Index i = 0; i < h_lo.size(); ++i) v *= h_hi[i] - h_lo[i];
  return v;
}

namespace {

// hash grid over coordinates with cells of size `cell` (horizontal and
// vertical alike); neighbors within a Koranyi radius <= cell are found in
// a bounded cell neighborhood because box coordinates are bounded
struct HashGrid {
  double cell;
  std::unordered_map<std::uint64_t, std::vector<int>> cells;

  static std::uint64_t key(std::int64_t a, std::int64_t b, std::int64_t c) {
    std::uint64_t h = 1469598103934665603ull;
    for (std::int64_t v : {a, b, c}) {
      h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
  }

  std::uint64_t key_of(const HeisPoint& p) const {
    auto fx = static_cast<std::int64_t>(std::floor(p.h[0] / cell));
    auto fy = static_cast<std::int64_t>(std::floor(p.h[1] / cell));
    auto fz = static_cast<std::int64_t>(std::floor(p.z / cell));
    return key(fx, fy, fz);
  }
};

}  // namespace

NetFamily::NetFamily(const CoordBox& box, int min_level, int max_level, std::int64_t lattice_cap)
    : box_(box), min_level_(min_level), max_level_(max_level) {
  if (box.h_lo.size() != 2) {
    throw std::invalid_argument("NetFamily: implemented for n=1 working boxes");
  }
  if (min_level > max_level) throw std::invalid_argument("NetFamily: bad level range");
  levels_.resize(max_level - min_level + 1);

  for (int lvl = min_level; lvl <= max_level; ++lvl) {
    double r = std::ldexp(1.0, -lvl);
    // reference lattice: half-separation horizontally, r^2/8 vertically
    double hx = r / 2, hz = r * r / 8;
    auto count_along = [](double lo, double hi, double step) {
      return static_cast<std::int64_t>(std::floor((hi - lo) / step)) + 1;
    };
    std::int64_t nx = count_along(box.h_lo[0], box.h_hi[0], hx);
    std::int64_t ny = count_along(box.h_lo[1], box.h_hi[1], hx);
    std::int64_t nz = count_along(box.z_lo, box.z_hi, hz);
    if (nx * ny * nz > lattice_cap) {
      throw ResourceLimitError("NetFamily: level " + std::to_string(lvl) +
                               " lattice exceeds the cap");
    }

    std::vector<HeisPoint>& net = levels_[lvl - min_level];
    HashGrid grid{r, {}};
    double max_h = std::max({std::abs(box.h_lo[0]), std::abs(box.h_hi[0]),
                             std::abs(box.h_lo[1]), std::abs(box.h_hi[1])});
    // Koranyi r-ball in coordinates: |dh| <= r, |dz| <= r^2/4 + max_h r
    int zreach = static_cast<int>(std::ceil((r * r / 4 + max_h * r) / r)) + 1;

    for (std::int64_t ix = 0; ix < nx; ++ix) {
      for (std::int64_t iy = 0; iy < ny; ++iy) {
        for (std::int64_t iz = 0; iz < nz; ++iz) {
          Eigen::Vector2d h(box.h_lo[0] + ix * hx, box.h_lo[1] + iy * hx);
          HeisPoint cand(h, box.z_lo + iz * hz);
          auto cx = static_cast<std::int64_t>(std::floor(cand.h[0] / r));
          auto cy = static_cast<std::int64_t>(std::floor(cand.h[1] / r));
          auto cz = static_cast<std::int64_t>(std::floor(cand.z / r));
          bool separated = true;
          for (std::int64_t dx = -1; dx <= 1 && separated; ++dx) {
            for (std::int64_t dy = -1; dy <= 1 && separated; ++dy) {
              for (std::int64_t dz = -zreach; dz <= zreach && separated; ++dz) {
                auto it = grid.cells.find(HashGrid::key(cx + dx, cy + dy, cz + dz));
                if (it == grid.cells.end()) continue;
                for (int idx : it->second) {
                  if (kor_dist(net[idx], cand) <= r) {
                    separated = false;
                    break;
                  }
                }
              }
            }
          }
          if (separated) {
            grid.cells[grid.key_of(cand)].push_back(static_cast<int>(net.size()));
            net.push_back(cand);
          }
        }
      }
    }
  }
}

const std::vector<HeisPoint>& NetFamily::level(int i) const {
  if (i < min_level_ || i > max_level_) {
    throw std::invalid_argument("NetFamily: level " + std::to_string(i) + " not built");
  }
  return levels_[i - min_level_];
}

double t_sum(const std::vector<HeisPoint>& gamma_samples, const MapField& f,
             const NetFamily& nets, double A, const TSumConfig& cfg) {
  if (gamma_samples.empty()) throw std::invalid_argument("t_sum: empty sample set");
  double diam = 0.0;
  for (std::size_t a = 0; a < gamma_samples.size(); ++a) {
    for (std::size_t b = a + 1; b < gamma_samples.size(); ++b) {
      diam = std::max(diam, kor_dist(gamma_samples[a], gamma_samples[b]));
    }
  }
  if (diam == 0.0) return 0.0;

  int i_min = -static_cast<int>(std::floor(std::log2(diam)));
  if (i_min > cfg.depth) return 0.0;
  if (i_min < nets.min_level()) {
    throw std::invalid_argument("t_sum: net family misses level " + std::to_string(i_min));
  }

  Accumulator acc;
  for (int i = std::max(i_min, nets.min_level()); i <= cfg.depth; ++i) {
    double r = std::ldexp(1.0, -i);
    const auto& net = nets.level(i);
    for (std::size_t q = 0; q < net.size(); ++q) {
      bool meets = false;
      for (const auto& g : gamma_samples) {
        if (kor_dist(net[q], g) < r) {
          meets = true;
          break;
        }
      }
      if (!meets) continue;
      std::uint64_t seed = cfg.seed ^ (static_cast<std::uint64_t>(i + 64) << 32) ^ q;
      double beta = beta_number(f, Ball{net[q], A * r}, cfg.beta_samples, seed);
      acc.add(r * r * beta * beta);
    }
  }
  return acc.total();
}

namespace {

// damped Newton in the horizontal coordinates at fixed z
HeisPoint correct(const MapField& f, const Eigen::VectorXd& w, HeisPoint p,
                  const TraceConfig& cfg, int* iterations) {
  double res = (f.eval(p) - w).norm();
  int it = 0;
  while (res > cfg.corrector_tol) {
    if (++it > cfg.max_newton) {
      throw TraceError("corrector diverged (residual " + std::to_string(res) + ")", p);
    }
    Eigen::MatrixXd J = horizontal_jacobian(f, p);
    if (std::abs(J.determinant()) < cfg.jh_min) {
      throw TraceError("horizontal Jacobian below threshold", p);
    }
    Eigen::VectorXd delta = J.partialPivLu().solve(w - f.eval(p));
    double scale = 1.0;
    HeisPoint best = p;
    double best_res = res;
    for (int damp = 0; damp < 5; ++damp) {
      HeisPoint trial(p.h + scale * delta, p.z);
      double tr = (f.eval(trial) - w).norm();
      if (tr < best_res) {
        best = trial;
        best_res = tr;
        break;
      }
      scale *= 0.5;
    }
    if (best_res >= res) {
      throw TraceError("corrector stalled (residual " + std::to_string(res) + ")", p);
    }
    p = best;
    res = best_res;
  }
  if (iterations) *iterations = it;
  return p;
}

}  // namespace

VerticalCurveSamples trace_fiber(const MapField& f, const Eigen::VectorXd& w,
                                 const HeisPoint& seed, const CoordBox& box,
                                 const TraceConfig& cfg) {
  if (seed.n() != f.n) throw std::invalid_argument("trace_fiber: group index mismatch");
  HeisPoint start = seed;
  start.z = std::clamp(start.z, box.z_lo, box.z_hi);
  start = correct(f, w, start, cfg, nullptr);
  if (!box.contains_h(start.h)) {
    throw TraceError("seed corrected outside the working box", start);
  }

  auto march = [&](int dir) {
    std::vector<HeisPoint> out;
    HeisPoint p = start;
    double step = cfg.step;
    while (static_cast<std::int64_t>(out.size()) < cfg.max_samples) {
      double zb = dir > 0 ? box.z_hi : box.z_lo;
      if (p.z == zb) break;
      double dz = dir * step;
      bool final = false;
      double znext = p.z + dz;
      if ((dir > 0 && znext >= zb) || (dir < 0 && znext <= zb)) {
        znext = zb;
        final = true;
      }
      int iters = 0;
      HeisPoint next;
      try {
        next = correct(f, w, HeisPoint(p.h, znext), cfg, &iters);
      } catch (const TraceError&) {
        if (step <= cfg.min_step) throw;
        step = std::max(cfg.min_step, step / 2);
        continue;
      }
      if (!box.contains_h(next.h)) {
        if (step <= cfg.min_step) break;  // boundary located to min_step accuracy
        step = std::max(cfg.min_step, step / 2);
        continue;
      }
      out.push_back(next);
      p = next;
      if (final) break;
      if (iters <= 2) {
        step = std::min(cfg.max_step, step * 1.25);
      } else if (iters > 3) {
        step = std::max(cfg.min_step, step / 2);
      }
    }
    return out;
  };

  std::vector<HeisPoint> down = march(-1);
  std::vector<HeisPoint> up = march(+1);

  VerticalCurveSamples s;
  s.lambda = cfg.lambda;
  s.pts.reserve(down.size() + up.size() + 1);
  for (auto it = down.rbegin(); it != down.rend(); ++it) s.pts.push_back(*it);
  s.pts.push_back(start);
  for (const auto& p : up) s.pts.push_back(p);

  if (s.pts.size() < 2) {
    throw TraceError("trace produced fewer than 2 samples", start);
  }
  // z is the continuation parameter; normalize knots by it
  double z0 = s.pts.front().z, z1 = s.pts.back().z;
  if (!(z1 > z0)) throw TraceError("trace did not advance vertically", start);
  s.knots.resize(s.pts.size());
  for (std::size_t i = 0; i < s.pts.size(); ++i) s.knots[i] = (s.pts[i].z - z0) / (z1 - z0);
  s.knots.front() = 0.0;
  s.knots.back() = 1.0;

  auto chk = check_vertical(s, s.pts.size() <= 512);
  if (!chk.ok) {
    throw TraceError("traced samples failed the vertical-curve check: " + chk.reason,
                     s.pts.back());
  }
  return s;
}

}  // namespace heis
