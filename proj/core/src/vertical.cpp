#include "heislab/vertical.hpp"

#include <algorithm>
#include <cmath>

#include "heislab/reduce.hpp"

namespace heis {

namespace {

double sample_diam(const VerticalCurveSamples& s, int lo, int hi) {
  double d = 0.0;
  for (int a = lo; a <= hi; ++a) {
    for (int b = a + 1; b <= hi; ++b) d = std::max(d, kor_dist(s.pts[a], s.pts[b]));
  }
  return d;
}

Eigen::VectorXd projection_at(const VerticalCurveSamples& s, double t) {
  // PL interpolation of the projected samples in the knot parameter
  std::size_t n = s.size();
  if (t <= s.knot(0)) return s.pts.front().h;
  if (t >= s.knot(n - 1)) return s.pts.back().h;
  std::size_t lo = 0, hi = n - 1;
  while (hi - lo > 1) {
    std::size_t mid = (lo + hi) / 2;
    if (s.knot(mid) <= t) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double den = s.knot(hi) - s.knot(lo);
  double u = den > 0 ? (t - s.knot(lo)) / den : 0.0;
  return s.pts[lo].h + u * (s.pts[hi].h - s.pts[lo].h);
}

}  // namespace

VerticalCheck check_vertical(const VerticalCurveSamples& s, bool pairwise) {
  VerticalCheck out;
  if (s.size() < 2) {
    out.ok = false;
    out.reason = "need at least 2 samples";
    return out;
  }
  VConeSpec cone(s.lambda);
  auto fail = [&](std::ptrdiff_t a, std::ptrdiff_t b, const std::string& why) {
    out.ok = false;
    out.first = a;
    out.second = b;
    out.reason = why;
  };
  std::size_t n = s.size();
  if (pairwise) {
    for (std::size_t a = 0; a < n && out.ok; ++a) {
      for (std::size_t b = a + 1; b < n && out.ok; ++b) {
        if (!precedes(s.pts[a], s.pts[b])) {
          fail(a, b, "order violated");
        } else if (!in_vcone(s.pts[a], s.pts[b], cone)) {
          fail(a, b, "cone condition violated");
        }
      }
    }
  } else {
    for (std::size_t a = 0; a + 1 < n && out.ok; ++a) {
      if (!precedes(s.pts[a], s.pts[a + 1])) {
        fail(a, a + 1, "order violated");
      } else if (!in_vcone(s.pts[a], s.pts[a + 1], cone)) {
        fail(a, a + 1, "cone condition violated");
      }
    }
  }
  return out;
}

double height(const VerticalCurveSamples& s) {
  if (s.size() < 2) throw std::invalid_argument("height: need >= 2 samples");
  for (std::size_t a = 0; a + 1 < s.size(); ++a) {
    if (!precedes(s.pts[a], s.pts[a + 1])) {
      throw std::invalid_argument("height: samples not monotone at index " + std::to_string(a));
    }
  }
  return mul(inv(s.pts.front()), s.pts.back()).z;
}

Patchwork build_patchwork(const VerticalCurveSamples& s, double mu_cap) {
  if (s.size() < 2) throw PatchworkError("build_patchwork: need >= 2 samples");
  if (mu_cap < 2.0) throw PatchworkError("build_patchwork: mu_cap >= 2 required");

  Patchwork pw;
  int n = static_cast<int>(s.size());
  pw.diam_root = sample_diam(s, 0, n - 1);
  if (!(pw.diam_root > 0)) throw PatchworkError("build_patchwork: zero diameter");

  pw.nodes.push_back({0, n - 1, 0, pw.diam_root, {}});
  pw.generations.push_back({0});

  const int max_gen = 40;
  for (int gen = 0; gen < max_gen; ++gen) {
    double window_hi = mu_cap * std::ldexp(pw.diam_root, -(gen + 1));
    double window_lo = std::ldexp(pw.diam_root, -(gen + 1)) / mu_cap;
    std::vector<std::pair<int, std::vector<Patchwork::Node>>> staged;
    bool feasible = true;

    for (int id : pw.generations[gen]) {
      const auto node = pw.nodes[id];
      std::vector<Patchwork::Node> kids;
      if (node.diam <= window_hi) {
        // undersized for a split; carry down as a chain
        if (node.diam < window_lo) {
          feasible = false;
          break;
        }
        kids.push_back({node.lo, node.hi, gen + 1, node.diam, {}});
      } else {
        // split: cut whenever the running diameter reaches half the node
        // diameter
        double half = 0.5 * node.diam;
        int start = node.lo;
        while (start < node.hi) {
          int end = start + 1;
          double d = kor_dist(s.pts[start], s.pts[end]);
          while (end < node.hi) {
            double dn = d;
            for (int a = start; a <= end; ++a) {
              dn = std::max(dn, kor_dist(s.pts[a], s.pts[end + 1]));
            }
            if (dn > half) break;
            d = dn;
            ++end;
          }
          kids.push_back({start, end, gen + 1, sample_diam(s, start, end), {}});
          start = end;
        }
        // a short trailing piece is merged back into its predecessor
        if (kids.size() >= 2 && kids.back().diam < window_lo) {
          auto tail = kids.back();
          kids.pop_back();
          auto& prev = kids.back();
          prev.hi = tail.hi;
          prev.diam = sample_diam(s, prev.lo, prev.hi);
        }
        for (const auto& kid : kids) {
          if (kid.diam > window_hi || kid.diam < window_lo) feasible = false;
        }
        if (static_cast<double>(kids.size()) > mu_cap) feasible = false;
      }
      if (!feasible) break;
      staged.emplace_back(id, std::move(kids));
    }

    if (!feasible) break;
    std::vector<int> next_gen;
    for (auto& [parent, kids] : staged) {
      for (auto& kid : kids) {
        int id = static_cast<int>(pw.nodes.size());
        pw.nodes.push_back(kid);
        pw.nodes[parent].children.push_back(id);
        next_gen.push_back(id);
      }
    }
    pw.generations.push_back(std::move(next_gen));
  }

  if (pw.depth() < 1) {
    throw PatchworkError("build_patchwork: could not satisfy the diameter window below node 0");
  }

  double mu = 2.0;
  for (const auto& node : pw.nodes) {
    double scale = std::ldexp(pw.diam_root, -node.gen);
    mu = std::max(mu, node.diam / scale);
    mu = std::max(mu, scale / node.diam);
    mu = std::max(mu, static_cast<double>(node.children.size()));
  }
  pw.mu = mu;
  return pw;
}

PatchworkCheck validate_patchwork(const VerticalCurveSamples& s, const Patchwork& pw,
                                  double mu_cap) {
  PatchworkCheck out;
  auto fail = [&](const std::string& why) {
    out.ok = false;
    out.reason = why;
  };
  if (pw.nodes.empty() || pw.generations.empty() || pw.generations[0].size() != 1) {
    fail("malformed tree");
    return out;
  }
  const auto& root = pw.nodes[pw.generations[0][0]];
  if (root.lo != 0 || root.hi != static_cast<int>(s.size()) - 1) {
    fail("root does not span the samples");
    return out;
  }

  double diam_root = sample_diam(s, root.lo, root.hi);
  double mu = 2.0;
  for (int gen = 0; gen < static_cast<int>(pw.generations.size()) && out.ok; ++gen) {
    for (int id : pw.generations[gen]) {
      const auto& v = pw.nodes[id];
      if (v.gen != gen) {
        fail("generation mismatch at node " + std::to_string(id));
        break;
      }
      if (v.lo >= v.hi) {
        fail("degenerate interval at node " + std::to_string(id));
        break;
      }
      double d = sample_diam(s, v.lo, v.hi);
      double scale = std::ldexp(diam_root, -gen);
      mu = std::max({mu, d / scale, scale / d});
      if (gen + 1 < static_cast<int>(pw.generations.size())) {
        if (v.children.empty()) {
          fail("interior node without children: " + std::to_string(id));
          break;
        }
        mu = std::max(mu, static_cast<double>(v.children.size()));
        int cursor = v.lo;
        for (int cid : v.children) {
          const auto& c = pw.nodes[cid];
          if (c.lo != cursor) {
            fail("children do not partition node " + std::to_string(id));
            break;
          }
          cursor = c.hi;
        }
        if (out.ok && cursor != v.hi) fail("children do not cover node " + std::to_string(id));
      }
      if (!out.ok) break;
    }
  }
  out.mu = mu;
  if (out.ok && mu > mu_cap) fail("measured mu " + std::to_string(mu) + " exceeds the cap");
  return out;
}

ApproxPoints approx_from_curve(const VerticalCurveSamples& s, const Patchwork& pw) {
  ApproxPoints out;
  out.pts.resize(pw.nodes.size());
  double c_max = 0.0;
  for (std::size_t id = 0; id < pw.nodes.size(); ++id) {
    const auto& v = pw.nodes[id];
    double m_v = 0.5 * (s.knot(v.lo) + s.knot(v.hi));
    // nearest sample to the parameter midpoint
    int best = v.lo;
    double bd = std::abs(s.knot(v.lo) - m_v);
    for (int i = v.lo + 1; i <= v.hi; ++i) {
      double d = std::abs(s.knot(i) - m_v);
      if (d < bd) {
        bd = d;
        best = i;
      }
    }
    out.pts[id] = s.pts[best].h;
    double dev = (out.pts[id] - projection_at(s, m_v)).norm();
    c_max = std::max(c_max, dev * std::ldexp(1.0, v.gen) / pw.diam_root);
  }
  out.C = c_max;
  return out;
}

PolyCurve g_curve(const VerticalCurveSamples& s, const Patchwork& pw, const ApproxPoints& ap,
                  int gen) {
  if (gen < 0 || gen > pw.depth()) throw std::invalid_argument("g_curve: bad generation");
  PolyCurve g;
  const auto& ids = pw.generations[gen];
  g.knots.push_back(0.0);
  g.vertices.push_back(ap.pts[ids.front()]);
  for (int id : ids) {
    const auto& v = pw.nodes[id];
    g.knots.push_back(0.5 * (s.knot(v.lo) + s.knot(v.hi)));
    g.vertices.push_back(ap.pts[id]);
  }
  g.knots.push_back(1.0);
  g.vertices.push_back(ap.pts[ids.back()]);
  return g;
}

namespace {

Eigen::VectorXd eval_poly(const PolyCurve& g, double t) {
  const auto& kn = g.knots;
  if (t <= kn.front()) return g.vertices.front();
  if (t >= kn.back()) return g.vertices.back();
  std::size_t lo = 0, hi = kn.size() - 1;
  while (hi - lo > 1) {
    std::size_t mid = (lo + hi) / 2;
    if (kn[mid] <= t) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double den = kn[hi] - kn[lo];
  double u = den > 0 ? (t - kn[lo]) / den : 0.0;
  return g.vertices[lo] + u * (g.vertices[hi] - g.vertices[lo]);
}

void collect_restriction(const PolyCurve& g, double a, double b,
                         std::vector<Eigen::VectorXd>& out) {
  out.push_back(eval_poly(g, a));
  for (std::size_t i = 0; i < g.knots.size(); ++i) {
    if (g.knots[i] > a && g.knots[i] < b) out.push_back(g.vertices[i]);
  }
  out.push_back(eval_poly(g, b));
}

}  // namespace

double sigma_patchwork(const VerticalCurveSamples& s, const Patchwork& pw,
                       const ApproxPoints& ap, int depth) {
  if (depth > pw.depth() - 1) throw std::invalid_argument("sigma_patchwork: depth beyond tree");
  Accumulator acc;
  for (int gen = 0; gen <= depth; ++gen) {
    PolyCurve gi = g_curve(s, pw, ap, gen);
    PolyCurve gj = g_curve(s, pw, ap, gen + 1);
    for (int id : pw.generations[gen]) {
      const auto& v = pw.nodes[id];
      double a = s.knot(v.lo), b = s.knot(v.hi);
      std::vector<Eigen::VectorXd> pts;
      collect_restriction(gi, a, b, pts);
      collect_restriction(gj, a, b, pts);
      double d = 0.0;
      for (std::size_t x = 0; x < pts.size(); ++x) {
        for (std::size_t y = x + 1; y < pts.size(); ++y) {
          d = std::max(d, (pts[x] - pts[y]).norm());
        }
      }
      acc.add(d * d);
    }
  }
  return acc.total();
}

FiberMeasure fiber_measure(const VerticalCurveSamples& s, const AreaConfig& cfg) {
  FiberMeasure out;
  auto chk = check_vertical(s, s.size() <= 1024);
  if (!chk.ok) {
    throw std::invalid_argument("fiber_measure: samples are not a vertical curve (" + chk.reason +
                                ")");
  }
  out.height = height(s);

  PolyCurve proj;
  proj.vertices.reserve(s.size());
  for (const auto& p : s.pts) proj.vertices.push_back(p.h);
  out.symplectic = signed_area(close_curve(proj));

  // re-derive the symplectic term through the generic estimator so the
  // convergence evidence is attached to the result
  PlCurve pl;
  pl.knots.reserve(s.size());
  pl.values.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    pl.knots.push_back(Dyadic::from_double(s.knot(i)));
    pl.values.push_back(s.pts[i].h);
  }
  PlCurveSource src(std::move(pl), std::nullopt);
  AreaConfig acfg = cfg;
  acfg.tolerance = std::max(cfg.tolerance, 1e-9 * (1.0 + std::abs(out.symplectic)));
  out.report = estimate_area(src, acfg);
  out.report.note = "open projection; the measure uses the exact closed polygon value";

  if (out.report.verdict == ConvergenceReport::Verdict::diverging) {
    out.defined = false;
    return out;
  }
  out.defined = true;
  out.measure = out.height - out.symplectic;
  return out;
}

ZIdentity discrete_z_identity(const std::vector<HeisPoint>& increments) {
  if (increments.empty()) throw std::invalid_argument("discrete_z_identity: need >= 1 increment");
  ZIdentity out;
  PolyCurve partial;
  HeisPoint w = increments.front();
  partial.vertices.push_back(w.h);
  Accumulator zsum;
  zsum.add(increments.front().z);
  for (std::size_t i = 1; i < increments.size(); ++i) {
    w = mul(w, increments[i]);
    partial.vertices.push_back(w.h);
    zsum.add(increments[i].z);
  }
  out.lhs = w.z;
  out.rhs = signed_area(partial) + zsum.total();
  return out;
}

BoxCountResult hausdorff2_boxcount(const VerticalCurveSamples& s,
                                   const std::vector<double>& scales) {
  if (s.size() < 2) throw std::invalid_argument("hausdorff2_boxcount: need >= 2 samples");
  if (scales.empty()) throw std::invalid_argument("hausdorff2_boxcount: need >= 1 scale");
  BoxCountResult out;
  int n = static_cast<int>(s.size());
  for (double scale : scales) {
    if (!(scale > 0)) throw std::invalid_argument("hausdorff2_boxcount: scales must be > 0");
    Accumulator acc;
    int start = 0;
    while (start < n - 1) {
      int end = start + 1;
      double d = kor_dist(s.pts[start], s.pts[end]);
      if (d > scale) {
        throw std::invalid_argument("hausdorff2_boxcount: insufficient sample density at scale " +
                                    std::to_string(scale));
      }
      while (end < n - 1) {
        double dn = kor_dist(s.pts[start], s.pts[end + 1]);
        if (dn > scale) break;
        d = dn;
        ++end;
      }
      acc.add(d * d);
      start = end;  // runs share their boundary sample
    }
    out.per_scale.emplace_back(scale, 0.25 * acc.total());
  }
  // linear extrapolation in the scale; intercept is the estimate
  if (out.per_scale.size() == 1) {
    out.estimate = out.per_scale[0].second;
    return out;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto& [x, y] : out.per_scale) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double m = out.per_scale.size();
  double det = m * sxx - sx * sx;
  if (std::abs(det) < 1e-30) {
    out.estimate = sy / m;
  } else {
    double slope = (m * sxy - sx * sy) / det;
    out.estimate = (sy - slope * sx) / m;
  }
  return out;
}

}  // namespace heis
