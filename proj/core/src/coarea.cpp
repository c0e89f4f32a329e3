#include "heislab/coarea.hpp"

#include <cmath>
#include <istream>
#include <sstream>

#include "heislab/reduce.hpp"

namespace heis {

namespace {

double quadrature_pass(const MapField& f, const CoordBox& box, int cells, int workers) {
  // midpoint tensor rule over (x, y, z); n = 1 domains
  double hx = (box.h_hi[0] - box.h_lo[0]) / cells;
  double hy = (box.h_hi[1] - box.h_lo[1]) / cells;
  double hz = (box.z_hi - box.z_lo) / cells;
  std::size_t total = static_cast<std::size_t>(cells) * cells;
  std::vector<double> columns = parallel_map(total, workers, [&](std::size_t idx) {
    int ix = static_cast<int>(idx) / cells;
    int iy = static_cast<int>(idx) % cells;
    double x = box.h_lo[0] + (ix + 0.5) * hx;
    double y = box.h_lo[1] + (iy + 0.5) * hy;
    std::vector<double> vals(cells);
    for (int iz = 0; iz < cells; ++iz) {
      double z = box.z_lo + (iz + 0.5) * hz;
      vals[iz] = std::abs(jh(f, HeisPoint(Eigen::Vector2d(x, y), z)));
    }
    return pairwise_sum(vals);
  });
  return pairwise_sum(columns) * hx * hy * hz;
}

}  // namespace

LhsResult coarea_lhs(const CoareaExperiment& exp) {
  if (exp.n != 1) throw std::invalid_argument("coarea_lhs: n=1 experiments only");
  MapField f = make_field(exp.field_name, exp.field_params, exp.n);
  LhsResult out;
  double coarse = quadrature_pass(f, exp.domain, std::max(2, exp.quad_cells / 2), exp.workers);
  out.value = quadrature_pass(f, exp.domain, exp.quad_cells, exp.workers);
  out.error_estimate = std::abs(out.value - coarse) / 3.0;
  return out;
}

namespace {

struct WBounds {
  Eigen::Vector2d lo, hi;
};

WBounds target_bounds(const MapField& f, const CoordBox& box) {
  // coarse lattice over the closed box, corners included
  const int m = 8;
  WBounds b;
  bool first = true;
  for (int ix = 0; ix <= m; ++ix) {
    for (int iy = 0; iy <= m; ++iy) {
      for (int iz = 0; iz <= m; ++iz) {
        Eigen::Vector2d h(box.h_lo[0] + ix * (box.h_hi[0] - box.h_lo[0]) / m,
                          box.h_lo[1] + iy * (box.h_hi[1] - box.h_lo[1]) / m);
        double z = box.z_lo + iz * (box.z_hi - box.z_lo) / m;
        Eigen::Vector2d w = f.eval(HeisPoint(h, z)).head<2>();
        if (first) {
          b.lo = b.hi = w;
          first = false;
        } else {
          b.lo = b.lo.cwiseMin(w);
          b.hi = b.hi.cwiseMax(w);
        }
      }
    }
  }
  return b;
}

struct CellOutcome {
  double measure = 0.0;
  int fibers = 0;
  bool undefined = false;
  bool traced_any = false;
};

CellOutcome process_target(const MapField& f, const CoareaExperiment& exp,
                           const Eigen::Vector2d& w) {
  CellOutcome out;
  std::vector<VerticalCurveSamples> accepted;
  for (int s = 0; s < exp.z_strata; ++s) {
    double zs = exp.domain.z_lo + (s + 0.5) * (exp.domain.z_hi - exp.domain.z_lo) / exp.z_strata;
    bool covered = false;
    for (const auto& fib : accepted) {
      if (zs >= fib.pts.front().z - exp.tracer.step && zs <= fib.pts.back().z + exp.tracer.step) {
        covered = true;
        break;
      }
    }
    if (covered) continue;
    VerticalCurveSamples fib;
    try {
      fib = trace_fiber(f, w, HeisPoint(w, zs), exp.domain, exp.tracer);
    } catch (const TraceError&) {
      continue;
    }
    out.traced_any = true;
    // dedupe against accepted traces (same component reached twice)
    bool dup = false;
    for (const auto& other : accepted) {
      double mid_z = 0.5 * (fib.pts.front().z + fib.pts.back().z);
      if (mid_z >= other.pts.front().z - exp.tracer.step &&
          mid_z <= other.pts.back().z + exp.tracer.step) {
        dup = true;
        break;
      }
    }
    if (dup) continue;
    accepted.push_back(std::move(fib));
  }
  for (const auto& fib : accepted) {
    FiberMeasure m = fiber_measure(fib, exp.area);
    if (!m.defined) {
      out.undefined = true;
      continue;
    }
    out.measure += m.measure;
    out.fibers += 1;
  }
  return out;
}

}  // namespace

RhsResult coarea_rhs(const CoareaExperiment& exp) {
  if (exp.n != 1) throw std::invalid_argument("coarea_rhs: n=1 experiments only");
  MapField f = make_field(exp.field_name, exp.field_params, exp.n);
  WBounds wb = target_bounds(f, exp.domain);

  const int inner = exp.wgrid_cells;
  Eigen::Vector2d cell((wb.hi.x() - wb.lo.x()) / inner, (wb.hi.y() - wb.lo.y()) / inner);
  // degenerate image extents still get one finite cell
  for (int d = 0; d < 2; ++d) {
    if (!(cell[d] > 0)) cell[d] = std::max(1e-6, (wb.hi - wb.lo).norm() / inner + 1e-6);
  }
  const int nx = inner + 2, ny = inner + 2;  // inflated by one cell per side

  RhsResult out;
  out.rows.resize(static_cast<std::size_t>(nx) * ny);
  std::vector<double> measures =
      parallel_map(out.rows.size(), exp.workers, [&](std::size_t idx) {
        int ix = static_cast<int>(idx) % nx;
        int iy = static_cast<int>(idx) / nx;
        Eigen::Vector2d w(wb.lo.x() - cell.x() + (ix + 0.5) * cell.x(),
                          wb.lo.y() - cell.y() + (iy + 0.5) * cell.y());
        CellOutcome oc = process_target(f, exp, w);
        WRow& row = out.rows[idx];
        row.w = w;
        row.fibers = oc.fibers;
        row.measure = oc.measure;
        row.verdict = oc.undefined ? "undefined" : (oc.fibers == 0 ? "empty" : "ok");
        return oc.measure;
      });

  for (const auto& row : out.rows) {
    if (row.verdict == "undefined") {
      std::ostringstream os;
      os << "w=(" << row.w.x() << ", " << row.w.y() << ")";
      out.failures.push_back(os.str());
    }
    if (row.fibers > 0) ++out.traced;
    if (row.verdict == "empty") ++out.untraceable;
  }
  out.value = pairwise_sum(measures) * cell.x() * cell.y();
  return out;
}

CoareaResult run_experiment(const CoareaExperiment& exp) {
  CoareaResult res;
  res.lhs = coarea_lhs(exp);
  res.rhs = coarea_rhs(exp);

  if (!res.rhs.failures.empty()) {
    std::string msg = "undefined fiber measures at " +
                      std::to_string(res.rhs.failures.size()) + " targets:";
    for (std::size_t i = 0; i < res.rhs.failures.size() && i < 8; ++i) {
      msg += " " + res.rhs.failures[i];
    }
    throw std::runtime_error(msg);
  }

  if (res.lhs.value <= 1e-12 && res.rhs.traced == 0) {
    res.degenerate = true;
    res.note = "vanishing horizontal Jacobian: fibers 2-dimensional, out of tracer scope; "
               "identity not asserted";
    res.identity_ok = true;
    res.inequality_ok = res.rhs.value <= res.lhs.value * (1 + exp.tol_inequality) + 1e-12;
    return res;
  }

  res.rel_gap = res.lhs.value > 0 ? std::abs(res.lhs.value - res.rhs.value) / res.lhs.value : 0.0;
  res.identity_ok = res.rel_gap <= exp.tol_identity;
  res.inequality_ok = res.rhs.value <= res.lhs.value * (1 + exp.tol_inequality) + 1e-12;
  return res;
}

MagnaniReport magnani_check(const CoareaResult& result, double tol) {
  MagnaniReport rep;
  rep.lhs = result.lhs.value;
  rep.rhs = result.rhs.value;
  rep.ok = result.rhs.value <= result.lhs.value * (1 + tol) + 1e-12;
  if (result.degenerate) rep.note = result.note;
  return rep;
}

CoareaExperiment parse_experiment_config(std::istream& in) {
  CoareaExperiment exp;
  std::string line;
  auto split_csv = [](const std::string& s) {
    std::vector<double> vals;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
    return vals;
  };
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t\r");
      auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty()) continue;
    if (key == "field") {
      exp.field_name = val;
    } else if (key == "params") {
      exp.field_params = split_csv(val);
    } else if (key == "box") {
      auto v = split_csv(val);
      if (v.size() != 6) throw std::invalid_argument("config: box needs 6 numbers");
      exp.domain.h_lo = Eigen::Vector2d(v[0], v[2]);
      exp.domain.h_hi = Eigen::Vector2d(v[1], v[3]);
      exp.domain.z_lo = v[4];
      exp.domain.z_hi = v[5];
    } else if (key == "quad") {
      exp.quad_cells = std::stoi(val);
    } else if (key == "wgrid") {
      exp.wgrid_cells = std::stoi(val);
    } else if (key == "strata") {
      exp.z_strata = std::stoi(val);
    } else if (key == "step") {
      exp.tracer.step = std::stod(val);
    } else if (key == "tol_identity") {
      exp.tol_identity = std::stod(val);
    } else if (key == "tol_inequality") {
      exp.tol_inequality = std::stod(val);
    } else if (key == "workers") {
      exp.workers = std::stoi(val);
    } else {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }
  return exp;
}

}  // namespace heis
