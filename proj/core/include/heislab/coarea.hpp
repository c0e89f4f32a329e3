#pragma once

#include <iosfwd>

#include "heislab/fields.hpp"

namespace heis {

struct CoareaExperiment {
  std::string field_name = "projection";
  std::vector<double> field_params;
  int n = 1;
  CoordBox domain = CoordBox::unit(1);
  int quad_cells = 48;    // per-axis midpoint quadrature for the Jacobian side
  int wgrid_cells = 96;   // per-axis target grid (inflated by one cell per side)
  int z_strata = 3;       // tracer seed strata in the vertical
  TraceConfig tracer;
  AreaConfig area;        // per-fiber symplectic-area estimation
  double tol_identity = 0.02;
  double tol_inequality = 1e-3;
  int workers = 1;
};

struct LhsResult {
  double value = 0.0;
  double error_estimate = 0.0;  // Richardson estimate from two resolutions
};

/// Midpoint tensor quadrature of |J_H f| over the domain box.
LhsResult coarea_lhs(const CoareaExperiment& exp);

struct WRow {
  Eigen::VectorXd w;
  int fibers = 0;
  double measure = 0.0;
  std::string verdict;  // ok | empty | undefined
};

struct RhsResult {
  double value = 0.0;
  std::vector<WRow> rows;
  std::vector<std::string> failures;  // targets whose fiber measure was undefined
  int traced = 0;
  int untraceable = 0;
};

/// Fiber side: traces f^-1(w) for every target cell midpoint, clips to
/// the box, splits strata into components, sums measures, and integrates
/// by the midpoint rule. Any undefined fiber measure is recorded and
/// surfaced by run_experiment.
RhsResult coarea_rhs(const CoareaExperiment& exp);

struct CoareaResult {
  LhsResult lhs;
  RhsResult rhs;
  double rel_gap = 0.0;
  bool identity_ok = false;
  bool inequality_ok = false;
  bool degenerate = false;  // vanishing Jacobian, fibers out of tracer scope
  std::string note;
};

/// Runs both sides; throws listing the offending targets when any fiber
/// measure is undefined.
CoareaResult run_experiment(const CoareaExperiment& exp);

/// rhs <= lhs (1 + tol) with the per-run slack; degenerate runs report
/// without asserting.
struct MagnaniReport {
  bool ok = false;
  double lhs = 0.0;
  double rhs = 0.0;
  std::string note;
};
MagnaniReport magnani_check(const CoareaResult& result, double tol);

/// Flat key=value experiment config ('#' comments). Keys: field, params,
/// box (xlo,xhi,ylo,yhi,zlo,zhi), quad, wgrid, strata, step,
/// tol_identity, tol_inequality, workers.
CoareaExperiment parse_experiment_config(std::istream& in);

}  // namespace heis
