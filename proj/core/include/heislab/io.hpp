#pragma once

#include <iosfwd>
#include <json.hpp>
#include <memory>
#include <string>

#include "heislab/coarea.hpp"
#include "heislab/curve.hpp"
#include "heislab/pathological.hpp"
#include "heislab/vertical.hpp"

namespace heis {

/// Full-precision decimal (17 significant digits), round-trip safe.
std::string fmt_double(double x);

/// Curve CSV: header `t,c1,...,c{2n}`, rows sorted by t in [0,1].
void write_curve_csv(std::ostream& os, const std::vector<double>& ts,
                     const std::vector<Eigen::VectorXd>& values);
/// Rejects unsorted or out-of-range parameters.
PolyCurve read_curve_csv(std::istream& is);
/// The same data as an evaluable PL interpolant.
std::unique_ptr<CurveSource> curve_source_from_csv(std::istream& is);

/// Vertical-curve CSV: header `t,x1,y1[,...],z`.
void write_vertical_csv(std::ostream& os, const VerticalCurveSamples& s);
VerticalCurveSamples read_vertical_csv(std::istream& is);

nlohmann::json report_json(const ConvergenceReport& rep);
nlohmann::json sigma_json(const SigmaResult& s);
nlohmann::json patchwork_json(const VerticalCurveSamples& s, const Patchwork& pw);
nlohmann::json certificates_json(const SigmaCertificates& certs);
nlohmann::json coarea_json(const CoareaResult& res);

}  // namespace heis
