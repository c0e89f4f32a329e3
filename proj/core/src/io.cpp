#include "heislab/io.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "heislab/area.hpp"

namespace heis {

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_curve_csv(std::ostream& os, const std::vector<double>& ts,
                     const std::vector<Eigen::VectorXd>& values) {
  if (ts.size() != values.size() || ts.empty()) {
    throw std::invalid_argument("write_curve_csv: mismatched rows");
  }
  os << "t";
  for (Eigen::Index c = 0; c < values.front().size(); ++c) os << ",c" << (c + 1);
  os << "\n";
  for (std::size_t i = 0; i < ts.size(); ++i) {
    os << fmt_double(ts[i]);
    for (Eigen::Index c = 0; c < values[i].size(); ++c) os << "," << fmt_double(values[i][c]);
    os << "\n";
  }
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string tok;
  while (std::getline(ss, tok, sep)) out.push_back(tok);
  return out;
}

struct CsvData {
  std::vector<double> ts;
  std::vector<Eigen::VectorXd> values;
};

CsvData read_csv_body(std::istream& is, const std::string& what) {
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument(what + ": empty input");
  auto header = split(line, ',');
  if (header.size() < 2 || header[0] != "t") {
    throw std::invalid_argument(what + ": header must start with 't'");
  }
  std::size_t cols = header.size() - 1;
  CsvData data;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto toks = split(line, ',');
    if (toks.size() != cols + 1) {
      throw std::invalid_argument(what + ": wrong column count on line " + std::to_string(lineno));
    }
    double t = std::stod(toks[0]);
    if (t < 0.0 || t > 1.0) {
      throw std::invalid_argument(what + ": parameter out of [0,1] on line " +
                                  std::to_string(lineno));
    }
    if (!data.ts.empty() && t <= data.ts.back()) {
      throw std::invalid_argument(what + ": parameters not sorted on line " +
                                  std::to_string(lineno));
    }
    Eigen::VectorXd v(cols);
    for (std::size_t c = 0; c < cols; ++c) v[c] = std::stod(toks[c + 1]);
    data.ts.push_back(t);
    data.values.push_back(std::move(v));
  }
  if (data.ts.size() < 2) throw std::invalid_argument(what + ": need at least 2 rows");
  return data;
}

}  // namespace

PolyCurve read_curve_csv(std::istream& is) {
  CsvData data = read_csv_body(is, "curve csv");
  if (data.values.front().size() % 2 != 0) {
    throw std::invalid_argument("curve csv: dimension must be even");
  }
  PolyCurve out;
  out.knots = std::move(data.ts);
  out.vertices = std::move(data.values);
  return out;
}

std::unique_ptr<CurveSource> curve_source_from_csv(std::istream& is) {
  PolyCurve poly = read_curve_csv(is);
  PlCurve pl;
  pl.knots.reserve(poly.knots.size() + 2);
  pl.values.reserve(poly.knots.size() + 2);
  if (poly.knots.front() != 0.0) {
    pl.knots.push_back(Dyadic());
    pl.values.push_back(poly.vertices.front());
  }
  for (std::size_t i = 0; i < poly.knots.size(); ++i) {
    pl.knots.push_back(Dyadic::from_double(poly.knots[i]));
    pl.values.push_back(poly.vertices[i]);
  }
  if (poly.knots.back() != 1.0) {
    pl.knots.push_back(Dyadic::from_int(1));
    pl.values.push_back(poly.vertices.back());
  }
  return std::make_unique<PlCurveSource>(std::move(pl));
}

void write_vertical_csv(std::ostream& os, const VerticalCurveSamples& s) {
  if (s.pts.empty()) throw std::invalid_argument("write_vertical_csv: empty");
  int n = s.pts.front().n();
  os << "t";
  for (int i = 1; i <= n; ++i) os << ",x" << i << ",y" << i;
  os << ",z\n";
  for (std::size_t i = 0; i < s.pts.size(); ++i) {
    os << fmt_double(s.knot(i));
    for (Eigen::Index c = 0; c < s.pts[i].h.size(); ++c) os << "," << fmt_double(s.pts[i].h[c]);
    os << "," << fmt_double(s.pts[i].z) << "\n";
  }
}

VerticalCurveSamples read_vertical_csv(std::istream& is) {
  CsvData data = read_csv_body(is, "vertical csv");
  Eigen::Index cols = data.values.front().size();
  if (cols < 3 || (cols - 1) % 2 != 0) {
    throw std::invalid_argument("vertical csv: columns must be t,x1,y1[,...],z");
  }
  VerticalCurveSamples s;
  s.knots = std::move(data.ts);
  for (auto& v : data.values) {
    s.pts.emplace_back(v.head(cols - 1).eval(), v[cols - 1]);
  }
  return s;
}

nlohmann::json report_json(const ConvergenceReport& rep) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : rep.terms) terms.push_back({{"level", t.level}, {"value", t.value}});
  nlohmann::json j{{"terms", terms},
                   {"verdict", to_string(rep.verdict)},
                   {"tolerance", rep.tolerance},
                   {"increments", rep.increments},
                   {"probe_values", rep.probe_values}};
  if (rep.limit) j["limit"] = *rep.limit;
  if (rep.tail_bound) j["tail_bound"] = *rep.tail_bound;
  if (!rep.note.empty()) j["note"] = rep.note;
  return j;
}

nlohmann::json sigma_json(const SigmaResult& s) {
  nlohmann::json j{{"value", s.value}, {"max_level", s.max_level}};
  if (s.tail_bound) j["tail_bound"] = *s.tail_bound;
  return j;
}

nlohmann::json patchwork_json(const VerticalCurveSamples& s, const Patchwork& pw) {
  std::function<nlohmann::json(int)> node_json = [&](int id) {
    const auto& v = pw.nodes[id];
    nlohmann::json j{{"lo", v.lo},
                     {"hi", v.hi},
                     {"gen", v.gen},
                     {"diam", v.diam},
                     {"t_lo", s.knot(v.lo)},
                     {"t_hi", s.knot(v.hi)}};
    if (!v.children.empty()) {
      nlohmann::json kids = nlohmann::json::array();
      for (int c : v.children) kids.push_back(node_json(c));
      j["children"] = kids;
    }
    return j;
  };
  return nlohmann::json{{"mu", pw.mu},
                        {"depth", pw.depth()},
                        {"diam", pw.diam_root},
                        {"root", node_json(pw.generations[0][0])}};
}

namespace {

nlohmann::json cert_json(const CertEntry& e) {
  return {{"name", e.name}, {"value", e.value}, {"bound", e.bound}, {"pass", e.pass}};
}

}  // namespace

nlohmann::json certificates_json(const SigmaCertificates& certs) {
  nlohmann::json tracer = nlohmann::json::array();
  for (const auto& e : certs.tracer) tracer.push_back(cert_json(e));
  nlohmann::json staircase = nlohmann::json::array();
  for (const auto& e : certs.staircase) staircase.push_back(cert_json(e));
  nlohmann::json j{{"tracer", tracer},
                   {"staircase", staircase},
                   {"all_pass", certs.all_pass},
                   {"gamma_hypotheses_met", certs.gamma_hypotheses_met}};
  if (certs.gamma) j["gamma"] = cert_json(*certs.gamma);
  if (!certs.note.empty()) j["note"] = certs.note;
  return j;
}

nlohmann::json coarea_json(const CoareaResult& res) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : res.rhs.rows) {
    rows.push_back({{"w", {r.w.x(), r.w.y()}},
                    {"fibers", r.fibers},
                    {"measure", r.measure},
                    {"verdict", r.verdict}});
  }
  nlohmann::json j{{"lhs", res.lhs.value},
                   {"lhs_error_estimate", res.lhs.error_estimate},
                   {"rhs", res.rhs.value},
                   {"rel_gap", res.rel_gap},
                   {"identity_ok", res.identity_ok},
                   {"inequality_ok", res.inequality_ok},
                   {"degenerate", res.degenerate},
                   {"per_w", rows}};
  if (!res.note.empty()) j["note"] = res.note;
  return j;
}

}  // namespace heis
