#pragma once

#include <Eigen/Core>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "heislab/dyadic.hpp"

namespace heis {

struct ResourceLimitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OnBoundaryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct HolderInfo {
  double exponent = 0.5;
  double constant = 1.0;
};

/// Piecewise-linear curve on [0,1] with exact dyadic breakpoints.
struct PlCurve {
  std::vector<Dyadic> knots;  // strictly increasing, first 0, last 1
  std::vector<Eigen::VectorXd> values;

  int dim() const { return values.empty() ? 0 : static_cast<int>(values.front().size()); }
  Eigen::VectorXd at(const Dyadic& t) const;
  int max_knot_exponent() const;
  void validate() const;
};

/// Full dyadic-level sum of squared three-point diameters of a PL curve,
/// evaluated in closed form (geometric tail included, no truncation).
double sigma_exact(const PlCurve& c);

/// An evaluable curve [0,1] -> R^dim. Evaluation must be deterministic.
class CurveSource {
 public:
  virtual ~CurveSource() = default;
  virtual int dim() const = 0;
  virtual Eigen::VectorXd at(double t) const = 0;
  /// Exact-parameter evaluation; defaults to the double path.
  virtual Eigen::VectorXd at(const Dyadic& t) const { return at(t.value()); }
  virtual std::optional<HolderInfo> holder() const { return std::nullopt; }
  virtual std::optional<double> lipschitz() const { return std::nullopt; }
  /// Deepest parameter exponent the curve can evaluate exactly.
  virtual int max_param_exponent() const { return 1000; }
  /// Non-null when the curve is piecewise linear with known breakpoints.
  virtual const PlCurve* as_pl() const { return nullptr; }
  /// Adversarial partitions of mesh <= ~2^-level supplied by curves whose
  /// construction is known to defeat sample-based probing; folded into
  /// the probe family by the area estimator.
  virtual std::vector<std::vector<double>> stress_partitions(int level) const {
    (void)level;
    return {};
  }
};

class FunctionCurve : public CurveSource {
 public:
  FunctionCurve(int dim, std::function<Eigen::VectorXd(double)> f,
                std::optional<double> lip = std::nullopt,
                std::optional<HolderInfo> holder = std::nullopt)
      : dim_(dim), f_(std::move(f)), lip_(lip), holder_(holder) {}

  int dim() const override { return dim_; }
  Eigen::VectorXd at(double t) const override { return f_(t); }
  std::optional<double> lipschitz() const override { return lip_; }
  std::optional<HolderInfo> holder() const override { return holder_; }

 private:
  int dim_;
  std::function<Eigen::VectorXd(double)> f_;
  std::optional<double> lip_;
  std::optional<HolderInfo> holder_;
};

class PlCurveSource : public CurveSource {
 public:
  explicit PlCurveSource(PlCurve c, std::optional<double> lip = std::nullopt)
      : c_(std::move(c)), lip_(lip) {
    c_.validate();
  }
  int dim() const override { return c_.dim(); }
  Eigen::VectorXd at(double t) const override { return c_.at(Dyadic::from_double(t)); }
  Eigen::VectorXd at(const Dyadic& t) const override { return c_.at(t); }
  std::optional<double> lipschitz() const override { return lip_; }
  const PlCurve* as_pl() const override { return &c_; }

 private:
  PlCurve c_;
  std::optional<double> lip_;
};

/// Strictly increasing parameters with first = 0 and last = 1.
class Partition {
 public:
  explicit Partition(std::vector<double> points);
  static Partition uniform(int cells);
  static Partition dyadic(int level);

  const std::vector<double>& points() const { return pts_; }
  std::size_t size() const { return pts_.size(); }
  double mesh() const;

 private:
  std::vector<double> pts_;
};

/// Polyline through a vertex list; knots are optional parameter values.
struct PolyCurve {
  std::vector<Eigen::VectorXd> vertices;
  std::vector<double> knots;  // empty or same size as vertices

  int dim() const { return vertices.empty() ? 0 : static_cast<int>(vertices.front().size()); }
  bool closed() const;
  double length() const;
  void validate() const;
};

/// Concatenation; endpoints must match exactly.
PolyCurve concat(const PolyCurve& a, const PolyCurve& b);
PolyCurve translate(const PolyCurve& c, const Eigen::VectorXd& v);

/// Per-level approximating points: level i holds 2^i + 1 entries within
/// L 2^(-i/2) of the curve samples they stand for.
struct ApproxGrid {
  std::vector<std::vector<Eigen::VectorXd>> levels;
  double L = 1.0;

  void validate() const;
};

struct ConvergenceReport {
  enum class Verdict { converged, diverging, inconclusive };

  struct Term {
    double level;  // dyadic level (or scale tag)
    double value;
  };

  std::vector<Term> terms;
  std::vector<double> increments;
  Verdict verdict = Verdict::inconclusive;
  std::optional<double> limit;
  double tolerance = 0.0;
  std::optional<double> tail_bound;
  std::vector<double> probe_values;
  std::string note;
};

std::string to_string(ConvergenceReport::Verdict v);

}  // namespace heis
