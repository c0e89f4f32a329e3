#include "heislab/pathological.hpp"

#include <cmath>

#include "heislab/area.hpp"
#include "heislab/reduce.hpp"

namespace heis {

PathParams::PathParams(std::vector<int> r_seq, std::vector<int> k_seq)
    : r(std::move(r_seq)), k(std::move(k_seq)) {
  if (k.empty() || r.size() != k.size() + 1) {
    throw std::invalid_argument("PathParams: need r of size depth+1 and k of size depth >= 1");
  }
  if (r.front() < 0) throw std::invalid_argument("PathParams: r[0] >= 0 required");
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (k[i] < 1) throw std::invalid_argument("PathParams: k[i] >= 1 required");
    if (r[i + 1] < r[i] + 16 * k[i] + 2) {
      throw std::invalid_argument("PathParams: r[i+1] >= r[i] + 16 k[i] + 2 violated at i=" +
                                  std::to_string(i));
    }
  }
  if (r.back() > 120) throw std::invalid_argument("PathParams: r beyond supported exponent range");
}

AbPair ab_sequences(int i) {
  if (i < 0) throw std::invalid_argument("ab_sequences: i >= 0");
  if (i > 60) throw std::invalid_argument("ab_sequences: i too large");
  // (4^i - 1)/3 is the alternating-bit integer 0b0101..01 with i ones
  int128 m_a = 0;
  for (int j = 0; j < i; ++j) m_a = m_a * 4 + 1;
  int128 m_b = m_a + 1;  // (4^i + 2)/3
  return {Dyadic(m_a, 2 * i), Dyadic(m_b, 2 * i)};
}

namespace {

const Dyadic kOne = Dyadic::from_int(1);

// -1, 0, +1 according to the position of t relative to 1/3
int third_side(const Dyadic& t) {
  Dyadic three_t = t.times(3);
  auto c = three_t <=> kOne;
  if (c == std::strong_ordering::less) return -1;
  if (c == std::strong_ordering::greater) return +1;
  return 0;
}

}  // namespace

double staircase(const Dyadic& t) {
  if (t < Dyadic() || t > kOne) throw std::invalid_argument("staircase: t outside [0,1]");
  int side = third_side(t);
  if (side == 0) throw std::invalid_argument("staircase: undefined at 1/3");
  if (side < 0) {
    int i = 0;
    while (ab_sequences(i + 1).a <= t) ++i;
    Dyadic a_i = ab_sequences(i).a;
    // slope on [a_i, a_i+1] is 4^(i+1)
    return i + (t - a_i).mul_pow2(2 * i + 2).value();
  }
  int i = 0;
  while (ab_sequences(i + 1).b >= t) ++i;
  Dyadic b_i = ab_sequences(i).b;
  // slope on [b_i+1, b_i] is -2 * 4^i
  return i + (b_i - t).mul_pow2(2 * i + 1).value();
}

double staircase_dyadic(int m, const Dyadic& t) {
  if (m < 0) throw std::invalid_argument("staircase_dyadic: m >= 0");
  int lo = m / 2, hi = (m + 1) / 2;
  Dyadic a = ab_sequences(lo).a;
  Dyadic b = ab_sequences(hi).b;
  if (t <= a || t >= b) return staircase(t);
  if (lo == hi) return lo;
  // single affine chord from (a_lo, lo) to (b_hi, hi); width is 2^-m
  return lo + (t - a).mul_pow2(m).value() * (hi - lo);
}

PlCurve staircase_dyadic_graph(int m) {
  if (m < 0) throw std::invalid_argument("staircase_dyadic_graph: m >= 0");
  int lo = m / 2, hi = (m + 1) / 2;
  PlCurve out;
  for (int j = 0; j <= lo; ++j) {
    out.knots.push_back(ab_sequences(j).a);
    out.values.push_back(Eigen::VectorXd::Constant(1, j));
  }
  for (int j = hi; j >= 0; --j) {
    out.knots.push_back(ab_sequences(j).b);
    out.values.push_back(Eigen::VectorXd::Constant(1, j));
  }
  out.validate();
  return out;
}

Eigen::Vector2d square_path(double s) {
  if (s < 0) throw std::invalid_argument("square_path: s >= 0");
  if (s >= 4.0) return {0.0, 0.0};
  int seg = static_cast<int>(std::floor(s));
  double f = s - seg;
  switch (seg) {
    case 0:
      return {f, 0.0};
    case 1:
      return {1.0, f};
    case 2:
      return {1.0 - f, 1.0};
    default:
      return {0.0, 1.0 - f};
  }
}

Eigen::Vector2d square_tracer(int k, const Dyadic& t) {
  if (k < 1) throw std::invalid_argument("square_tracer: k >= 1");
  return square_path(staircase_dyadic(8 * k, t) / k);
}

PlCurve square_tracer_pl(int k) {
  if (k < 1) throw std::invalid_argument("square_tracer_pl: k >= 1");
  PlCurve out;
  for (int j = 0; j <= 4 * k; ++j) {
    out.knots.push_back(ab_sequences(j).a);
    out.values.push_back(square_path(static_cast<double>(j) / k));
  }
  for (int j = 4 * k; j >= 0; --j) {
    out.knots.push_back(ab_sequences(j).b);
    out.values.push_back(square_path(static_cast<double>(j) / k));
  }
  out.validate();
  return out;
}

PathologicalCurve::PathologicalCurve(PathParams params) : params_(std::move(params)) {}

Eigen::VectorXd PathologicalCurve::at(double t) const { return limit(Dyadic::from_double(t)); }

Eigen::Vector2d PathologicalCurve::stage(int i, const Dyadic& t) const {
  if (i < 0 || i > params_.depth()) throw std::invalid_argument("stage index out of range");
  if (t < Dyadic() || t > kOne) throw std::invalid_argument("stage: t outside [0,1]");
  if (i == 0) return Eigen::Vector2d::Zero();

  const int r_prev = params_.r[i - 1];
  const int k_prev = params_.k[i - 1];

  // memoize grid values gamma_i(j 2^-r[i-1]); they stabilize across stages
  const bool grid_value = t.exponent() <= r_prev && t.exponent() <= 45;
  std::uint64_t key = 0;
  if (grid_value) {
    key = (static_cast<std::uint64_t>(i) << 56) |
          (static_cast<std::uint64_t>(t.exponent()) << 48) |
          static_cast<std::uint64_t>(static_cast<std::int64_t>(t.mantissa()));
    std::shared_lock lock(memo_mutex_);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
  }

  int128 j = t.floor_mul_pow2(r_prev);
  int128 cells = int128{1} << r_prev;
  if (j >= cells) j = cells - 1;
  Dyadic c(j, r_prev);
  Dyadic mid = c + Dyadic::pow2(r_prev + 1);

  Eigen::Vector2d result;
  if (t <= mid) {
    Dyadic s = (t - c).mul_pow2(r_prev + 1);
    result = stage(i - 1, c) + std::exp2(-0.5 * r_prev) * square_tracer(k_prev, s);
  } else {
    Dyadic u = c + (t - mid).mul_pow2(1);
    result = stage(i - 1, u);
  }

  if (grid_value) {
    std::unique_lock lock(memo_mutex_);
    memo_.emplace(key, result);
  }
  return result;
}

Eigen::Vector2d PathologicalCurve::limit(const Dyadic& t) const {
  for (int i = 0; i <= params_.depth(); ++i) {
    if (t.exponent() <= params_.r[i]) return stage(i, t);
  }
  throw std::domain_error("PathologicalCurve: parameter exponent " +
                          std::to_string(t.exponent()) + " beyond materialized depth (r_max=" +
                          std::to_string(params_.r.back()) + ")");
}

std::vector<std::vector<double>> PathologicalCurve::stress_partitions(int level) const {
  std::vector<std::vector<double>> out;
  for (int s = 0; s < params_.depth() && s <= stress_stage_cap_; ++s) {
    // the stage grid must be at least comparable to the probed mesh and
    // small enough to evaluate
    if (params_.r[s] < level - 2) continue;
    if (params_.r[s] > 20) continue;
    out.push_back(refined_partition(s, std::int64_t{1} << 24).points());
  }
  return out;
}

Partition PathologicalCurve::refined_partition(int stage_idx, std::int64_t point_cap) const {
  if (stage_idx < 0 || stage_idx >= params_.depth()) {
    throw std::invalid_argument("refined_partition: stage must name an insertion level");
  }
  const int r_i = params_.r[stage_idx];
  const int k_i = params_.k[stage_idx];
  std::int64_t cells = std::int64_t{1} << r_i;
  std::int64_t count = 5 * cells + 1;
  if (count > point_cap) {
    throw ResourceLimitError("refined_partition: " + std::to_string(count) +
                             " points exceed the configured cap");
  }
  // vertex m of the inserted square is hit at c + 2^-(r_i+1) a_{m k_i}
  double vertex_offset[4];
  for (int m = 1; m <= 4; ++m) {
    vertex_offset[m - 1] = ab_sequences(m * k_i).a.mul_pow2(-(r_i + 1)).value();
  }
  std::vector<double> pts;
  pts.reserve(count);
  for (std::int64_t j = 0; j < cells; ++j) {
    double c = std::ldexp(static_cast<double>(j), -r_i);
    pts.push_back(c);
    for (int m = 0; m < 4; ++m) pts.push_back(c + vertex_offset[m]);
  }
  pts.push_back(1.0);
  return Partition(std::move(pts));
}

SigmaCertificates sigma_certificates(const std::vector<int>& k_list,
                                     const std::vector<int>& staircase_levels,
                                     const std::optional<PathParams>& params, int gamma_level) {
  SigmaCertificates out;
  for (int k : k_list) {
    CertEntry e;
    e.name = "sigma(theta_" + std::to_string(k) + ")";
    e.value = sigma_exact(square_tracer_pl(k));
    e.bound = 128.0 / k;
    e.pass = e.value <= e.bound;
    out.all_pass = out.all_pass && e.pass;
    out.tracer.push_back(e);
  }
  for (int i : staircase_levels) {
    CertEntry e;
    e.name = "sigma(D_" + std::to_string(2 * i) + " alpha)";
    e.value = sigma_exact(staircase_dyadic_graph(2 * i));
    e.bound = 32.0 * i;
    e.pass = e.value <= e.bound;
    out.all_pass = out.all_pass && e.pass;
    out.staircase.push_back(e);
  }
  if (params) {
    // finite parameter lists attest the growth-and-summability hypothesis
    // only when k_i >= max(i, 1) and the tracer index strictly grows
    bool hyp = true;
    double inv_k_sum = 0.0;
    for (std::size_t i = 0; i < params->k.size(); ++i) {
      if (params->k[i] < std::max<int>(static_cast<int>(i), 1)) hyp = false;
      if (i >= 1 && params->k[i] <= params->k[i - 1]) hyp = false;
      inv_k_sum += 1.0 / params->k[i];
    }
    out.gamma_hypotheses_met = hyp;
    PathologicalCurve curve(*params);
    SigmaResult sr = sigma_partial(curve, gamma_level);
    CertEntry e;
    e.name = "sigma(gamma) partial / sum(1/k_i)";
    e.value = sr.value;
    e.bound = inv_k_sum;
    e.pass = true;  // ratio is reported; the implicit constant is not pinned
    out.gamma = e;
    if (!hyp) {
      out.note = "gamma sigma bound not asserted: parameters do not satisfy k_i >= i";
    } else {
      out.note = "gamma sigma reported as ratio against sum(1/k_i); constant unspecified";
    }
  }
  return out;
}

}  // namespace heis
