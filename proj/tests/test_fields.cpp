#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "heislab/fields.hpp"

using namespace heis;

namespace {

HeisPoint pt(double x, double y, double z) { return HeisPoint(Eigen::Vector2d(x, y), z); }

Ball unit_ball() { return Ball{pt(0.3, -0.2, 0.1), 0.8}; }

}  // namespace

TEST_CASE("horizontal jacobian") {
  MapField proj = make_field("projection", {}, 1);
  CHECK(horizontal_jacobian(proj, pt(0.4, 0.6, 0.2)) == Eigen::Matrix2d::Identity());
  CHECK(jh(proj, pt(1, 2, 3)) == 1.0);

  MapField lin = make_field("linear", {2, 0, 0, 1}, 1);
  Eigen::Matrix2d D = horizontal_jacobian(lin, pt(0.1, 0.2, 0.3));
  CHECK(D(0, 0) == 2.0);
  CHECK(D(1, 1) == 1.0);
  CHECK(jh(lin, pt(0, 0, 0)) == 2.0);

  SUBCASE("shear field matches the frame derivative") {
    double a = 0.7;
    MapField shear = make_field("shear", {a}, 1);
    HeisPoint p = pt(0.5, -0.8, 0.9);
    Eigen::Matrix2d J = horizontal_jacobian(shear, p);
    CHECK(J(0, 0) == doctest::Approx(1 - a * p.z * p.h[1]).epsilon(1e-14));
    CHECK(J(0, 1) == doctest::Approx(a * p.z * p.h[0]).epsilon(1e-14));
    CHECK(J(1, 0) == 0.0);
    CHECK(J(1, 1) == 1.0);
    CHECK(jh(shear, p) == doctest::Approx(1 - a * p.z * p.h[1]).epsilon(1e-14));
  }

  SUBCASE("finite differences agree with the analytic frame, O(h^2)") {
    double a = 0.3, b = 0.2;
    MapField exact = make_field("parabolic", {a, b}, 1);
    MapField fd = exact;
    fd.hgrad = nullptr;
    std::mt19937_64 rng(401);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int rep = 0; rep < 50; ++rep) {
      HeisPoint p = pt(u(rng), u(rng), u(rng));
      Eigen::Matrix2d JA = horizontal_jacobian(exact, p);
      fd.fd_step = 1e-4;
      Eigen::Matrix2d J1 = horizontal_jacobian(fd, p);
      fd.fd_step = 5e-5;
      Eigen::Matrix2d J2 = horizontal_jacobian(fd, p);
      double e1 = (J1 - JA).norm();
      double e2 = (J2 - JA).norm();
      CHECK(e1 <= 1e-6);
      // halving the step shrinks the error by about 4 (allowing noise)
      if (e1 > 1e-11) CHECK(e2 <= e1 * 0.6);
    }
  }
}

TEST_CASE("ball sampling stays in the gauge ball") {
  Ball B = unit_ball();
  auto pts = sample_ball(B, 4000, 999);
  CHECK(pts.size() == 4000);
  for (const auto& p : pts) {
    CHECK(kor_dist(B.center, p) <= B.radius * (1 + 1e-12));
  }
  // determinism
  auto again = sample_ball(B, 64, 999);
  for (std::size_t i = 0; i < again.size(); ++i) {
    CHECK(again[i].h == pts[i].h);
    CHECK(again[i].z == pts[i].z);
  }
}

TEST_CASE("affine fit") {
  SUBCASE("recovers affine fields exactly") {
    MapField lin = make_field("linear", {1.5, 0.25, -0.5, 2.0}, 1);
    AffineFit fit = affine_fit(lin, unit_ball(), 4000, 7);
    CHECK(fit.residual <= 1e-10);
    CHECK((fit.M - (Eigen::Matrix2d() << 1.5, 0.25, -0.5, 2.0).finished()).norm() <= 1e-9);
    CHECK(fit.b.norm() <= 1e-9);
  }

  SUBCASE("vertical dependence projects out over the symmetric ball") {
    MapField tilt = make_field("tilt", {1.0}, 1);  // f = (x + z, y)
    Ball B{identity(1), 1.0};
    AffineFit fit = affine_fit(tilt, B, 200000, 11);
    CHECK(fit.residual > 1e-3);
    CHECK((fit.M - Eigen::Matrix2d::Identity()).norm() <= 0.02);
    CHECK(fit.b.norm() <= 0.02);
  }

  SUBCASE("doubling the sample count is stable") {
    MapField shear = make_field("shear", {0.4}, 1);
    double r1 = affine_fit(shear, unit_ball(), 40000, 13).residual;
    double r2 = affine_fit(shear, unit_ball(), 80000, 17).residual;
    CHECK(r1 == doctest::Approx(r2).epsilon(0.05));
  }

  SUBCASE("degenerate sample budget throws") {
    MapField proj = make_field("projection", {}, 1);
    CHECK_THROWS_AS(affine_fit(proj, unit_ball(), 3, 1), std::invalid_argument);
  }
}

TEST_CASE("beta numbers") {
  SUBCASE("affine fields vanish") {
    MapField lin = make_field("linear", {1, 0.5, 0, 1}, 1);
    CHECK(beta_number(lin, unit_ball(), 100000, 19) <= 1e-6);
  }

  SUBCASE("adding an affine map leaves beta unchanged (common random numbers)") {
    MapField shear = make_field("shear", {0.5}, 1);
    MapField shifted = shear;
    shifted.eval = [](const HeisPoint& p) {
      Eigen::Vector2d base(p.h[0] + 0.5 * p.z * p.z, p.h[1]);
      Eigen::Matrix2d A;
      A << 2, 1, -1, 3;
      return (base + A * p.h + Eigen::Vector2d(5, -7)).eval();
    };
    shifted.hgrad = nullptr;
    double b0 = beta_number(shear, unit_ball(), 20000, 23);
    double b1 = beta_number(shifted, unit_ball(), 20000, 23);
    CHECK(b0 == doctest::Approx(b1).epsilon(1e-9));
  }

  SUBCASE("scale invariance under the gauge dilation") {
    double a = 0.6;
    MapField shear = make_field("shear", {a}, 1);
    Ball B{pt(0.2, 0.1, 0.05), 0.5};
    double beta = beta_number(shear, B, 50000, 29);
    for (double r : {0.5, 2.0}) {
      // r^-1 f(S_r p) with the ball shrunk by S_1/r
      MapField scaled;
      scaled.n = 1;
      scaled.eval = [a, r](const HeisPoint& p) {
        HeisPoint q = dilate(r, p);
        return Eigen::Vector2d((q.h[0] + a * q.z * q.z) / r, q.h[1] / r);
      };
      Ball Bs{dilate(1.0 / r, B.center), B.radius / r};
      double bs = beta_number(scaled, Bs, 50000, 29);
      CHECK(bs == doctest::Approx(beta).epsilon(0.05));
    }
  }

  SUBCASE("smaller balls have comparable beta on smooth fields") {
    MapField parab = make_field("parabolic", {0.5, 0.3}, 1);
    std::mt19937_64 rng(431);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (int rep = 0; rep < 10; ++rep) {
      Ball D{pt(u(rng), u(rng), u(rng)), 0.6};
      Ball Dp{D.center, 0.35};  // inside D, radius >= rad/2
      double big = beta_number(parab, D, 30000, 37 + rep);
      double small = beta_number(parab, Dp, 30000, 41 + rep);
      CHECK(small <= 10 * big);
    }
  }
}

TEST_CASE("bilipschitz check") {
  SUBCASE("projection") {
    BilipReport rep = bilip_check(make_field("projection", {}, 1), unit_ball(), 0.05, 20000, 43);
    CHECK(rep.hypothesis_met);
    CHECK(rep.within);
    CHECK(rep.sigma_min == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(rep.sigma_max == doctest::Approx(1.0).epsilon(1e-6));
  }

  SUBCASE("small vertical perturbation stays 2-bilipschitz") {
    BilipReport rep = bilip_check(make_field("tilt", {0.01}, 1), unit_ball(), 0.05, 20000, 47);
    CHECK(rep.hypothesis_met);
    CHECK(rep.within);
  }

  SUBCASE("large fields flag the hypothesis") {
    BilipReport rep = bilip_check(make_field("scale", {5.0}, 1), unit_ball(), 0.05, 2000, 53);
    CHECK_FALSE(rep.hypothesis_met);
  }
}

TEST_CASE("net families") {
  CoordBox box = CoordBox::unit(1);
  NetFamily nets(box, 0, 3);
  std::mt19937_64 rng(59);

  for (int lvl = 0; lvl <= 3; ++lvl) {
    double r = std::ldexp(1.0, -lvl);
    const auto& net = nets.level(lvl);
    CHECK(net.size() >= 1);
    for (std::size_t a = 0; a < net.size(); ++a) {
      for (std::size_t b = a + 1; b < net.size(); ++b) {
        CHECK(kor_dist(net[a], net[b]) > r);
      }
    }
    // maximality against fresh box points: everything is within r of the net
    for (int rep = 0; rep < 200; ++rep) {
      std::uniform_real_distribution<double> u(0.0, 1.0);
      HeisPoint q(Eigen::Vector2d(u(rng), u(rng)), u(rng));
      double dmin = 1e300;
      for (const auto& p : net) dmin = std::min(dmin, kor_dist(p, q));
      CHECK(dmin <= 2 * r);  // lattice-maximal nets cover at twice the separation
    }
  }
  CHECK_THROWS_AS(nets.level(9), std::invalid_argument);
}

TEST_CASE("multi-scale beta sums") {
  CoordBox box = CoordBox::unit(1);
  NetFamily nets(box, -2, 3);  // unit-box fibers have gauge diameter 2
  MapField proj = make_field("projection", {}, 1);
  TSumConfig cfg;
  cfg.depth = 3;
  cfg.beta_samples = 512;

  SUBCASE("singletons give zero") {
    CHECK(t_sum({pt(0.5, 0.5, 0.5)}, proj, nets, 3.0, cfg) == 0.0);
  }

  SUBCASE("affine fields give zero up to sampling noise") {
    std::vector<HeisPoint> fiber;
    for (int i = 0; i <= 16; ++i) fiber.push_back(pt(0.5, 0.5, i / 16.0));
    CHECK(t_sum(fiber, proj, nets, 3.0, cfg) <= 1e-12);
  }

  SUBCASE("monotone in depth and in the sample set") {
    MapField shear = make_field("shear", {0.2}, 1);
    std::vector<HeisPoint> fiber;
    for (int i = 0; i <= 16; ++i) fiber.push_back(pt(0.5, 0.5, i / 16.0));
    TSumConfig shallow = cfg;
    shallow.depth = 2;
    double t2 = t_sum(fiber, shear, nets, 3.0, shallow);
    double t3 = t_sum(fiber, shear, nets, 3.0, cfg);
    CHECK(t3 >= t2 - 1e-15);

    std::vector<HeisPoint> more = fiber;
    for (int i = 0; i <= 16; ++i) more.push_back(pt(0.25, 0.75, i / 16.0));
    CHECK(t_sum(more, shear, nets, 3.0, cfg) >= t3 - 1e-15);
  }
}

TEST_CASE("fiber tracing") {
  CoordBox box = CoordBox::unit(1);

  SUBCASE("projection fibers are vertical segments") {
    MapField proj = make_field("projection", {}, 1);
    Eigen::Vector2d w(0.3, 0.4);
    VerticalCurveSamples s = trace_fiber(proj, w, pt(0.3, 0.4, 0.5), box);
    CHECK(s.pts.front().z == 0.0);
    CHECK(s.pts.back().z == 1.0);
    for (const auto& p : s.pts) {
      CHECK(p.h[0] == doctest::Approx(0.3).epsilon(1e-12));
      CHECK(p.h[1] == doctest::Approx(0.4).epsilon(1e-12));
    }
    CHECK(height(s) == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("parabolic fibers satisfy the corrector tolerance") {
    MapField f = make_field("parabolic", {0.05, 0.08}, 1);
    Eigen::Vector2d w(0.5, 0.5);
    VerticalCurveSamples s = trace_fiber(f, w, pt(0.5, 0.5, 0.5), box);
    CHECK(s.pts.size() >= 8);
    for (const auto& p : s.pts) {
      CHECK((f.eval(p) - w).norm() <= 1e-10);
    }
    CHECK(check_vertical(s).ok);
  }

  SUBCASE("near-identity fields obey the projection drift bound") {
    // with sup ||D_H f - id|| = c on the box, increments of f - pi are
    // bounded by 3 c d(x, y)
    double a = 0.05;
    MapField f = make_field("shear", {a}, 1);
    double c = 0.0;
    for (double x : {0.0, 0.5, 1.0}) {
      for (double y : {0.0, 0.5, 1.0}) {
        for (double z : {0.0, 0.5, 1.0}) {
          Eigen::Matrix2d J = horizontal_jacobian(f, pt(x, y, z));
          c = std::max(c, (J - Eigen::Matrix2d::Identity()).operatorNorm());
        }
      }
    }
    VerticalCurveSamples s = trace_fiber(f, Eigen::Vector2d(0.5, 0.5), pt(0.5, 0.5, 0.5), box);
    for (std::size_t i = 0; i + 1 < s.pts.size(); ++i) {
      Eigen::Vector2d drift = (f.eval(s.pts[i]) - s.pts[i].h) -
                              (f.eval(s.pts[i + 1]) - s.pts[i + 1].h);
      CHECK(drift.norm() <= 3 * c * kor_dist(s.pts[i], s.pts[i + 1]) + 1e-12);
    }
  }

  SUBCASE("traced fibers agree with the box-count oracle") {
    MapField f = make_field("parabolic", {0.05, 0.08}, 1);
    TraceConfig tc;
    tc.step = 1.0 / 4096;
    tc.max_step = 1.0 / 4096;
    VerticalCurveSamples s = trace_fiber(f, Eigen::Vector2d(0.5, 0.5), pt(0.5, 0.5, 0.5), box, tc);
    FiberMeasure m = fiber_measure(s);
    REQUIRE(m.defined);
    BoxCountResult bc = hausdorff2_boxcount(s, {1.0 / 4, 1.0 / 8, 1.0 / 16});
    CHECK(bc.estimate == doctest::Approx(m.measure).epsilon(0.10));
  }

  SUBCASE("vanishing jacobian is rejected") {
    MapField f = make_field("degenerate", {}, 1);
    CHECK_THROWS_AS(trace_fiber(f, Eigen::Vector2d(0.5, 0.0), pt(0.5, 0.5, 0.5), box), TraceError);
  }
}
