#include <doctest.h>

#include <random>

#include "heislab/heis.hpp"

using namespace heis;

namespace {

// dyadic-valued coordinates keep group products exact
HeisPoint random_point(std::mt19937_64& rng, int n = 1) {
  std::uniform_int_distribution<int> c(-32, 32);
  Eigen::VectorXd h(2 * n);
  for (int i = 0; i < 2 * n; ++i) h[i] = c(rng) / 16.0;
  return HeisPoint(h, c(rng) / 16.0);
}

HeisPoint pt(double x, double y, double z) { return HeisPoint(Eigen::Vector2d(x, y), z); }

bool same(const HeisPoint& a, const HeisPoint& b) { return a.h == b.h && a.z == b.z; }

}  // namespace

TEST_CASE("group law") {
  CHECK(same(mul(pt(1, 0, 0), pt(0, 1, 0)), pt(1, 1, 0.5)));
  CHECK(same(mul(pt(0, 1, 0), pt(1, 0, 0)), pt(1, 1, -0.5)));
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    HeisPoint p = random_point(rng);
    CHECK(same(mul(p, identity(1)), p));
    CHECK(same(mul(identity(1), p), p));
  }
  CHECK_THROWS_AS(mul(pt(0, 0, 0), identity(2)), std::invalid_argument);
}

TEST_CASE("inverse") {
  CHECK(same(inv(pt(1, 2, 3)), pt(-1, -2, -3)));
  CHECK(same(inv(identity(1)), identity(1)));
  std::mt19937_64 rng(5);
  for (int i = 0; i < 10000; ++i) {
    HeisPoint a = random_point(rng);
    CHECK(same(mul(inv(a), a), identity(1)));
    CHECK(same(mul(a, inv(a)), identity(1)));
  }
}

TEST_CASE("group axioms exact on dyadic inputs") {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 10000; ++i) {
    HeisPoint a = random_point(rng), b = random_point(rng), c = random_point(rng);
    CHECK(same(mul(mul(a, b), c), mul(a, mul(b, c))));
  }
  // and for n = 2
  for (int i = 0; i < 1000; ++i) {
    HeisPoint a = random_point(rng, 2), b = random_point(rng, 2), c = random_point(rng, 2);
    CHECK(same(mul(mul(a, b), c), mul(a, mul(b, c))));
  }
}

TEST_CASE("symplectic form") {
  CHECK(omega(Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)) == 1.0);
  Eigen::Vector4d u(1, 2, 3, 4), v(5, 6, 7, 8);
  CHECK(omega(u, v) == -8.0);
  std::mt19937_64 rng(29);
  for (int i = 0; i < 100; ++i) {
    Eigen::VectorXd w = random_point(rng, 2).h;
    CHECK(omega(w, w) == 0.0);
  }
  CHECK_THROWS_AS(omega(Eigen::Vector2d(1, 0), Eigen::Vector4d(1, 0, 0, 0)),
                  std::invalid_argument);
}

TEST_CASE("gauge norm") {
  CHECK(kor_norm(pt(0, 0, 1)) == 2.0);
  CHECK(kor_norm(pt(1, 0, 0)) == 1.0);
  CHECK(kor_norm(pt(1, 1, 0.5)) == doctest::Approx(std::pow(8.0, 0.25)).epsilon(1e-14));
}

TEST_CASE("metric axioms") {
  std::mt19937_64 rng(31);
  CHECK(kor_dist(identity(1), vertical_unit(1)) == 2.0);
  for (int i = 0; i < 10000; ++i) {
    HeisPoint p = random_point(rng), q = random_point(rng), r = random_point(rng);
    double pq = kor_dist(p, q);
    CHECK(pq >= 0.0);
    CHECK(pq == kor_dist(q, p));
    CHECK(kor_dist(p, p) == 0.0);
    if (!same(p, q)) CHECK(pq > 0.0);
    CHECK(kor_dist(p, r) <= pq + kor_dist(q, r) + 1e-12);
  }
}

TEST_CASE("left invariance and homogeneity") {
  std::mt19937_64 rng(37);
  for (int i = 0; i < 10000; ++i) {
    HeisPoint g = random_point(rng), p = random_point(rng), q = random_point(rng);
    CHECK(kor_dist(mul(g, p), mul(g, q)) == doctest::Approx(kor_dist(p, q)).epsilon(1e-12));
    CHECK(kor_norm(dilate(3.0, p)) == doctest::Approx(3.0 * kor_norm(p)).epsilon(1e-12));
  }
}

TEST_CASE("dilation") {
  CHECK(same(dilate(2, pt(1, 1, 1)), pt(2, 2, 4)));
  HeisPoint p = pt(0.5, -1, 0.25);
  CHECK(same(dilate(1, p), p));
  CHECK_THROWS_AS(dilate(0, p), std::invalid_argument);
  CHECK_THROWS_AS(dilate(-2, p), std::invalid_argument);
}

TEST_CASE("cc upper bound sandwich") {
  CHECK(cc_upper_bound(pt(0, 0, 1)) == 4.0);
  CHECK(cc_upper_bound(pt(0, 0, 1)) <= 3 * kor_norm(pt(0, 0, 1)));
  CHECK(cc_upper_bound(pt(1, 0, 0)) == 1.0);
  std::mt19937_64 rng(41);
  for (int i = 0; i < 10000; ++i) {
    HeisPoint p = random_point(rng);
    double bound = cc_upper_bound(p);
    CHECK(kor_norm(p) <= bound + 1e-12);
    CHECK(bound <= 3 * kor_norm(p) + 1e-12);
  }
}

TEST_CASE("vertical cone") {
  VConeSpec cone(2.0);
  CHECK(in_vcone(identity(1), pt(0, 0, 1), cone));
  CHECK_FALSE(in_vcone(identity(1), pt(1, 0, 1), cone));
  CHECK(in_vcone(identity(1), pt(0.5, 0, 1), cone));
  CHECK_THROWS_AS(VConeSpec(-1.0), std::invalid_argument);

  SUBCASE("sign restriction") {
    VConeSpec plus(2.0, VConeSpec::Sign::plus);
    VConeSpec minus(2.0, VConeSpec::Sign::minus);
    CHECK(in_vcone(identity(1), pt(0, 0, 1), plus));
    CHECK_FALSE(in_vcone(identity(1), pt(0, 0, -1), plus));
    CHECK(in_vcone(identity(1), pt(0, 0, -1), minus));
  }

  SUBCASE("dilation invariance") {
    std::mt19937_64 rng(43);
    for (int i = 0; i < 2000; ++i) {
      HeisPoint q = random_point(rng);
      for (double r : {0.25, 0.5, 2.0, 7.5}) {
        CHECK(in_vcone(identity(1), q, cone) == in_vcone(identity(1), dilate(r, q), cone));
      }
    }
  }
}

TEST_CASE("vertical order") {
  CHECK(precedes(identity(1), vertical_unit(1)));
  CHECK_FALSE(precedes(vertical_unit(1), identity(1)));
  std::mt19937_64 rng(47);
  for (int i = 0; i < 10000; ++i) {
    HeisPoint g = random_point(rng), h = random_point(rng);
    if (mul(inv(g), h).z != 0.0) {
      CHECK(precedes(g, h) != precedes(h, g));
    }
  }
}
