#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <random>

#include "plb/grid.hpp"

using namespace plb;

TEST_CASE("angle wrapping") {
  CHECK(wrap_2pi(0.0) == 0.0);
  CHECK(wrap_2pi(kTwoPi) == Catch::Approx(0.0).margin(1e-15));
  CHECK(wrap_2pi(-0.1) == Catch::Approx(kTwoPi - 0.1));
  CHECK(wrap_pi(kPi + 0.1) == Catch::Approx(-kPi + 0.1));
  CHECK(wrap_pi(-kPi - 0.1) == Catch::Approx(kPi - 0.1));
}

TEST_CASE("grid spec invariants") {
  GridSpec g(8, 8, 16);
  CHECK(g.dtheta() == Catch::Approx(kTwoPi / 16));
  CHECK(g.size() == 8u * 8u * 16u);
  CHECK_THROWS_AS(GridSpec(8, 8, 15), std::invalid_argument);
  CHECK_THROWS_AS(GridSpec(0, 8, 16), std::invalid_argument);
  // theta slowest, x fastest
  CHECK(g.index(1, 0, 0) == 1u);
  CHECK(g.index(0, 1, 0) == 8u);
  CHECK(g.index(0, 0, 1) == 64u);
}

TEST_CASE("antipode") {
  Point p{5, 5, 0};
  Point q = antipode(p);
  CHECK(q.th == Catch::Approx(kPi));
  Point r{1, 2, 1.5 * kPi};
  CHECK(antipode(r).th == Catch::Approx(0.5 * kPi));
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> uni(0.0, kTwoPi);
  for (int t = 0; t < 50; ++t) {
    Point a{1, 1, uni(rng)};
    Point b = antipode(antipode(a));
    CHECK(wrap_2pi(b.th) == Catch::Approx(wrap_2pi(a.th)).margin(1e-12));
  }
}

TEST_CASE("interpolation node exactness and linear reproduction") {
  GridSpec g(6, 5, 8);
  RealField f(g);
  f.at(2, 3, 4) = 7.0;
  CHECK(f.interp({2, 3, g.theta(4)}) == Catch::Approx(7.0));

  RealField c(g, 3.25);
  CHECK(c.interp({1.7, 2.2, 1.234}) == Catch::Approx(3.25));

  RealField lin(g);
  for (int k = 0; k < g.nt; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) lin.at(i, j, k) = i;
  CHECK(lin.interp({3.5, 2, 0.3}) == Catch::Approx(3.5));

  CHECK_THROWS_AS(lin.interp({-0.5, 2, 0}), std::domain_error);
  CHECK_THROWS_AS(lin.interp({2, 10, 0}), std::domain_error);
}

TEST_CASE("theta periodicity of interpolation") {
  GridSpec g(4, 4, 8);
  RealField f(g);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (auto& x : f.v) x = uni(rng);
  for (int t = 0; t < 20; ++t) {
    double th = uni(rng) * kTwoPi;
    double a = f.interp({1.3, 2.1, th});
    double b = f.interp({1.3, 2.1, th + kTwoPi});
    // th + 2*pi is itself rounded, so demand agreement to the last few ulps
    CHECK(a == Catch::Approx(b).margin(1e-12));
  }
}

TEST_CASE("antipodal field reflection") {
  GridSpec g(3, 3, 8);
  RealField f(g);
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i) f.at(i, j, 0) = 1.0;  // indicator of layer 0
  RealField r = antipodal_reflect(f);
  CHECK(r.at(1, 1, 4) == 1.0);
  CHECK(r.at(1, 1, 0) == 0.0);
  RealField rr = antipodal_reflect(r);
  for (std::size_t n = 0; n < f.v.size(); ++n) CHECK(rr.v[n] == f.v[n]);

  RealField cst(g, 2.0);
  RealField crf = antipodal_reflect(cst);
  for (double x : crf.v) CHECK(x == 2.0);
}

TEST_CASE("field serialization round-trips bit-exactly") {
  GridSpec g(5, 4, 6);
  RealField f(g);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> uni(-5.0, 5.0);
  for (auto& x : f.v) x = float(uni(rng));  // float-representable values
  std::string path = "test_grid_field.bin";
  save_field(path, f);
  RealField f2 = load_field(path);
  REQUIRE(f2.grid == g);
  for (std::size_t n = 0; n < f.v.size(); ++n) CHECK(f2.v[n] == f.v[n]);

  ComplexField c(g);
  for (auto& z : c.v) z = {float(uni(rng)), float(uni(rng))};
  save_field(path, c);
  ComplexField c2 = load_field_complex(path);
  REQUIRE(c2.grid == g);
  for (std::size_t n = 0; n < c.v.size(); ++n) CHECK(c2.v[n] == c.v[n]);

  CHECK_THROWS_AS(load_field(path), std::runtime_error);
  save_field(path, f);
  CHECK_THROWS_AS(load_field_complex(path), std::runtime_error);
  std::remove(path.c_str());
}
