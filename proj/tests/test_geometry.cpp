#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <random>

#include "oracles.hpp"
#include "plb/geometry.hpp"

using namespace plb;

TEST_CASE("left frame") {
  Frame f0 = left_frame(0);
  CHECK(f0.a1[0] == Catch::Approx(1));
  CHECK(f0.a1[1] == Catch::Approx(0).margin(1e-15));
  CHECK(f0.a2[0] == Catch::Approx(0).margin(1e-15));
  CHECK(f0.a2[1] == Catch::Approx(1));
  CHECK(f0.a3[2] == 1.0);
  Frame f9 = left_frame(0.5 * kPi);
  CHECK(f9.a1[0] == Catch::Approx(0).margin(1e-15));
  CHECK(f9.a1[1] == Catch::Approx(1));
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> uni(0.0, kTwoPi);
  for (int t = 0; t < 20; ++t) {
    Frame f = left_frame(uni(rng));
    CHECK(f.a1[0] * f.a2[0] + f.a1[1] * f.a2[1] == Catch::Approx(0).margin(1e-14));
  }
}

TEST_CASE("dual hamiltonian") {
  FinslerSpec sym(Model::F0, 1.0), fwd(Model::F0plus, 1.0);
  Point p{0, 0, 0};
  CHECK(dual_hamiltonian(fwd, p, -5, 0) == Catch::Approx(0).margin(1e-15));
  CHECK(dual_hamiltonian(sym, p, 3, 4) == Catch::Approx(5));
  CHECK(dual_hamiltonian(fwd, p, 3, 4) == Catch::Approx(dual_hamiltonian(sym, p, 3, 4)));
  // monotone nondecreasing in p1, even in p3 (forward model)
  double prev = -1;
  for (double p1 = -2; p1 <= 2; p1 += 0.25) {
    double v = dual_hamiltonian(fwd, p, p1, 0.7);
    CHECK(v >= prev - 1e-15);
    prev = v;
    CHECK(dual_hamiltonian(fwd, p, p1, -0.7) == Catch::Approx(v));
  }
}

static Curve straight_curve(double len, int n, double th) {
  Curve c;
  for (int i = 0; i < n; ++i)
    c.samples.push_back({std::cos(th) * len * i / (n - 1),
                         std::sin(th) * len * i / (n - 1), th});
  c.compute_controls(1.0 / (n - 1));
  return c;
}

TEST_CASE("finsler length basics") {
  FinslerSpec spec(Model::F0, 1.0);
  Curve line = straight_curve(10.0, 41, 0.3);
  CHECK(finsler_length(line, spec, 1.0 / 40) == Catch::Approx(10.0).epsilon(1e-6));

  // pure in-place rotation by pi/3
  Curve rot;
  int n = 31;
  for (int i = 0; i < n; ++i) rot.samples.push_back({5, 5, kPi / 3 * i / (n - 1)});
  rot.compute_controls(1.0 / (n - 1));
  CHECK(finsler_length(rot, spec, 1.0 / (n - 1)) == Catch::Approx(kPi / 3).epsilon(1e-6));

  // doubling C doubles the length
  GridSpec g(16, 16, 8);
  FinslerSpec c2(Model::F0, 1.0, RealField(g, 2.0));
  Curve line2 = straight_curve(10.0, 41, 0.0);
  CHECK(finsler_length(line2, c2, 1.0 / 40) ==
        Catch::Approx(2 * finsler_length(line2, spec, 1.0 / 40)).epsilon(1e-9));

  CHECK_THROWS_AS(finsler_length(Curve{}, spec), std::invalid_argument);
}

TEST_CASE("forward-gear infeasibility") {
  FinslerSpec fwd(Model::F0plus, 1.0);
  // walking backwards relative to the orientation
  Curve back;
  int n = 21;
  for (int i = 0; i < n; ++i) back.samples.push_back({10.0 - 0.5 * i, 0, 0});
  back.compute_controls(1.0 / (n - 1));
  CHECK_THROWS_AS(finsler_length(back, fwd, 1.0 / (n - 1)), std::domain_error);
  // forward is fine and equals the symmetric value
  Curve fwd_line = straight_curve(10.0, n, 0.0);
  CHECK_NOTHROW(finsler_length(fwd_line, fwd, 1.0 / (n - 1)));
}

TEST_CASE("controls and horizontality deviation") {
  Curve line = straight_curve(10.0, 41, 0.7);
  for (std::size_t i = 0; i < line.size(); ++i) {
    CHECK(line.u1[i] == Catch::Approx(10.0).epsilon(1e-6));
    CHECK(line.phi[i] == Catch::Approx(0).margin(1e-6));
  }
  // perpendicular walk: phi = pi/2
  Curve perp;
  for (int i = 0; i < 21; ++i) perp.samples.push_back({0, 0.5 * i, 0});
  perp.compute_controls();
  CHECK(perp.phi[10] == Catch::Approx(0.5 * kPi).epsilon(1e-9));
  // anti-parallel walk: phi = pi
  Curve anti;
  for (int i = 0; i < 21; ++i) anti.samples.push_back({20.0 - 0.5 * i, 0, 0});
  anti.compute_controls();
  CHECK(anti.phi[10] == Catch::Approx(kPi).epsilon(1e-9));
  // stationary: phi undefined
  Curve stat;
  for (int i = 0; i < 21; ++i) stat.samples.push_back({5, 5, 0.1 * i});
  stat.compute_controls();
  CHECK_FALSE(phi_defined(stat.phi[10]));
}

TEST_CASE("theta unwrapping in controls") {
  // rotation crossing the 0/2pi seam must give a smooth small u3
  Curve c;
  for (int i = 0; i < 21; ++i)
    c.samples.push_back({0, 0, wrap_2pi(-0.1 + 0.01 * i)});
  c.compute_controls();
  for (std::size_t i = 0; i < c.size(); ++i)
    CHECK(c.u3[i] == Catch::Approx(0.01).epsilon(1e-9));
}

TEST_CASE("cusp detection vs brute-force sign scan") {
  // forward then reversed segment: one cusp at the junction
  Curve c;
  for (int i = 0; i <= 20; ++i) c.samples.push_back({double(i), 0, 0});
  for (int i = 1; i <= 20; ++i) c.samples.push_back({20.0 - i, 0, 0});
  c.compute_controls();
  auto cusps = detect_cusps(c);
  REQUIRE(cusps.size() == 1);
  CHECK(cusps[0] == Catch::Approx(0.5).margin(0.05));

  // straight forward: none
  Curve line = straight_curve(10.0, 41, 0.0);
  CHECK(detect_cusps(line).empty());

  // randomized control sequences against the brute-force oracle
  std::mt19937 rng(17);
  std::uniform_int_distribution<int> seg(4, 12);
  std::uniform_real_distribution<double> mag(0.5, 2.0);
  for (int trial = 0; trial < 30; ++trial) {
    Curve r;
    double x = 0;
    int sign = rng() % 2 ? 1 : -1;
    std::vector<int> lens;
    for (int s = 0; s < 4; ++s) lens.push_back(seg(rng));
    r.samples.push_back({x, 0, 0});
    for (int s = 0; s < 4; ++s) {
      double step = sign * mag(rng);
      for (int i = 0; i < lens[s]; ++i) {
        x += step;
        r.samples.push_back({x, 0, 0});
      }
      sign = -sign;
    }
    r.compute_controls();
    double maxu = 0;
    for (double u : r.u1) maxu = std::max(maxu, std::abs(u));
    auto lib = detect_cusps(r);
    auto ref = oracle::sign_change_scan(r.u1, 0.05 * maxu, 3);
    CHECK(lib.size() == ref.size());
  }
}

TEST_CASE("antipodal time reversal preserves length under symmetric cost") {
  GridSpec g(24, 24, 16);
  RealField cost = oracle::random_symmetric_cost(g, 0.3, 99);
  FinslerSpec spec(Model::F0, 1.3, cost);
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> uni(4.0, 19.0);
  std::uniform_real_distribution<double> ang(0.0, kTwoPi);
  for (int trial = 0; trial < 10; ++trial) {
    Curve c;
    int n = 25;
    double x0 = uni(rng), y0 = uni(rng), th0 = ang(rng);
    for (int i = 0; i < n; ++i) {
      double t = double(i) / (n - 1);
      c.samples.push_back({x0 + 3 * std::sin(2 * t + th0),
                           y0 + 3 * std::cos(3 * t), wrap_2pi(th0 + t)});
    }
    c.compute_controls(1.0 / (n - 1));
    Curve rev;
    for (int i = n - 1; i >= 0; --i) rev.samples.push_back(antipode(c.samples[i]));
    rev.compute_controls(1.0 / (n - 1));
    double la = finsler_length(c, spec, 1.0 / (n - 1));
    double lb = finsler_length(rev, spec, 1.0 / (n - 1));
    CHECK(la == Catch::Approx(lb).margin(1e-10));
  }
}

TEST_CASE("curve csv round trip") {
  Curve c = straight_curve(10.0, 11, 0.4);
  save_curve_csv("test_curve.csv", c);
  Curve back = load_curve_csv("test_curve.csv");
  REQUIRE(back.size() == c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK(back.samples[i].x == Catch::Approx(c.samples[i].x).margin(1e-5));
    CHECK(back.samples[i].y == Catch::Approx(c.samples[i].y).margin(1e-5));
    CHECK(back.samples[i].th == Catch::Approx(c.samples[i].th).margin(1e-5));
  }
  std::remove("test_curve.csv");
}
