#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "plb/snakes.hpp"

using namespace plb;

namespace {

// circle contour of radius r about (cx, cy); theta = tangent + skew
Curve circle_contour(int n, double cx, double cy, double r, double skew = 0.0) {
  Curve c;
  c.samples.resize(n);
  for (int i = 0; i < n; ++i) {
    double b = kTwoPi * i / n;
    c.samples[i] = {cx + r * std::cos(b), cy + r * std::sin(b),
                    wrap_2pi(b + 0.5 * kPi + skew)};
  }
  c.compute_controls();
  return c;
}

// orientation score whose real part is the same image on every layer
OrientationScore flat_score(const Image& img, int nt = 12) {
  OrientationScore sc;
  sc.U = ComplexField(GridSpec(img.nx, img.ny, nt));
  for (int k = 0; k < nt; ++k)
    for (int j = 0; j < img.ny; ++j)
      for (int i = 0; i < img.nx; ++i)
        sc.U.at(i, j, k) = {img.at(i, j), 0.0};
  return sc;
}

int count_mode(const std::vector<Segment>& segs, SegmentMode m) {
  int c = 0;
  for (const auto& s : segs)
    if (s.mode == m) ++c;
  return c;
}

}  // namespace

TEST_CASE("horizontality split: runs, switches, degenerate inputs") {
  const double alpha = 3.0 * kTwoPi / 48.0;

  SECTION("tangent-aligned loop is one spatial segment") {
    Curve c = circle_contour(48, 24, 24, 10);
    auto segs = split_by_horizontality(c, alpha);
    REQUIRE(segs.size() == 1);
    CHECK(segs[0].mode == SegmentMode::spatial);
    CHECK(segs[0].count == 48);
  }

  SECTION("one vertical jog of 5 samples gives exactly two switches") {
    Curve c = circle_contour(40, 24, 24, 10);
    for (int i = 10; i < 15; ++i)
      c.samples[i].th = wrap_2pi(c.samples[i].th + 0.5 * kPi);
    c.compute_controls();
    auto segs = split_by_horizontality(c, alpha);
    // two segments around the loop = two mode switches
    REQUIRE(segs.size() == 2);
    CHECK(count_mode(segs, SegmentMode::spatial) == 1);
    CHECK(count_mode(segs, SegmentMode::geodesic) == 1);
    for (const auto& s : segs)
      if (s.mode == SegmentMode::geodesic) {
        CHECK(s.begin == 10);
        CHECK(s.count == 5);
      }
  }

  SECTION("alpha = pi marks everything spatial") {
    Curve c = circle_contour(40, 24, 24, 10, 1.1);  // badly skewed lift
    auto segs = split_by_horizontality(c, kPi);
    REQUIRE(segs.size() == 1);
    CHECK(segs[0].mode == SegmentMode::spatial);
  }

  SECTION("antiparallel lift still counts as horizontal") {
    Curve c = circle_contour(40, 24, 24, 10, kPi);  // theta = tangent + pi
    auto segs = split_by_horizontality(c, alpha);
    REQUIRE(segs.size() == 1);
    CHECK(segs[0].mode == SegmentMode::spatial);
  }

  SECTION("short contour collapses to a single geodesic segment") {
    Curve c;
    c.samples = {{1, 1, 0}, {2, 1, 0}, {3, 1, 0}};
    c.compute_controls();
    auto segs = split_by_horizontality(c, alpha);
    REQUIRE(segs.size() == 1);
    CHECK(segs[0].mode == SegmentMode::geodesic);
    CHECK(segs[0].count == 3);
  }

  SECTION("partition covers the loop exactly once") {
    Curve c = circle_contour(40, 24, 24, 10);
    for (int i = 5; i < 9; ++i) c.samples[i].th = wrap_2pi(c.samples[i].th + 1.0);
    for (int i = 20; i < 31; ++i)
      c.samples[i].th = wrap_2pi(c.samples[i].th + 1.3);
    c.compute_controls();
    auto segs = split_by_horizontality(c, alpha);
    CHECK(segs.size() % 2 == 0);  // even number of switches
    std::vector<int> hit(40, 0);
    int expect = segs[0].begin;
    for (const auto& s : segs) {
      CHECK(s.begin == expect);
      for (int q = 0; q < s.count; ++q) ++hit[(s.begin + q) % 40];
      expect = (s.begin + s.count) % 40;
    }
    CHECK(expect == segs[0].begin);
    for (int h : hit) CHECK(h == 1);
  }

  SECTION("missing controls are rejected") {
    Curve c;
    c.samples.resize(10, {0, 0, 0});
    CHECK_THROWS_AS(split_by_horizontality(c, alpha), std::invalid_argument);
  }
}

TEST_CASE("spatial refinement snaps to the nearest edge response") {
  // two horizontal step edges: a strong one at y = 32, a second at y = 26
  const int nx = 64, ny = 48;
  Image img(nx, ny, 0.0);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      img.at(i, j) = (j >= 32 ? 1.0 : (j >= 26 ? 0.5 : 0.0));
  OrientationScore sc = flat_score(img);

  SnakeParams params;
  params.scan_radius = 5.0;

  // samples all with theta = 0, so the scan normal is +y
  Curve c;
  c.samples = {
      {12, 32, 0},  // edge exactly at lambda = 0
      {20, 30, 0},  // edges at +2 and -4: must pick +2
      {28, 10, 0},  // flat neighborhood: no response in [-r, r]
      {36, 33, 0},  // near the edge, pulled back to it
      {44, 32, 0},  // geodesic-mode sample: must not move
  };
  c.compute_controls();
  std::vector<Segment> segs = {{0, 4, SegmentMode::spatial},
                               {4, 1, SegmentMode::geodesic}};
  RefineResult res = spatial_refine(c, segs, sc, params);
  REQUIRE(res.samples.size() == 5);
  REQUIRE(res.moved.size() == 5);

  CHECK(res.moved[0]);
  CHECK(res.samples[0].y == Catch::Approx(32.0).margin(0.5));

  CHECK(res.moved[1]);
  CHECK(res.samples[1].y == Catch::Approx(32.0).margin(0.5));  // lambda = +2

  CHECK_FALSE(res.moved[2]);
  CHECK(res.samples[2].y == 10.0);

  CHECK(res.moved[3]);
  CHECK(res.samples[3].y == Catch::Approx(32.0).margin(0.5));

  CHECK_FALSE(res.moved[4]);
  CHECK(res.samples[4].y == 32.0);

  // x is untouched (displacement is along the normal) and the displacement
  // never exceeds the scan radius
  for (int i = 0; i < 5; ++i) {
    CHECK(res.samples[i].x == c.samples[i].x);
    CHECK(std::abs(res.samples[i].y - c.samples[i].y) <=
          params.scan_radius + 1e-9);
  }
}

TEST_CASE("initial contours from component labelings") {
  SECTION("rectangle outline visits all four side orientations") {
    GridSpec g(48, 48, 16);
    ComponentLabeling lab;
    lab.labels = Field3<std::int32_t>(g, 0);
    lab.n = 1;
    for (int i = 10; i <= 36; ++i)
      for (int k : {0, 8}) {
        lab.labels.at(i, 10, k) = 1;
        lab.labels.at(i, 36, k) = 1;
      }
    for (int j = 10; j <= 36; ++j)
      for (int k : {4, 12}) {
        lab.labels.at(10, j, k) = 1;
        lab.labels.at(36, j, k) = 1;
      }
    auto out = initial_contours(lab);
    REQUIRE(out.size() == 1);
    CHECK(out[0].component == 1);
    const Curve& c = out[0].curve;
    REQUIRE(c.samples.size() >= 40);
    // closed ordered loop: consecutive samples (cyclically) stay adjacent
    int n = int(c.samples.size());
    for (int i = 0; i < n; ++i) {
      const Point& a = c.samples[i];
      const Point& b = c.samples[(i + 1) % n];
      CHECK(std::hypot(b.x - a.x, b.y - a.y) <= 2.5);
    }
    // every side orientation 0, pi/2, pi, 3pi/2 appears on the lifted loop
    for (double target : {0.0, 0.5 * kPi, kPi, 1.5 * kPi}) {
      double best = kInf;
      for (const Point& p : c.samples)
        best = std::min(best, std::abs(wrap_pi(p.th - target)));
      CHECK(best <= 0.35);
    }
  }

  SECTION("disc with tangential occupancy lifts near-horizontally") {
    GridSpec g(48, 48, 16);
    ComponentLabeling lab;
    lab.labels = Field3<std::int32_t>(g, 0);
    lab.n = 1;
    const double r = 12.0;
    for (int s = 0; s < 256; ++s) {
      double b = kTwoPi * s / 256;
      int i = int(std::lround(24 + r * std::cos(b)));
      int j = int(std::lround(24 + r * std::sin(b)));
      double tang = wrap_2pi(b + 0.5 * kPi);
      for (int k = 0; k < g.nt; ++k) {
        double d = std::min(std::abs(wrap_pi(g.theta(k) - tang)),
                            std::abs(wrap_pi(g.theta(k) - tang - kPi)));
        if (d <= 0.5 * g.dtheta() + 1e-9) lab.labels.at(i, j, k) = 1;
      }
    }
    auto out = initial_contours(lab);
    REQUIRE(out.size() == 1);
    const Curve& c = out[0].curve;
    int defined = 0, horiz = 0;
    for (double p : c.phi) {
      if (!phi_defined(p)) continue;
      ++defined;
      if (std::min(p, kPi - p) <= 0.45) ++horiz;
    }
    REQUIRE(defined > 0);
    CHECK(double(horiz) / defined >= 0.9);
  }

  SECTION("empty labeling yields no contours") {
    ComponentLabeling lab;
    lab.labels = Field3<std::int32_t>(GridSpec(16, 16, 8), 0);
    lab.n = 0;
    CHECK(initial_contours(lab).empty());
  }
}

namespace {

// closed test loop with one geodesic gap whose true connection is a
// quarter-circle ridge from (16,16,theta=0) to (32,32,theta=pi/2)
struct GapScene {
  Curve initial;
  std::vector<Segment> segments;
  RefineResult refined;
  RealField cost;

  GapScene() : cost(GridSpec(48, 48, 32), 1.0) {
    const GridSpec& g = cost.grid;
    // low-cost tube along the arc p(t) = (16 + 16 sin t, 32 - 16 cos t),
    // tangent orientation t, antipodally symmetric
    for (int s = 0; s <= 600; ++s) {
      double t = 0.5 * kPi * s / 600;
      double cx = 16 + 16 * std::sin(t), cy = 32 - 16 * std::cos(t);
      for (int k = 0; k < g.nt; ++k) {
        double d = std::min(std::abs(wrap_pi(g.theta(k) - t)),
                            std::abs(wrap_pi(g.theta(k) - t - kPi)));
        if (d > 2.0 * g.dtheta() + 1e-9) continue;
        for (int dj = -2; dj <= 2; ++dj)
          for (int di = -2; di <= 2; ++di) {
            if (di * di + dj * dj > 6) continue;
            int x = int(std::lround(cx)) + di, y = int(std::lround(cy)) + dj;
            if (x >= 0 && y >= 0 && x < g.nx && y < g.ny)
              cost.at(x, y, k) = 0.05;
          }
      }
    }

    auto& sm = initial.samples;
    for (int s = 0; s <= 8; ++s) sm.push_back({8.0 + s, 16, 0});  // 0..8
    sm.push_back({18, 16, 0});                                    // 9..12: gap
    sm.push_back({24, 22, 0.25 * kPi});
    sm.push_back({30, 28, 0.25 * kPi});
    sm.push_back({32, 30, 0.5 * kPi});
    for (int s = 0; s <= 8; ++s) sm.push_back({32, 32.0 + s, 0.5 * kPi});
    for (int x = 31; x >= 8; --x) sm.push_back({double(x), 40, kPi});
    for (int y = 39; y >= 17; --y) sm.push_back({8, double(y), 1.5 * kPi});
    initial.compute_controls();

    int n = int(sm.size());
    segments = {{0, 9, SegmentMode::spatial},
                {9, 4, SegmentMode::geodesic},
                {13, 9, SegmentMode::spatial},
                {22, n - 22, SegmentMode::spatial}};
    refined.samples = sm;
    refined.moved.assign(sm.size(), 0);
  }
};

}  // namespace

TEST_CASE("geodesic completion of contour gaps") {
  SECTION("quarter-circle gap follows the low-cost ridge") {
    GapScene sc;
    CompletedContour out = complete_contour(1, sc.initial, sc.segments,
                                            sc.refined, GroupedCost{}, sc.cost);
    CHECK(out.geodesic_gaps == 1);
    CHECK(out.failed_gaps == 0);
    int n_spatial = 9 + 9 + (int(sc.initial.samples.size()) - 22);
    REQUIRE(int(out.contour.samples.size()) > n_spatial);
    // spliced samples sit between the first two spatial runs
    double mean = 0;
    int cnt = 0;
    for (int i = 9; i < int(out.contour.samples.size()) - (n_spatial - 9); ++i) {
      const Point& p = out.contour.samples[i];
      mean += sc.cost.interp_clamped(p.x, p.y, p.th);
      ++cnt;
    }
    REQUIRE(cnt > 0);
    mean /= cnt;
    CHECK(mean <= 1.5 * 0.05);
    // contour stays closed across the splice
    const Point& first = out.contour.samples.front();
    const Point& last = out.contour.samples.back();
    CHECK(std::hypot(first.x - last.x, first.y - last.y) <= 1.0 + 1e-9);
  }

  SECTION("no geodesic segments reproduces the refined input") {
    GapScene sc;
    std::vector<Segment> all = {{0, int(sc.initial.samples.size()),
                                 SegmentMode::spatial}};
    CompletedContour out = complete_contour(1, sc.initial, all, sc.refined,
                                            GroupedCost{}, sc.cost);
    CHECK(out.geodesic_gaps == 0);
    CHECK(out.failed_gaps == 0);
    REQUIRE(out.contour.samples.size() == sc.refined.samples.size());
    for (std::size_t i = 0; i < sc.refined.samples.size(); ++i) {
      CHECK(out.contour.samples[i].x == sc.refined.samples[i].x);
      CHECK(out.contour.samples[i].y == sc.refined.samples[i].y);
    }
  }

  SECTION("fully geodesic loop keeps its initial samples, flagged") {
    GapScene sc;
    std::vector<Segment> all = {{0, int(sc.initial.samples.size()),
                                 SegmentMode::geodesic}};
    CompletedContour out = complete_contour(1, sc.initial, all, sc.refined,
                                            GroupedCost{}, sc.cost);
    CHECK(out.geodesic_gaps == 1);
    CHECK(out.failed_gaps == 1);
    REQUIRE(out.contour.samples.size() == sc.initial.samples.size());
    for (std::size_t i = 0; i < sc.initial.samples.size(); ++i)
      CHECK(out.contour.samples[i].x == sc.initial.samples[i].x);
  }
}
