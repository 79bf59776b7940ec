#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "plb/synthgen.hpp"

using namespace plb;

namespace {

SceneSpec clean_two_bar_spec() {
  SceneSpec spec;
  spec.nx = 128;
  spec.ny = 128;
  spec.rough_amp = 0;
  spec.noise_sigma = 0;
  spec.attenuation = 1.0;
  spec.bars.push_back({64, 44, 50, 12, 0.0, 1});        // horizontal, top
  spec.bars.push_back({64, 80, 44, 12, 0.5 * kPi, 0});  // vertical, bottom
  return spec;
}

}  // namespace

TEST_CASE("scene generation is deterministic") {
  SceneSpec spec = clean_two_bar_spec();
  spec.rough_amp = 0.8;
  spec.noise_sigma = 0.02;
  Scene a = generate(spec), b = generate(spec);
  CHECK(a.image.v == b.image.v);
  REQUIRE(a.gt.size() == b.gt.size());
  for (std::size_t i = 0; i < a.gt.size(); ++i) CHECK(a.gt[i] == b.gt[i]);

  spec.seed = 2;
  Scene c = generate(spec);
  CHECK(a.image.v != c.image.v);
}

TEST_CASE("scene spec validation") {
  SceneSpec spec = clean_two_bar_spec();
  spec.bars.clear();
  CHECK_THROWS_AS(generate(spec), std::invalid_argument);

  spec = clean_two_bar_spec();
  spec.bars[0].cx = 10;  // long bar pushed against the border
  CHECK_THROWS_AS(generate(spec), std::invalid_argument);
}

TEST_CASE("noiseless scenes are piecewise constant with exact outlines") {
  SceneSpec spec = clean_two_bar_spec();
  spec.corner_frac = 0;  // sharp rectangles
  Scene sc = generate(spec);

  // bar interiors carry the full intensity, the far background its own level
  CHECK(sc.image.at(64, 44) == Catch::Approx(spec.top_intensity).margin(1e-9));
  CHECK(sc.image.at(64, 80) == Catch::Approx(spec.top_intensity).margin(1e-9));
  CHECK(sc.image.at(8, 8) == Catch::Approx(spec.background).margin(1e-9));
  for (double v : sc.image.v) {
    CHECK(v >= spec.background - 1e-12);
    CHECK(v <= spec.top_intensity + 1e-12);
  }

  // ground truth of the first bar is the exact rectangle outline
  REQUIRE(sc.gt.size() == 2);
  double minx = kInf, maxx = -kInf, miny = kInf, maxy = -kInf;
  for (const auto& p : sc.gt[0]) {
    minx = std::min(minx, p[0]);
    maxx = std::max(maxx, p[0]);
    miny = std::min(miny, p[1]);
    maxy = std::max(maxy, p[1]);
  }
  CHECK(minx == Catch::Approx(64 - 25.0).margin(1e-6));
  CHECK(maxx == Catch::Approx(64 + 25.0).margin(1e-6));
  CHECK(miny == Catch::Approx(44 - 6.0).margin(1e-6));
  CHECK(maxy == Catch::Approx(44 + 6.0).margin(1e-6));
  for (const auto& p : sc.gt[0]) {
    bool on_x = std::abs(p[0] - minx) < 1e-6 || std::abs(p[0] - maxx) < 1e-6;
    bool on_y = std::abs(p[1] - miny) < 1e-6 || std::abs(p[1] - maxy) < 1e-6;
    CHECK((on_x || on_y));
  }
}

TEST_CASE("ground truth lies on the intensity discontinuities") {
  SceneSpec spec = clean_two_bar_spec();
  spec.rough_amp = 0.6;  // perturbed outline must still track the edge
  spec.noise_sigma = 0;
  Scene sc = generate(spec);

  Image grad(spec.nx, spec.ny, 0.0);
  for (int j = 1; j + 1 < spec.ny; ++j)
    for (int i = 1; i + 1 < spec.nx; ++i)
      grad.at(i, j) = std::hypot(
          0.5 * (sc.image.at(i + 1, j) - sc.image.at(i - 1, j)),
          0.5 * (sc.image.at(i, j + 1) - sc.image.at(i, j - 1)));

  double jump = spec.top_intensity - spec.background;
  for (const auto& poly : sc.gt)
    for (const auto& p : poly) {
      double best = 0;
      for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) {
          int x = int(std::lround(p[0])) + di, y = int(std::lround(p[1])) + dj;
          if (x >= 0 && y >= 0 && x < spec.nx && y < spec.ny)
            best = std::max(best, grad.at(x, y));
        }
      CHECK(best >= 0.2 * jump);
    }
}

TEST_CASE("layering: occlusion and attenuation") {
  SceneSpec spec;
  spec.nx = 128;
  spec.ny = 128;
  spec.rough_amp = 0;
  spec.noise_sigma = 0;
  spec.attenuation = 0.5;
  // crossing bars through the center: vertical on top, horizontal below
  spec.bars.push_back({64, 64, 70, 12, 0.5 * kPi, 1});
  spec.bars.push_back({64, 64, 70, 12, 0.0, 0});
  Scene sc = generate(spec);

  // overlap shows the top layer, unoccluded bottom shows the attenuated level
  CHECK(sc.image.at(64, 64) == Catch::Approx(spec.top_intensity).margin(1e-9));
  CHECK(sc.image.at(90, 64) ==
        Catch::Approx(spec.attenuation * spec.top_intensity).margin(1e-9));
  CHECK(sc.image.at(64, 90) == Catch::Approx(spec.top_intensity).margin(1e-9));
  CHECK(sc.layer == std::vector<int>{1, 0});
}

TEST_CASE("edge roughness perturbs the outline by the requested amplitude") {
  SceneSpec spec = clean_two_bar_spec();
  Scene flat = generate(spec);
  spec.rough_amp = 1.5;
  Scene rough = generate(spec);
  REQUIRE(flat.gt[0].size() == rough.gt[0].size());
  double worst = 0, mean = 0;
  for (std::size_t i = 0; i < flat.gt[0].size(); ++i) {
    double d = std::hypot(rough.gt[0][i][0] - flat.gt[0][i][0],
                          rough.gt[0][i][1] - flat.gt[0][i][1]);
    worst = std::max(worst, d);
    mean += d;
  }
  mean /= double(flat.gt[0].size());
  CHECK(worst > 0.5);
  CHECK(worst < 8 * spec.rough_amp);  // band-limited, not wild
  CHECK(mean > 0.2);
}

TEST_CASE("presets cover the width and height sweeps") {
  for (double w : {8.0, 12.0, 16.0})
    for (double h : {5.0, 15.0, 25.0, 40.0}) {
      char name[32];
      std::snprintf(name, sizeof name, "cd%.0f-h%.0f", w, h);
      SceneSpec spec = preset_scene(name);
      REQUIRE(spec.bars.size() == 4);
      for (const Bar& b : spec.bars) CHECK(b.width == w);
      CHECK(spec.attenuation ==
            Catch::Approx(attenuation_for_height(h)).margin(1e-12));
      CHECK_NOTHROW(generate(spec));  // margins hold for every preset
    }
  // attenuation proxy is monotone in height
  CHECK(attenuation_for_height(5) == Catch::Approx(0.9));
  CHECK(attenuation_for_height(40) == Catch::Approx(0.2));
  CHECK(attenuation_for_height(15) > attenuation_for_height(25));

  CHECK_THROWS_AS(preset_scene("cd9-h5"), std::invalid_argument);
  CHECK_THROWS_AS(preset_scene("bogus"), std::invalid_argument);
}
