// Deterministic generator of SEM-like test scenes: overlapping bar structures
// (rounded-rectangle outlines — sharp corners have no orientation sweep and
// are both unrealistic and invisible to orientation-selective filters), with
// band-limited edge roughness, reduced visibility of the bottom layer, pixel
// noise, and the exact perturbed outlines as ground truth.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "grid.hpp"
#include "image.hpp"

namespace plb {

struct Bar {
  double cx = 0, cy = 0;   // center, pixels
  double length = 0, width = 0;
  double orient = 0;       // radians, direction of the long axis
  int layer = 1;           // 0 = bottom (attenuated), 1 = top
};

struct SceneSpec {
  int nx = 128, ny = 128;
  std::vector<Bar> bars;
  double attenuation = 0.9;   // bottom-layer intensity scale (height proxy)
  double top_intensity = 0.9;
  double background = 0.08;
  double rough_amp = 0.5;     // px, std of the boundary perturbation
  double rough_corr = 8.0;    // px, correlation length
  double noise_sigma = 0.02;
  double corner_frac = 0.4;   // corner radius as a fraction of the width
  std::uint32_t seed = 1;
};

struct Scene {
  Image image;
  // one closed ground-truth outline per bar, ordered (x, y) samples
  std::vector<std::vector<std::array<double, 2>>> gt;
  std::vector<int> layer;  // per bar
};

namespace detail {
// Periodic band-limited noise on m samples: white Gaussian circularly
// smoothed to correlation length `corr` (in samples), std normalized to amp.
inline std::vector<double> periodic_gp(int m, double amp, double corr,
                                       std::mt19937& rng) {
  std::vector<double> w(m);
  // Box–Muller on the raw engine for cross-platform determinism
  for (int i = 0; i < m; i += 2) {
    double u1 = (rng() + 0.5) / 4294967296.0;
    double u2 = (rng() + 0.5) / 4294967296.0;
    double r = std::sqrt(-2.0 * std::log(u1));
    w[i] = r * std::cos(kTwoPi * u2);
    if (i + 1 < m) w[i + 1] = r * std::sin(kTwoPi * u2);
  }
  if (amp <= 0) return std::vector<double>(m, 0.0);
  auto k = gauss_kernel(std::max(corr, 0.5));
  int r = int(k.size() / 2);
  std::vector<double> out(m, 0.0);
  for (int i = 0; i < m; ++i) {
    double s = 0;
    for (int d = -r; d <= r; ++d) s += k[d + r] * w[((i + d) % m + m) % m];
    out[i] = s;
  }
  double var = 0, mean = 0;
  for (double x : out) mean += x;
  mean /= m;
  for (double x : out) var += (x - mean) * (x - mean);
  var /= m;
  double sc = var > 0 ? amp / std::sqrt(var) : 0.0;
  for (double& x : out) x = (x - mean) * sc;
  return out;
}

// Closed rounded-rectangle outline sampled at ~step px: points and outward
// normals.
inline void rounded_rect_outline(const Bar& bar, double corner_frac,
                                 double step,
                                 std::vector<std::array<double, 2>>& pts,
                                 std::vector<std::array<double, 2>>& normals) {
  double hl = 0.5 * bar.length, hw = 0.5 * bar.width;
  double rc = std::min(corner_frac * bar.width, std::min(hl, hw) * 0.999);
  double ca = std::cos(bar.orient), sa = std::sin(bar.orient);
  auto emit = [&](double u, double v, double nu, double nv) {
    // (u, v) in bar frame, u along the long axis
    pts.push_back({bar.cx + u * ca - v * sa, bar.cy + u * sa + v * ca});
    double nn = std::hypot(nu, nv);
    normals.push_back({(nu * ca - nv * sa) / nn, (nu * sa + nv * ca) / nn});
  };
  double su = hl - rc, sv = hw - rc;  // straight half-extents
  // four sides + four quarter arcs, counterclockwise in the bar frame
  auto arc = [&](double cu, double cv, double a0, double a1) {
    double len = rc * (a1 - a0);
    int n = std::max(2, int(std::ceil(len / step)));
    for (int i = 0; i < n; ++i) {
      double a = a0 + (a1 - a0) * i / n;
      emit(cu + rc * std::cos(a), cv + rc * std::sin(a), std::cos(a), std::sin(a));
    }
  };
  auto straight = [&](double u0, double v0, double u1, double v1, double nu,
                      double nv) {
    double len = std::hypot(u1 - u0, v1 - v0);
    int n = std::max(1, int(std::ceil(len / step)));
    for (int i = 0; i < n; ++i) {
      double t = double(i) / n;
      emit(u0 + (u1 - u0) * t, v0 + (v1 - v0) * t, nu, nv);
    }
  };
  straight(-su, -hw, su, -hw, 0, -1);
  arc(su, -sv, -0.5 * kPi, 0.0);
  straight(hl, -sv, hl, sv, 1, 0);
  arc(su, sv, 0.0, 0.5 * kPi);
  straight(su, hw, -su, hw, 0, 1);
  arc(-su, sv, 0.5 * kPi, kPi);
  straight(-hl, sv, -hl, -sv, -1, 0);
  arc(-su, -sv, kPi, 1.5 * kPi);
}

// Accumulate per-pixel coverage of a closed polygon by sub-row scanline
// crossings (4 sub-rows per pixel row, exact span coverage along x).
inline void polygon_coverage(const std::vector<std::array<double, 2>>& poly,
                             Image& cov) {
  const int sub = 4;
  std::vector<double> xs;
  for (int j = 0; j < cov.ny; ++j) {
    for (int ss = 0; ss < sub; ++ss) {
      double y = j + (ss + 0.5) / sub - 0.5;
      xs.clear();
      std::size_t m = poly.size();
      for (std::size_t e = 0; e < m; ++e) {
        const auto& a = poly[e];
        const auto& b = poly[(e + 1) % m];
        if ((a[1] <= y) == (b[1] <= y)) continue;
        double t = (y - a[1]) / (b[1] - a[1]);
        xs.push_back(a[0] + t * (b[0] - a[0]));
      }
      std::sort(xs.begin(), xs.end());
      for (std::size_t e = 0; e + 1 < xs.size(); e += 2) {
        double x0 = xs[e], x1 = xs[e + 1];
        int i0 = std::max(0, int(std::floor(x0 + 0.5)));
        int i1 = std::min(cov.nx - 1, int(std::floor(x1 + 0.5)));
        for (int i = i0; i <= i1; ++i) {
          double lo = std::max(x0, i - 0.5), hi = std::min(x1, i + 0.5);
          if (hi > lo) cov.at(i, j) += (hi - lo) / sub;
        }
      }
    }
  }
}
}  // namespace detail

inline Scene generate(const SceneSpec& spec) {
  if (spec.bars.empty())
    throw std::invalid_argument("generate: scene has no bars");
  for (const Bar& b : spec.bars) {
    double margin = 2.0 * b.width;
    double ca = std::abs(std::cos(b.orient)), sa = std::abs(std::sin(b.orient));
    double ex = ca * 0.5 * b.length + sa * 0.5 * b.width;
    double ey = sa * 0.5 * b.length + ca * 0.5 * b.width;
    if (b.cx - ex < margin || b.cx + ex > spec.nx - margin ||
        b.cy - ey < margin || b.cy + ey > spec.ny - margin)
      throw std::invalid_argument("generate: bar violates the 2w margin");
  }

  Scene scene;
  scene.image = Image(spec.nx, spec.ny, spec.background);

  // stable per-bar order: bottom layer first so the top layer paints over
  std::vector<int> order(spec.bars.size());
  for (std::size_t b = 0; b < order.size(); ++b) order[b] = int(b);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return spec.bars[a].layer < spec.bars[b].layer;
  });

  scene.gt.resize(spec.bars.size());
  scene.layer.resize(spec.bars.size());

  for (int bi : order) {
    const Bar& bar = spec.bars[bi];
    scene.layer[bi] = bar.layer;
    std::vector<std::array<double, 2>> pts, normals;
    detail::rounded_rect_outline(bar, spec.corner_frac, 0.5, pts, normals);

    std::mt19937 rng(spec.seed * 7919u + std::uint32_t(bi) * 104729u + 13u);
    auto eta = detail::periodic_gp(int(pts.size()), spec.rough_amp,
                                   spec.rough_corr / 0.5, rng);
    std::vector<std::array<double, 2>> poly(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i)
      poly[i] = {pts[i][0] + eta[i] * normals[i][0],
                 pts[i][1] + eta[i] * normals[i][1]};
    scene.gt[bi] = poly;

    Image cov(spec.nx, spec.ny, 0.0);
    detail::polygon_coverage(poly, cov);
    double intensity = bar.layer == 1 ? spec.top_intensity
                                      : spec.attenuation * spec.top_intensity;
    for (std::size_t n = 0; n < cov.v.size(); ++n) {
      double a = std::clamp(cov.v[n], 0.0, 1.0);
      scene.image.v[n] = scene.image.v[n] * (1 - a) + intensity * a;
    }
  }

  if (spec.noise_sigma > 0) {
    std::mt19937 rng(spec.seed * 31337u + 5u);
    for (std::size_t n = 0; n < scene.image.v.size(); ++n) {
      double u1 = (rng() + 0.5) / 4294967296.0;
      double u2 = (rng() + 0.5) / 4294967296.0;
      double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
      scene.image.v[n] =
          std::clamp(scene.image.v[n] + spec.noise_sigma * z, 0.0, 1.0);
    }
  }
  return scene;
}

// Attenuation proxy for the top-layer height h: 0.9 at h=5 down to 0.2 at
// h=40, linear.
inline double attenuation_for_height(double h) {
  return std::clamp(0.9 + (0.2 - 0.9) * (h - 5.0) / 35.0, 0.2, 0.9);
}

// Presets cd{8,12,16}-h{5,15,25,40}: two long top bars and two shorter bottom
// bars that cross them, bar width = cd.
inline SceneSpec preset_scene(const std::string& name, std::uint32_t seed = 1) {
  double w = 0, h = 0;
  if (std::sscanf(name.c_str(), "cd%lf-h%lf", &w, &h) != 2)
    throw std::invalid_argument("preset_scene: unknown preset " + name);
  if ((w != 8 && w != 12 && w != 16) ||
      (h != 5 && h != 15 && h != 25 && h != 40))
    throw std::invalid_argument("preset_scene: unknown preset " + name);
  SceneSpec spec;
  spec.nx = 192;
  spec.ny = 192;
  spec.seed = seed;
  spec.attenuation = attenuation_for_height(h);
  double cx = spec.nx / 2.0, cy = spec.ny / 2.0;
  double gap = 40;
  // top: two long vertical bars
  spec.bars.push_back({cx - gap / 2, cy, 120, w, 0.5 * kPi, 1});
  spec.bars.push_back({cx + gap / 2, cy, 120, w, 0.5 * kPi, 1});
  // bottom: two shorter horizontal bars crossing them
  spec.bars.push_back({cx, cy - gap / 2 - 8, 100, w, 0.0, 0});
  spec.bars.push_back({cx, cy + gap / 2 + 8, 100, w, 0.0, 0});
  return spec;
}

}  // namespace plb
