// Contour machinery: initial closed contours lifted from connected
// components, the horizontality switching criterion, spatial snake
// refinement on fixed orientation layers (Lindeberg scale selection plus one
// edge-focusing pass), and geodesic completion of the non-horizontal gaps.
//
// Initial contours: the component's spatial footprint is morphologically
// closed and hole-filled, its outer boundary traced (Moore neighborhood) into
// an ordered closed loop, smoothed, and lifted by the local tangent
// orientation snapped into the component's occupied theta layers. This
// realizes the one-voxel-wide lifted contour contract by tracing the 2D
// projection instead of a literal 3D thinning pass.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "costfield.hpp"
#include "eikonal.hpp"
#include "geometry.hpp"
#include "grid.hpp"
#include "image.hpp"
#include "liftscore.hpp"
#include "tracking.hpp"

namespace plb {

struct SnakeParams {
  double alpha = 3.0 * kTwoPi / 48.0;  // switching threshold (radians)
  double scan_radius = 8.0;            // px, ~ structure width / 2
  std::vector<double> scales = {1.0, 2.0, 4.0};
  double gamma = 0.5;                  // scale-normalization exponent
  double scan_step = 0.25;             // px along the scan line
  double close_radius = 8.0;           // px, footprint closing
  // px, post-closing erosion; compensates the blur-induced inflation of the
  // component footprint so the traced contour starts near the true boundary
  double shrink_radius = 0.0;
  double xi = std::sqrt(0.2 / 7.0);    // tracking stiffness
  double crop_margin = 24.0;           // px around geodesic gaps
};

enum class SegmentMode { spatial, geodesic };

struct Segment {
  int begin = 0;   // index into the (cyclic) contour samples
  int count = 0;
  SegmentMode mode = SegmentMode::spatial;
};

// ---------------------------------------------------------------------------
// 2D binary morphology helpers
// ---------------------------------------------------------------------------

namespace detail {
using Mask2 = std::vector<std::uint8_t>;  // row-major nx*ny

inline std::vector<std::array<int, 2>> disk_offsets(double r) {
  std::vector<std::array<int, 2>> out;
  int ri = int(std::ceil(r));
  for (int dj = -ri; dj <= ri; ++dj)
    for (int di = -ri; di <= ri; ++di)
      if (di * di + dj * dj <= r * r) out.push_back({di, dj});
  return out;
}

inline Mask2 dilate2(const Mask2& m, int nx, int ny,
                     const std::vector<std::array<int, 2>>& se) {
  Mask2 out(m.size(), 0);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      if (!m[std::size_t(j) * nx + i]) continue;
      for (const auto& o : se) {
        int x = i + o[0], y = j + o[1];
        if (x >= 0 && y >= 0 && x < nx && y < ny) out[std::size_t(y) * nx + x] = 1;
      }
    }
  return out;
}

inline Mask2 erode2(const Mask2& m, int nx, int ny,
                    const std::vector<std::array<int, 2>>& se) {
  Mask2 out(m.size(), 0);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      bool all = true;
      for (const auto& o : se) {
        int x = i + o[0], y = j + o[1];
        if (x < 0 || y < 0 || x >= nx || y >= ny ||
            !m[std::size_t(y) * nx + x]) {
          all = false;
          break;
        }
      }
      out[std::size_t(j) * nx + i] = all;
    }
  return out;
}

inline void fill_holes(Mask2& m, int nx, int ny) {
  // flood the background from the border; anything unflooded becomes filled
  Mask2 outside(m.size(), 0);
  std::vector<std::array<int, 2>> stack;
  auto push = [&](int i, int j) {
    if (i < 0 || j < 0 || i >= nx || j >= ny) return;
    std::size_t n = std::size_t(j) * nx + i;
    if (m[n] || outside[n]) return;
    outside[n] = 1;
    stack.push_back({i, j});
  };
  for (int i = 0; i < nx; ++i) {
    push(i, 0);
    push(i, ny - 1);
  }
  for (int j = 0; j < ny; ++j) {
    push(0, j);
    push(nx - 1, j);
  }
  while (!stack.empty()) {
    auto [i, j] = stack.back();
    stack.pop_back();
    push(i - 1, j);
    push(i + 1, j);
    push(i, j - 1);
    push(i, j + 1);
  }
  for (std::size_t n = 0; n < m.size(); ++n)
    if (!m[n] && !outside[n]) m[n] = 1;
}

// Keep 8-connected pieces whose area is at least `frac` of the largest
// piece's area. frac close to 1 keeps only the largest piece.
inline void keep_large_pieces(Mask2& m, int nx, int ny, double frac) {
  std::vector<int> comp(m.size(), -1);
  std::vector<std::size_t> area;
  std::vector<std::array<int, 2>> stack;
  for (int j0 = 0; j0 < ny; ++j0)
    for (int i0 = 0; i0 < nx; ++i0) {
      std::size_t n0 = std::size_t(j0) * nx + i0;
      if (!m[n0] || comp[n0] >= 0) continue;
      int id = int(area.size());
      area.push_back(0);
      comp[n0] = id;
      stack.push_back({i0, j0});
      while (!stack.empty()) {
        auto [i, j] = stack.back();
        stack.pop_back();
        ++area[id];
        for (int dj = -1; dj <= 1; ++dj)
          for (int di = -1; di <= 1; ++di) {
            int x = i + di, y = j + dj;
            if (x < 0 || y < 0 || x >= nx || y >= ny) continue;
            std::size_t n = std::size_t(y) * nx + x;
            if (m[n] && comp[n] < 0) {
              comp[n] = id;
              stack.push_back({x, y});
            }
          }
      }
    }
  if (area.empty()) return;
  std::size_t largest = *std::max_element(area.begin(), area.end());
  for (std::size_t n = 0; n < m.size(); ++n)
    if (m[n] && double(area[comp[n]]) < frac * double(largest)) m[n] = 0;
}

// Moore-neighbor boundary tracing of the largest 8-connected foreground
// region's outer boundary; returns an ordered closed pixel loop.
inline std::vector<std::array<int, 2>> trace_boundary(const Mask2& m, int nx,
                                                      int ny) {
  auto at = [&](int i, int j) {
    return i >= 0 && j >= 0 && i < nx && j < ny && m[std::size_t(j) * nx + i];
  };
  // clockwise Moore neighborhood starting east
  static const int nb[8][2] = {{1, 0},  {1, 1},  {0, 1},  {-1, 1},
                               {-1, 0}, {-1, -1}, {0, -1}, {1, -1}};
  int si = -1, sj = -1;
  for (int j = 0; j < ny && si < 0; ++j)
    for (int i = 0; i < nx; ++i)
      if (at(i, j)) {
        si = i;
        sj = j;
        break;
      }
  std::vector<std::array<int, 2>> out;
  if (si < 0) return out;
  int ci = si, cj = sj;
  int dir = 6;  // came from the north (scan found first pixel top-down)
  out.push_back({ci, cj});
  for (int guard = 0; guard < 8 * nx * ny; ++guard) {
    int found = -1;
    for (int d = 0; d < 8; ++d) {
      int nd = (dir + 6 + d) % 8;  // start scan from backtrack direction
      int x = ci + nb[nd][0], y = cj + nb[nd][1];
      if (at(x, y)) {
        found = nd;
        ci = x;
        cj = y;
        break;
      }
    }
    if (found < 0) break;  // isolated pixel
    dir = found;
    if (ci == si && cj == sj) break;
    out.push_back({ci, cj});
  }
  return out;
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Initial contours
// ---------------------------------------------------------------------------

struct InitialContour {
  int component = 0;  // 1-based label
  Curve curve;        // closed, theta lifted
};

// `support` (optional) is a sharper line measure on the same grid: component
// labels bridge occlusions with a broad blur and therefore overshoot the
// structure boundary, so the footprint is restricted to label voxels whose
// support exceeds support_frac of the measure's maximum. The morphological
// closing then re-bridges occlusion gaps at the footprint level.
inline std::vector<InitialContour> initial_contours(
    const ComponentLabeling& labeling, const SnakeParams& params = {},
    const RealField* support = nullptr, double support_frac = 0.3) {
  const GridSpec& g = labeling.labels.grid;
  std::vector<InitialContour> out;
  auto se = detail::disk_offsets(params.close_radius);
  auto se_small = detail::disk_offsets(1.5);
  double support_thresh = 0.0;
  if (support) {
    if (support->grid.nx != g.nx || support->grid.ny != g.ny ||
        support->grid.nt != g.nt)
      throw std::invalid_argument("initial_contours: support grid mismatch");
    double mx = 0;
    for (double v : support->v) mx = std::max(mx, v);
    support_thresh = support_frac * mx;
  }

  for (int c = 1; c <= labeling.n; ++c) {
    // spatial footprint and theta occupancy of the component
    detail::Mask2 foot(std::size_t(g.nx) * g.ny, 0);
    std::vector<std::uint8_t> occ(std::size_t(g.nx) * g.ny * g.nt, 0);
    for (int k = 0; k < g.nt; ++k)
      for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
          if (labeling.labels.at(i, j, k) == c) {
            if (!support || support->at(i, j, k) >= support_thresh)
              foot[std::size_t(j) * g.nx + i] = 1;
            occ[(std::size_t(k) * g.ny + j) * g.nx + i] = 1;
          }

    // stray fragments (evidence captured from a neighboring structure) would
    // be glued on by the closing: drop pieces much smaller than the main body
    detail::keep_large_pieces(foot, g.nx, g.ny, 0.1);
    // close gaps (occlusions) and fill the interior, then clean the border
    detail::Mask2 closed = detail::erode2(
        detail::dilate2(foot, g.nx, g.ny, se), g.nx, g.ny, se);
    detail::fill_holes(closed, g.nx, g.ny);
    closed = detail::dilate2(detail::erode2(closed, g.nx, g.ny, se_small),
                             g.nx, g.ny, se_small);
    if (params.shrink_radius > 0)
      closed = detail::erode2(closed, g.nx, g.ny,
                              detail::disk_offsets(params.shrink_radius));
    detail::keep_large_pieces(closed, g.nx, g.ny, 0.999);

    auto loop = detail::trace_boundary(closed, g.nx, g.ny);
    if (loop.size() < 8) continue;  // skipped with warning upstream

    // 5-sample moving-average smoothing of the pixel loop
    std::size_t n = loop.size();
    Curve curve;
    curve.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      double sx = 0, sy = 0;
      for (int d = -2; d <= 2; ++d) {
        const auto& p = loop[(i + n + d) % n];
        sx += p[0];
        sy += p[1];
      }
      curve.samples[i].x = sx / 5.0;
      curve.samples[i].y = sy / 5.0;
    }
    // tangent-based lift, snapped into the component's occupied layers
    for (std::size_t i = 0; i < n; ++i) {
      const Point& a = curve.samples[(i + n - 1) % n];
      const Point& b = curve.samples[(i + 1) % n];
      double psi = std::atan2(b.y - a.y, b.x - a.x);
      double th = wrap_2pi(psi);
      // look for an occupied layer near (x, y) whose orientation matches psi
      // modulo pi; prefer the closest one
      int bi = int(std::lround(curve.samples[i].x));
      int bj = int(std::lround(curve.samples[i].y));
      double best = kInf;
      double best_th = th;
      for (int k = 0; k < g.nt; ++k) {
        double dth = std::abs(wrap_pi(g.theta(k) - psi));
        dth = std::min(dth, std::abs(wrap_pi(g.theta(k) - psi - kPi)));
        if (dth > 0.35) continue;
        bool found = false;
        for (int dj = -2; dj <= 2 && !found; ++dj)
          for (int di = -2; di <= 2 && !found; ++di) {
            int x = bi + di, y = bj + dj;
            if (x < 0 || y < 0 || x >= g.nx || y >= g.ny) continue;
            if (occ[(std::size_t(k) * g.ny + y) * g.nx + x]) found = true;
          }
        if (!found) continue;
        // snap to whichever of theta_k / theta_k + pi is closer to psi
        double cand = g.theta(k);
        if (std::abs(wrap_pi(cand - psi)) > 0.5 * kPi) cand = wrap_2pi(cand + kPi);
        double score = std::abs(wrap_pi(cand - psi));
        if (score < best) {
          best = score;
          best_th = cand;
        }
      }
      curve.samples[i].th = best_th;
    }
    curve.compute_controls();
    out.push_back({c, std::move(curve)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Switching criterion
// ---------------------------------------------------------------------------

// Maximal runs with phi <= alpha become spatial segments; the complement
// geodesic. Undefined phi counts as above threshold. The segments partition
// the cyclic sample sequence exactly once.
inline std::vector<Segment> split_by_horizontality(const Curve& contour,
                                                   double alpha) {
  int n = int(contour.samples.size());
  if (n < 4) return {{0, std::max(n, 0), SegmentMode::geodesic}};
  if (contour.phi.size() != std::size_t(n))
    throw std::invalid_argument("split_by_horizontality: controls not computed");
  auto horiz = [&](int i) {
    double p = contour.phi[i];
    if (!phi_defined(p)) return false;
    // phi near pi means the lift is antiparallel to the walk direction; the
    // orientation is projective, so fold onto [0, pi/2]
    double q = std::min(p, kPi - p);
    return q <= alpha;
  };
  std::vector<Segment> out;
  // find a mode boundary to anchor the cyclic split
  int start = 0;
  bool uniform = true;
  for (int i = 0; i < n; ++i)
    if (horiz(i) != horiz((i + n - 1) % n)) {
      start = i;
      uniform = false;
      break;
    }
  if (uniform) {
    out.push_back({0, n, horiz(0) ? SegmentMode::spatial : SegmentMode::geodesic});
    return out;
  }
  int i = start;
  while (i < start + n) {
    bool h = horiz(i % n);
    int j = i;
    while (j < start + n && horiz(j % n) == h) ++j;
    out.push_back({i % n, j - i, h ? SegmentMode::spatial : SegmentMode::geodesic});
    i = j;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Spatial refinement
// ---------------------------------------------------------------------------

struct RefineResult {
  std::vector<Point> samples;       // full contour, spatial samples displaced
  std::vector<std::uint8_t> moved;  // per sample
};

namespace detail {
// Per-layer, per-scale gamma-normalized Gaussian gradient-norm images.
struct GradientStack {
  int n_orient = 0;
  std::vector<double> scales;
  std::vector<Image> imgs;  // [scale * n_orient + layer]
  double gamma = 0.5;

  double value(double x, double y, double th, int si) const {
    double t = wrap_2pi(th) / (kTwoPi / n_orient);
    int k0 = int(std::floor(t)) % n_orient;
    int k1 = (k0 + 1) % n_orient;
    double f = t - std::floor(t);
    const Image& a = imgs[std::size_t(si) * n_orient + k0];
    const Image& b = imgs[std::size_t(si) * n_orient + k1];
    return (1 - f) * a.interp(x, y) + f * b.interp(x, y);
  }
};

inline GradientStack gradient_stack(const OrientationScore& score,
                                    const std::vector<double>& scales,
                                    double gamma) {
  GradientStack st;
  st.n_orient = score.U.grid.nt;
  st.scales = scales;
  st.gamma = gamma;
  for (double s : scales) {
    for (int k = 0; k < st.n_orient; ++k) {
      Image layer(score.U.grid.nx, score.U.grid.ny);
      for (int j = 0; j < layer.ny; ++j)
        for (int i = 0; i < layer.nx; ++i)
          layer.at(i, j) = score.U.at(i, j, k).real();
      Image sm = gauss_blur(layer, s);
      Image gn(layer.nx, layer.ny);
      double norm = std::pow(s, gamma);
      for (int j = 0; j < layer.ny; ++j)
        for (int i = 0; i < layer.nx; ++i) {
          double gx = 0.5 * (sm.at_clamped(i + 1, j) - sm.at_clamped(i - 1, j));
          double gy = 0.5 * (sm.at_clamped(i, j + 1) - sm.at_clamped(i, j - 1));
          gn.at(i, j) = norm * std::hypot(gx, gy);
        }
      st.imgs.push_back(std::move(gn));
    }
  }
  return st;
}

// local maxima of a sampled profile; returns indices
inline std::vector<int> local_maxima(const std::vector<double>& prof) {
  std::vector<int> out;
  for (int i = 1; i + 1 < int(prof.size()); ++i)
    if (prof[i] >= prof[i - 1] && prof[i] > prof[i + 1]) out.push_back(i);
  return out;
}
}  // namespace detail

// Displace every sample of the spatial segments along the contour normal to
// the nearest edge response: scale selected by the gamma-normalized maximum,
// then one focusing pass relocating the maximum at the smallest scale, with
// 3-point parabolic subpixel refinement.
inline RefineResult spatial_refine(const Curve& contour,
                                   const std::vector<Segment>& segments,
                                   const OrientationScore& score,
                                   const SnakeParams& params = {}) {
  auto grads = detail::gradient_stack(score, params.scales, params.gamma);
  RefineResult res;
  res.samples = contour.samples;
  res.moved.assign(contour.samples.size(), 0);
  int n = int(contour.samples.size());
  const double r = params.scan_radius;
  const double step = params.scan_step;
  int m = int(std::floor(r / step));

  for (const Segment& seg : segments) {
    if (seg.mode != SegmentMode::spatial) continue;
    for (int s = 0; s < seg.count; ++s) {
      int idx = (seg.begin + s) % n;
      const Point& p = contour.samples[idx];
      double nx = -std::sin(p.th), ny = std::cos(p.th);
      // profiles at every candidate scale
      std::vector<std::vector<double>> prof(params.scales.size());
      double best_peak = -1;
      int best_scale = -1;
      for (std::size_t si = 0; si < params.scales.size(); ++si) {
        prof[si].resize(2 * m + 1);
        for (int q = -m; q <= m; ++q)
          prof[si][q + m] =
              grads.value(p.x + q * step * nx, p.y + q * step * ny, p.th, int(si));
        for (int q : detail::local_maxima(prof[si]))
          if (prof[si][q] > best_peak) {
            best_peak = prof[si][q];
            best_scale = int(si);
          }
      }
      if (best_scale < 0) continue;  // flat: unmoved, flagged clear
      auto maxima = detail::local_maxima(prof[best_scale]);
      if (maxima.empty()) continue;
      int q0 = *std::min_element(maxima.begin(), maxima.end(), [&](int a, int b) {
        return std::abs(a - m) < std::abs(b - m);
      });
      // edge focusing: relocate at the smallest scale
      auto fine = detail::local_maxima(prof[0]);
      int q1 = q0;
      if (!fine.empty())
        q1 = *std::min_element(fine.begin(), fine.end(), [&](int a, int b) {
          return std::abs(a - q0) < std::abs(b - q0);
        });
      const std::vector<double>& fp = prof[0];
      double lam = (q1 - m) * step;
      if (q1 > 0 && q1 + 1 < int(fp.size())) {
        double denom = fp[q1 - 1] - 2 * fp[q1] + fp[q1 + 1];
        if (std::abs(denom) > 1e-12) {
          double off = 0.5 * (fp[q1 - 1] - fp[q1 + 1]) / denom;
          lam += std::clamp(off, -1.0, 1.0) * step;
        }
      }
      lam = std::clamp(lam, -r, r);
      res.samples[idx].x = p.x + lam * nx;
      res.samples[idx].y = p.y + lam * ny;
      res.moved[idx] = 1;
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// Geodesic completion
// ---------------------------------------------------------------------------

struct CompletedContour {
  int component = 0;
  Curve contour;                 // closed, refined + spliced
  int geodesic_gaps = 0;
  int failed_gaps = 0;
};

namespace detail {
// distance solve on a spatial crop around the gap, to keep the per-gap cost
// bounded; returns the winning geodesic in global coordinates.
inline std::optional<std::vector<Point>> track_gap(
    const RealField& cost, const Point& a, const Point& b, double xi,
    bool use_dc, double margin) {
  const GridSpec& g = cost.grid;
  int x0 = std::max(0, int(std::floor(std::min(a.x, b.x) - margin)));
  int y0 = std::max(0, int(std::floor(std::min(a.y, b.y) - margin)));
  int x1 = std::min(g.nx - 1, int(std::ceil(std::max(a.x, b.x) + margin)));
  int y1 = std::min(g.ny - 1, int(std::ceil(std::max(a.y, b.y) + margin)));
  GridSpec cg(x1 - x0 + 1, y1 - y0 + 1, g.nt);
  RealField crop(cg);
  for (int k = 0; k < g.nt; ++k)
    for (int j = 0; j < cg.ny; ++j)
      for (int i = 0; i < cg.nx; ++i)
        crop.at(i, j, k) = cost.at(x0 + i, y0 + j, k);
  Point ca{a.x - x0, a.y - y0, a.th};
  Point cb{b.x - x0, b.y - y0, b.th};
  try {
    if (use_dc) {
      FinslerSpec spec(Model::F0plus, xi, crop);
      EikonalProblem prob(spec, cg, ca);
      DistanceMap m0 = eikonal_solve(prob);
      EikonalProblem prob_bar(spec, cg, antipode(ca));
      DistanceMap m1 = eikonal_solve(prob_bar);
      TrackResult tr = distance_dc(m0, m1, spec, cb, true);
      std::vector<Point> out;
      for (const Point& p : tr.geodesic.samples)
        out.push_back({p.x + x0, p.y + y0, p.th});
      return out;
    }
    FinslerSpec spec(Model::F0, xi, crop);
    EikonalProblem prob(spec, cg, ca);
    DistanceMap m0 = eikonal_solve(prob);
    TrackResult tr = distance_dproj(m0, spec, cb, true);
    std::vector<Point> out;
    for (const Point& p : tr.geodesic.samples)
      out.push_back({p.x + x0, p.y + y0, p.th});
    return out;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}
}  // namespace detail

// Replace every geodesic gap of the refined contour by a tracked geodesic
// between the adjacent refined spatial endpoints, using the component's
// grouped cost when the endpoint is claimed (ungrouped C otherwise).
// `use_dc` false swaps in the symmetric-model baseline.
inline CompletedContour complete_contour(
    int component, const Curve& initial, const std::vector<Segment>& segments,
    const RefineResult& refined, const GroupedCost& grouped,
    const RealField& ungrouped_cost, const SnakeParams& params = {},
    bool use_dc = true) {
  CompletedContour out;
  out.component = component;
  int n = int(initial.samples.size());

  // orientation at a refined sample, from the refined tangent
  auto tangent_theta = [&](int idx) {
    const Point& a = refined.samples[(idx + n - 1) % n];
    const Point& b = refined.samples[(idx + 1) % n];
    return wrap_2pi(std::atan2(b.y - a.y, b.x - a.x));
  };

  std::vector<Point> result;
  for (std::size_t si = 0; si < segments.size(); ++si) {
    const Segment& seg = segments[si];
    if (seg.mode == SegmentMode::spatial) {
      for (int s = 0; s < seg.count; ++s)
        result.push_back(refined.samples[(seg.begin + s) % n]);
      continue;
    }
    ++out.geodesic_gaps;
    if (segments.size() == 1) {
      // fully geodesic loop: keep the initial samples
      for (int s = 0; s < seg.count; ++s)
        result.push_back(initial.samples[(seg.begin + s) % n]);
      ++out.failed_gaps;
      continue;
    }
    int prev_idx = (seg.begin + n - 1) % n;               // end of previous spatial run
    int next_idx = (seg.begin + seg.count) % n;           // start of next spatial run
    Point a = refined.samples[prev_idx];
    Point b = refined.samples[next_idx];
    a.th = tangent_theta(prev_idx);
    b.th = tangent_theta(next_idx);

    const RealField* cost = &ungrouped_cost;
    if (component >= 1 && component <= grouped.n) {
      int ci = select_cost_index(grouped, ungrouped_cost.grid, a);
      if (ci == component - 1) cost = &grouped.fields[ci];
    }
    double gap_len = std::hypot(b.x - a.x, b.y - a.y);
    double margin = std::max(params.crop_margin, 0.75 * gap_len + 8.0);
    auto track = detail::track_gap(*cost, a, b, params.xi, use_dc, margin);
    if (!track || track->size() < 2) {
      ++out.failed_gaps;
      for (int s = 0; s < seg.count; ++s)
        result.push_back(initial.samples[(seg.begin + s) % n]);
      continue;
    }
    // splice interior samples (endpoints already covered by spatial runs)
    for (std::size_t s = 1; s + 1 < track->size(); ++s)
      result.push_back((*track)[s]);
  }
  out.contour.samples = std::move(result);
  out.contour.compute_controls();
  return out;
}

}  // namespace plb
