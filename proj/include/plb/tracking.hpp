// Steepest-descent backtracking of minimizing geodesics from a solved
// distance map, plus the two projective-line-bundle distance models:
//   * d_c  — minimum of the forward-gear distance over the four antipodal
//            endpoint instances (two eikonal solves, sources p0 and p0-bar,
//            each read at p1 and p1-bar);
//   * d_proj — minimum of the symmetric distance over the two sink instances
//              (one solve).
#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "eikonal.hpp"
#include "geometry.hpp"
#include "grid.hpp"

namespace plb {

struct BacktrackFailure : std::runtime_error {
  Curve partial;
  BacktrackFailure(const std::string& msg, Curve c)
      : std::runtime_error(msg), partial(std::move(c)) {}
};

// Integrate gamma' = -(1/C^2) * (xi^-2 (A1 W)[+] A1 + (A3 W) A3) from p1 down
// to the map's source with RK4, normalized so each step advances about `h`
// voxel units (theta counted in layers). The positive-part clamp is active
// only for the forward-gear model; when it clamps the motion is purely
// angular (keypoint), so the velocity is deliberately never normalized by the
// spatial speed alone.
inline Curve backtrack(const DistanceMap& map, const FinslerSpec& spec,
                       const Point& p1, double h = 0.25) {
  const GridSpec& g = map.W.grid;
  const double dth = g.dtheta();
  if (map.W.interp_clamped(p1.x, p1.y, p1.th) >= 0.5 * kInf)
    throw std::domain_error("backtrack: sink not reached by the distance map");

  const bool fwd = spec.model == Model::F0plus;
  const double xi2 = spec.xi * spec.xi;

  auto grad = [&](const Point& p, double v[3]) {
    double c = std::cos(p.th), s = std::sin(p.th);
    double a1 = map.W.interp_clamped(p.x + 0.5 * c, p.y + 0.5 * s, p.th) -
                map.W.interp_clamped(p.x - 0.5 * c, p.y - 0.5 * s, p.th);
    double a3 = (map.W.interp_clamped(p.x, p.y, p.th + 0.5 * dth) -
                 map.W.interp_clamped(p.x, p.y, p.th - 0.5 * dth)) / dth;
    if (fwd) a1 = std::max(a1, 0.0);
    double cc = spec.C(p);
    double inv = 1.0 / (cc * cc);
    v[0] = -inv * (a1 / xi2) * c;
    v[1] = -inv * (a1 / xi2) * s;
    v[2] = -inv * a3;
  };

  auto spatial_dist = [&](const Point& p) {
    return std::hypot(p.x - map.source.x, p.y - map.source.y);
  };
  auto near_source = [&](const Point& p) {
    double dx = p.x - map.source.x, dy = p.y - map.source.y;
    double dk = wrap_pi(p.th - map.source.th) / dth;
    return std::sqrt(dx * dx + dy * dy + dk * dk) <= 1.5;
  };

  Curve curve;
  Point p = p1;
  curve.samples.push_back(p);
  int max_steps = int(2.0 * (g.nx + g.ny + g.nt) / h) + 400;
  int max_attempts = 16 * max_steps;
  const double h_floor = h / 1024.0;
  double hl = h;  // line-searched step: halved while W fails to decrease
  int stagnant = 0, accepted = 0;
  for (int attempt = 0; attempt < max_attempts && accepted < max_steps;
       ++attempt) {
    if (near_source(p)) break;
    double k1[3], k2[3], k3[3], k4[3];
    auto scaled_step = [&](const Point& q, const double v[3], double f, Point& r) {
      // normalize to `hl` voxel units per unit f; theta counted in layers
      double n = std::sqrt(v[0] * v[0] + v[1] * v[1] +
                           (v[2] / dth) * (v[2] / dth));
      double sc = n > 1e-14 ? f * hl / n : 0.0;
      r.x = std::clamp(q.x + sc * v[0], 0.0, double(g.nx - 1));
      r.y = std::clamp(q.y + sc * v[1], 0.0, double(g.ny - 1));
      r.th = wrap_2pi(q.th + sc * v[2]);
    };
    Point q2, q3, q4;
    grad(p, k1);
    scaled_step(p, k1, 0.5, q2);
    grad(q2, k2);
    scaled_step(p, k2, 0.5, q3);
    grad(q3, k3);
    scaled_step(p, k3, 1.0, q4);
    grad(q4, k4);
    double v[3];
    for (int d = 0; d < 3; ++d)
      v[d] = (k1[d] + 2 * k2[d] + 2 * k3[d] + k4[d]) / 6.0;
    Point pn;
    scaled_step(p, v, 1.0, pn);
    double w_here = map.W.interp_clamped(p.x, p.y, p.th);
    double w_next = map.W.interp_clamped(pn.x, pn.y, pn.th);
    if (w_next < w_here - 1e-12 * std::max(1.0, w_here)) {
      stagnant = 0;
      p = pn;
      curve.samples.push_back(p);
      ++accepted;
      hl = std::min(h, 2.0 * hl);
      continue;
    }
    if (hl > h_floor) {
      hl *= 0.5;  // overshot the valley floor: retry with a finer step
      continue;
    }
    hl = h;
    if (++stagnant >= 50) {
      // no step of any size lowers W. If we are spatially at the source this
      // is the foot of an in-place rotation (the interpolated seed values are
      // not monotone at sub-voxel scale there); finish with the rotation.
      // Anywhere else it is a spurious local minimum.
      if (spatial_dist(p) <= 1.5) break;
      std::reverse(curve.samples.begin(), curve.samples.end());
      throw BacktrackFailure("backtrack: descent stagnated away from source",
                             std::move(curve));
    }
  }
  if (!near_source(p) && spatial_dist(p) > 1.5) {
    std::reverse(curve.samples.begin(), curve.samples.end());
    throw BacktrackFailure("backtrack: step budget exhausted", std::move(curve));
  }
  // close any remaining gap in orientation with an in-place rotation at the
  // source before appending the exact source point
  double gap = wrap_pi(p.th - map.source.th);
  int nrot = int(std::abs(gap) / (h * dth));
  for (int q = 1; q <= nrot; ++q)
    curve.samples.push_back({map.source.x, map.source.y,
                             wrap_2pi(p.th - gap * q / (nrot + 1))});
  curve.samples.push_back(map.source);
  std::reverse(curve.samples.begin(), curve.samples.end());
  curve.compute_controls(1.0 / std::max<std::size_t>(1, curve.samples.size() - 1));
  return curve;
}

struct TrackResult {
  double distance = kInf;
  int instance = -1;              // index into `instances`
  std::vector<double> instances;  // 4 for d_c, 2 for d_proj
  Curve geodesic;                 // ordered chosen-source -> chosen-sink
  std::vector<double> cusps;      // parameters from detect_cusps
  bool tie = false;               // Maxwell-point indicator
  Point endpoint_source, endpoint_sink;  // actual instance endpoints
};

namespace detail {
inline int argmin_with_tie(const std::vector<double>& v, double rel_tol,
                           bool* tie) {
  int best = 0;
  for (int i = 1; i < int(v.size()); ++i)
    if (v[i] < v[best]) best = i;
  *tie = false;
  for (int i = 0; i < int(v.size()); ++i)
    if (i != best && v[i] - v[best] <= rel_tol * std::max(v[best], 1e-9))
      *tie = true;
  return best;
}
}  // namespace detail

// d_c([p0],[p1]) from the two forward-gear solves with sources p0 and p0-bar.
// Instance order: (p0,p1), (p0,p1bar), (p0bar,p1), (p0bar,p1bar).
inline TrackResult distance_dc(const DistanceMap& from_p0,
                               const DistanceMap& from_p0bar,
                               const FinslerSpec& spec, const Point& p1,
                               bool do_backtrack = true, double h = 0.25,
                               double tie_tol = 5e-3) {
  if (spec.model != Model::F0plus)
    throw std::invalid_argument("distance_dc: needs the forward-gear model");
  Point p1b = antipode(p1);
  TrackResult r;
  r.instances = {from_p0.value(p1), from_p0.value(p1b), from_p0bar.value(p1),
                 from_p0bar.value(p1b)};
  r.instance = detail::argmin_with_tie(r.instances, tie_tol, &r.tie);
  r.distance = r.instances[r.instance];
  const DistanceMap& map = r.instance < 2 ? from_p0 : from_p0bar;
  Point sink = (r.instance % 2 == 0) ? p1 : p1b;
  r.endpoint_source = map.source;
  r.endpoint_sink = sink;
  if (do_backtrack) {
    r.geodesic = backtrack(map, spec, sink, h);
    r.cusps = detect_cusps(r.geodesic);
  }
  return r;
}

// d_proj([p0],[p1]) from one symmetric-model solve. Instance order:
// (p0,p1), (p0,p1bar).
inline TrackResult distance_dproj(const DistanceMap& from_p0,
                                  const FinslerSpec& spec, const Point& p1,
                                  bool do_backtrack = true, double h = 0.25,
                                  double tie_tol = 5e-3) {
  if (spec.model != Model::F0)
    throw std::invalid_argument("distance_dproj: needs the symmetric model");
  Point p1b = antipode(p1);
  TrackResult r;
  r.instances = {from_p0.value(p1), from_p0.value(p1b)};
  r.instance = detail::argmin_with_tie(r.instances, tie_tol, &r.tie);
  r.distance = r.instances[r.instance];
  Point sink = r.instance == 0 ? p1 : p1b;
  r.endpoint_source = from_p0.source;
  r.endpoint_sink = sink;
  if (do_backtrack) {
    r.geodesic = backtrack(from_p0, spec, sink, h);
    r.cusps = detect_cusps(r.geodesic);
  }
  return r;
}

enum class Regime { in_Q, outside_Q };

struct RegimeResult {
  Regime regime;
  bool consistent;  // cusp-free minimizers should have d_c == d_proj (tol)
};

// Membership in the cusp-free set: the endpoint is inside iff the d_proj
// minimizer is cusp-free; cross-checked against |d_c - d_proj|.
inline RegimeResult classify_regime(const TrackResult& proj,
                                    const TrackResult& dc, double tol = 0.03) {
  RegimeResult r;
  r.regime = proj.cusps.empty() ? Regime::in_Q : Regime::outside_Q;
  double rel = std::abs(dc.distance - proj.distance) /
               std::max(proj.distance, 1e-9);
  r.consistent = (r.regime == Regime::in_Q) ? rel <= tol : true;
  return r;
}

}  // namespace plb
