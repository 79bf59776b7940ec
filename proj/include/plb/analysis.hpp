// Quantitative evaluation and geometric diagnostics: MASD and Hausdorff
// contour metrics (brute force over arclength-resampled closed curves),
// marching-cubes front meshes of the distance models with OBJ export, and
// cusp-regime sampling over endpoint grids.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "grid.hpp"
#include "mc_tables.hpp"
#include "tracking.hpp"

namespace plb {

using Poly2 = std::vector<std::array<double, 2>>;  // closed, implicit wrap

// Uniform arclength resampling of a closed polyline at steps <= max_step.
inline Poly2 resample_closed(const Poly2& poly, double max_step = 0.5) {
  if (poly.size() < 2)
    throw std::invalid_argument("resample_closed: degenerate curve");
  std::vector<double> cum(poly.size() + 1, 0.0);
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& a = poly[i];
    const auto& b = poly[(i + 1) % poly.size()];
    cum[i + 1] = cum[i] + std::hypot(b[0] - a[0], b[1] - a[1]);
  }
  double total = cum.back();
  if (total <= 0)
    throw std::invalid_argument("resample_closed: zero-length curve");
  int n = std::max(4, int(std::ceil(total / max_step)));
  Poly2 out(n);
  std::size_t seg = 0;
  for (int i = 0; i < n; ++i) {
    double s = total * i / n;
    while (seg + 1 < cum.size() - 1 && cum[seg + 1] <= s) ++seg;
    double t = (s - cum[seg]) / std::max(cum[seg + 1] - cum[seg], 1e-12);
    const auto& a = poly[seg];
    const auto& b = poly[(seg + 1) % poly.size()];
    out[i] = {a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])};
  }
  return out;
}

namespace detail {
inline double point_to_set(const std::array<double, 2>& p, const Poly2& set) {
  double best = kInf;
  for (const auto& q : set) {
    double d = std::hypot(p[0] - q[0], p[1] - q[1]);
    if (d < best) best = d;
  }
  return best;
}
}  // namespace detail

// Symmetric mean of point-to-set distances; uniform arclength resampling
// makes the plain mean the arclength-weighted integral.
inline double masd(const Poly2& a_in, const Poly2& b_in, double step = 0.5) {
  Poly2 a = resample_closed(a_in, step), b = resample_closed(b_in, step);
  double sa = 0, sb = 0;
  for (const auto& p : a) sa += detail::point_to_set(p, b);
  for (const auto& p : b) sb += detail::point_to_set(p, a);
  return 0.5 * (sa / double(a.size()) + sb / double(b.size()));
}

inline double hausdorff(const Poly2& a_in, const Poly2& b_in, double step = 0.5) {
  Poly2 a = resample_closed(a_in, step), b = resample_closed(b_in, step);
  double ha = 0, hb = 0;
  for (const auto& p : a) ha = std::max(ha, detail::point_to_set(p, b));
  for (const auto& p : b) hb = std::max(hb, detail::point_to_set(p, a));
  return std::max(ha, hb);
}

// ---------------------------------------------------------------------------
// Marching cubes over (x, y, theta) with a periodic theta axis
// ---------------------------------------------------------------------------

struct Mesh {
  std::vector<std::array<double, 3>> vertices;  // (x, y, theta-layer units)
  std::vector<std::array<int, 3>> triangles;
};

inline Mesh marching_cubes(const RealField& W, double level) {
  const GridSpec& g = W.grid;
  Mesh mesh;
  // Bourke cube-vertex offsets
  static const int off[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                                {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
  static const int edge_v[12][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0},
                                    {4, 5}, {5, 6}, {6, 7}, {7, 4},
                                    {0, 4}, {1, 5}, {2, 6}, {3, 7}};
  for (int k = 0; k < g.nt; ++k) {  // theta wraps: k and (k+1) % nt
    for (int j = 0; j + 1 < g.ny; ++j) {
      for (int i = 0; i + 1 < g.nx; ++i) {
        double val[8];
        double pos[8][3];
        int cube = 0;
        for (int c = 0; c < 8; ++c) {
          int ci = i + off[c][0], cj = j + off[c][1];
          int ck = (k + off[c][2]) % g.nt;
          val[c] = W.at(ci, cj, ck);
          pos[c][0] = ci;
          pos[c][1] = cj;
          pos[c][2] = k + off[c][2];  // unwrapped layer coordinate
          if (val[c] < level) cube |= (1 << c);
        }
        if (mc::edgeTable[cube] == 0) continue;
        int edge_idx[12];
        for (int e = 0; e < 12; ++e) {
          if (!(mc::edgeTable[cube] & (1 << e))) continue;
          int a = edge_v[e][0], b = edge_v[e][1];
          double t = (level - val[a]) / (val[b] - val[a]);
          t = std::clamp(t, 0.0, 1.0);
          mesh.vertices.push_back({pos[a][0] + t * (pos[b][0] - pos[a][0]),
                                   pos[a][1] + t * (pos[b][1] - pos[a][1]),
                                   pos[a][2] + t * (pos[b][2] - pos[a][2])});
          edge_idx[e] = int(mesh.vertices.size()) - 1;
        }
        for (int t = 0; mc::triTable[cube][t] != -1; t += 3)
          mesh.triangles.push_back({edge_idx[mc::triTable[cube][t]],
                                    edge_idx[mc::triTable[cube][t + 1]],
                                    edge_idx[mc::triTable[cube][t + 2]]});
      }
    }
  }
  return mesh;
}

// OBJ with one object + material tag per named front.
inline void save_obj(const std::string& path,
                     const std::vector<std::pair<std::string, Mesh>>& fronts) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("save_obj: cannot open " + path);
  os << "# distance-front isosurfaces\n";
  int base = 1;
  for (const auto& [name, mesh] : fronts) {
    os << "o " << name << "\nusemtl " << name << "\n";
    for (const auto& v : mesh.vertices)
      os << "v " << v[0] << " " << v[1] << " " << v[2] << "\n";
    for (const auto& t : mesh.triangles)
      os << "f " << base + t[0] << " " << base + t[1] << " " << base + t[2]
         << "\n";
    base += int(mesh.vertices.size());
  }
}

// ---------------------------------------------------------------------------
// Cusp-regime sampling
// ---------------------------------------------------------------------------

struct ConeSample {
  Point endpoint;
  bool member = false;     // cusp-free d_proj minimizer
  bool consistent = true;  // member implies d_c == d_proj within tol
  double d_c = 0, d_proj = 0;
};

// classify_regime over an endpoint grid, given the three unit-cost solves
// (forward model from p0 and p0-bar, symmetric model from p0).
inline std::vector<ConeSample> cone_sample(
    const DistanceMap& dc_from_p0, const DistanceMap& dc_from_p0bar,
    const DistanceMap& dproj_from_p0, const FinslerSpec& spec_plus,
    const FinslerSpec& spec_sym, const std::vector<Point>& endpoints,
    double tol = 0.03) {
  std::vector<ConeSample> out;
  out.reserve(endpoints.size());
  for (const Point& p : endpoints) {
    ConeSample cs;
    cs.endpoint = p;
    TrackResult proj;
    try {
      proj = distance_dproj(dproj_from_p0, spec_sym, p, true);
    } catch (const BacktrackFailure& e) {
      // Maxwell points (tied minimizers) can stall the descent; classify from
      // the partial curve instead of aborting the whole sweep
      proj = distance_dproj(dproj_from_p0, spec_sym, p, false);
      Curve part = e.partial;
      part.compute_controls();
      proj.geodesic = std::move(part);
      proj.cusps = detect_cusps(proj.geodesic);
    }
    TrackResult dc =
        distance_dc(dc_from_p0, dc_from_p0bar, spec_plus, p, false);
    RegimeResult reg = classify_regime(proj, dc, tol);
    cs.member = reg.regime == Regime::in_Q;
    cs.consistent = reg.consistent;
    cs.d_c = dc.distance;
    cs.d_proj = proj.distance;
    out.push_back(cs);
  }
  return out;
}

inline void save_cone_csv(const std::string& path,
                          const std::vector<ConeSample>& samples) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("save_cone_csv: cannot open " + path);
  os << "x,y,theta,member,consistent,d_c,d_proj\n";
  for (const auto& s : samples)
    os << s.endpoint.x << "," << s.endpoint.y << "," << s.endpoint.th << ","
       << (s.member ? 1 : 0) << "," << (s.consistent ? 1 : 0) << "," << s.d_c
       << "," << s.d_proj << "\n";
}

}  // namespace plb
