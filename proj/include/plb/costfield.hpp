// Data-driven cost construction on R^2 x S^1:
//   * crossing-preserving line measure V from the orientation score,
//   * cost C = 1/(1 + lambda V^p),
//   * anisotropic Riemannian-ball kernel (SE(2) logarithm norm) used both as
//     a morphological structuring element and as the connectivity rule,
//   * connected components of the super-threshold set,
//   * component-informed grouped costs: iterated dilation claims the low-cost
//     set per component; each component's cost equals C on its once-more
//     dilated claimed region and 1 elsewhere.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <vector>

#include "grid.hpp"
#include "image.hpp"
#include "liftscore.hpp"

namespace plb {

struct CostParams {
  double lambda = 100.0;
  double p = 1.0;
  double sigma_s = 2.0;                  // pixels
  double sigma_a = 4.0 * kTwoPi / 48.0;  // radians
  double delta() const { return 1.0 / (1.0 + lambda); }
};

struct MetricParams {
  double g11 = 0.2, g22 = 1.0, g33 = 7.0;
};

// ---------------------------------------------------------------------------
// Line measure
// ---------------------------------------------------------------------------

namespace detail {
// Periodic Gaussian smoothing along theta, in place.
inline void blur_theta(RealField& f, double sigma_rad) {
  if (sigma_rad <= 0) return;
  double sigma = sigma_rad / f.grid.dtheta();  // in layers
  auto k = gauss_kernel(sigma);
  int r = int(k.size() / 2);
  const GridSpec& g = f.grid;
  std::vector<double> col(g.nt);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      for (int kk = 0; kk < g.nt; ++kk) col[kk] = f.at(i, j, kk);
      for (int kk = 0; kk < g.nt; ++kk) {
        double s = 0;
        for (int d = -r; d <= r; ++d)
          s += k[d + r] * col[((kk + d) % g.nt + g.nt) % g.nt];
        f.at(i, j, kk) = s;
      }
    }
}

// Periodic-linear resampling of the theta axis to nt_out layers.
inline RealField resample_theta(const RealField& f, int nt_out) {
  if (nt_out == f.grid.nt) return f;
  GridSpec g(f.grid.nx, f.grid.ny, nt_out);
  RealField out(g);
  for (int k = 0; k < nt_out; ++k) {
    double t = g.theta(k) / f.grid.dtheta();
    int k0 = int(std::floor(t)) % f.grid.nt;
    int k1 = (k0 + 1) % f.grid.nt;
    double ft = t - std::floor(t);
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i)
        out.at(i, j, k) = (1 - ft) * f.at(i, j, k0) + ft * f.at(i, j, k1);
  }
  return out;
}
}  // namespace detail

// |Im(U)| smoothed spatially (sigma_s, isotropic, per layer) and angularly
// (sigma_a, periodic), symmetrized with its antipodal reflection, optionally
// resampled to nt_out orientation layers, and max-normalized to [0, 1].
inline RealField line_measure(const OrientationScore& score, double sigma_s,
                              double sigma_a, int nt_out = 0) {
  const GridSpec& g = score.U.grid;
  RealField V(g);
  for (std::size_t n = 0; n < V.v.size(); ++n)
    V.v[n] = std::abs(score.U.v[n].imag());

  for (int k = 0; k < g.nt; ++k) {
    Image layer(g.nx, g.ny);
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) layer.at(i, j) = V.at(i, j, k);
    layer = gauss_blur(layer, sigma_s);
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) V.at(i, j, k) = layer.at(i, j);
  }
  detail::blur_theta(V, sigma_a);

  RealField refl = antipodal_reflect(V);
  for (std::size_t n = 0; n < V.v.size(); ++n)
    V.v[n] = 0.5 * (V.v[n] + refl.v[n]);

  if (nt_out > 0) V = detail::resample_theta(V, nt_out);

  double mx = *std::max_element(V.v.begin(), V.v.end());
  if (mx > 0)
    for (auto& x : V.v) x /= mx;
  return V;
}

inline RealField cost_from_measure(const RealField& V, const CostParams& params) {
  RealField C(V.grid);
  for (std::size_t n = 0; n < V.v.size(); ++n) {
    double v = std::clamp(V.v[n], 0.0, 1.0);
    C.v[n] = 1.0 / (1.0 + params.lambda * std::pow(v, params.p));
  }
  return C;
}

// ---------------------------------------------------------------------------
// Riemannian ball kernel via the SE(2) logarithm
// ---------------------------------------------------------------------------

// Approximate Riemannian norm of the group element (hx, hy, hth):
// rho = sqrt(g11 c1^2 + g22 c2^2 + g33 c3^2) with (c1, c2) = A(th)^-1 (hx, hy)
// and c3 = th wrapped, where A(th) = (sin th / th) I + ((1 - cos th)/th) J.
inline double se2_rho(const MetricParams& g, double hx, double hy, double hth) {
  double th = wrap_pi(hth);
  double c1, c2;
  if (std::abs(th) < 1e-8) {
    c1 = hx;
    c2 = hy;
  } else {
    double a = std::sin(th) / th;
    double b = (1.0 - std::cos(th)) / th;
    double det = a * a + b * b;
    // A^-1 = (a I - b J)/det with J = [[0,-1],[1,0]]
    c1 = (a * hx + b * hy) / det;
    c2 = (-b * hx + a * hy) / det;
  }
  return std::sqrt(g.g11 * c1 * c1 + g.g22 * c2 * c2 + g.g33 * th * th);
}

struct BallKernel {
  MetricParams metric;
  double dtheta = 0;
  // group-element offsets (hx, hy, hth) with rho <= 1, hth multiples of dtheta
  std::vector<std::array<double, 3>> offsets;
};

inline BallKernel ball_kernel(const MetricParams& g, double dtheta) {
  BallKernel k;
  k.metric = g;
  k.dtheta = dtheta;
  int rx = int(std::ceil(1.0 / std::sqrt(g.g11))) + 1;
  int ry = int(std::ceil(1.0 / std::sqrt(g.g22))) + 1;
  int rt = int(std::ceil(1.0 / (std::sqrt(g.g33) * dtheta))) + 1;
  for (int dk = -rt; dk <= rt; ++dk)
    for (int dj = -ry; dj <= ry; ++dj)
      for (int di = -rx; di <= rx; ++di)
        if (se2_rho(g, di, dj, dk * dtheta) <= 1.0)
          k.offsets.push_back({double(di), double(dj), dk * dtheta});
  return k;
}

// Flat dilation: per-voxel max of the field over the kernel's zero-set
// translated by the group action (spatial offsets rotated into the voxel's
// frame, bilinear interpolation, theta periodic). Outside-domain samples are
// treated as unreachable (skipped).
inline RealField dilate(const RealField& f, const BallKernel& kernel) {
  const GridSpec& g = f.grid;
  RealField out(g, -kInf);
  for (int k = 0; k < g.nt; ++k) {
    double th = g.theta(k);
    double c = std::cos(th), s = std::sin(th);
    for (const auto& off : kernel.offsets) {
      double ox = c * off[0] - s * off[1];
      double oy = s * off[0] + c * off[1];
      double oth = off[2];
      for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
          double x = i + ox, y = j + oy;
          if (x < 0 || y < 0 || x > g.nx - 1 || y > g.ny - 1) continue;
          double v = f.interp_unchecked(x, y, th + oth);
          double& o = out.at(i, j, k);
          if (v > o) o = v;
        }
    }
  }
  for (auto& x : out.v)
    if (x == -kInf) x = 0;
  return out;
}

// ---------------------------------------------------------------------------
// Connected components with anisotropic (mutual ball) connectivity
// ---------------------------------------------------------------------------

struct ComponentLabeling {
  Field3<std::int32_t> labels;  // 0 background, 1..n
  int n = 0;
};

namespace detail {
// Integer voxel-step stencil for connectivity / claiming: rounded group
// translates q = p o h for kernel offsets h, per theta layer.
struct VoxelStencil {
  // per layer k: list of (di, dj, dk)
  std::vector<std::vector<std::array<int, 3>>> steps;
};

inline VoxelStencil voxel_stencil(const BallKernel& kernel, const GridSpec& g) {
  VoxelStencil st;
  st.steps.resize(g.nt);
  for (int k = 0; k < g.nt; ++k) {
    double th = g.theta(k);
    double c = std::cos(th), s = std::sin(th);
    std::vector<std::array<int, 3>> list;
    for (const auto& off : kernel.offsets) {
      int di = int(std::lround(c * off[0] - s * off[1]));
      int dj = int(std::lround(s * off[0] + c * off[1]));
      int dk = int(std::lround(off[2] / g.dtheta()));
      std::array<int, 3> step{di, dj, dk};
      if (std::find(list.begin(), list.end(), step) == list.end())
        list.push_back(step);
    }
    st.steps[k] = std::move(list);
  }
  return st;
}
}  // namespace detail

// Mutual-ball connectivity on the displacement between two voxels: each must
// lie inside the other's kernel ball.
inline bool ball_connected(const BallKernel& kernel, const GridSpec& g, int i0,
                           int j0, int k0, int i1, int j1, int k1) {
  double dx = i1 - i0, dy = j1 - j0;
  double dth = wrap_pi(g.theta(k1) - g.theta(k0));
  double t0 = g.theta(k0), t1 = g.theta(k1);
  // p0^-1 p1 : rotate the displacement into p0's frame
  double h1x = std::cos(t0) * dx + std::sin(t0) * dy;
  double h1y = -std::sin(t0) * dx + std::cos(t0) * dy;
  if (se2_rho(kernel.metric, h1x, h1y, dth) > 1.0) return false;
  // p1^-1 p0
  double h2x = std::cos(t1) * -dx + std::sin(t1) * -dy;
  double h2y = -std::sin(t1) * -dx + std::cos(t1) * -dy;
  return se2_rho(kernel.metric, h2x, h2y, -dth) <= 1.0;
}

inline ComponentLabeling connected_components(const RealField& V,
                                              double threshold,
                                              const BallKernel& kernel,
                                              double min_size_frac = 0.001) {
  if (threshold <= 0 || threshold >= 1)
    throw std::invalid_argument("connected_components: threshold must be in (0,1)");
  const GridSpec& g = V.grid;
  ComponentLabeling out;
  out.labels = Field3<std::int32_t>(g, 0);

  std::vector<std::uint8_t> mask(g.size());
  for (std::size_t n = 0; n < mask.size(); ++n) mask[n] = V.v[n] >= threshold;

  auto stencil = detail::voxel_stencil(kernel, g);
  std::vector<std::int32_t> comp(g.size(), -1);
  std::vector<std::vector<std::size_t>> members;

  for (int k = 0; k < g.nt; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        std::size_t n0 = g.index(i, j, k);
        if (!mask[n0] || comp[n0] >= 0) continue;
        // BFS
        std::int32_t id = std::int32_t(members.size());
        members.emplace_back();
        std::queue<std::array<int, 3>> q;
        q.push({i, j, k});
        comp[n0] = id;
        while (!q.empty()) {
          auto [ci, cj, ck] = q.front();
          q.pop();
          members[id].push_back(g.index(ci, cj, ck));
          // antipodal closure: a voxel and its theta + pi twin are the same
          // projective point, so they always share a component
          int ca = (ck + g.nt / 2) % g.nt;
          std::size_t na = g.index(ci, cj, ca);
          if (mask[na] && comp[na] < 0) {
            comp[na] = id;
            q.push({ci, cj, ca});
          }
          for (const auto& st : stencil.steps[ck]) {
            int ni = ci + st[0], nj = cj + st[1];
            int nk = ((ck + st[2]) % g.nt + g.nt) % g.nt;
            if (ni < 0 || nj < 0 || ni >= g.nx || nj >= g.ny) continue;
            std::size_t nn = g.index(ni, nj, nk);
            if (!mask[nn] || comp[nn] >= 0) continue;
            if (!ball_connected(kernel, g, ci, cj, ck, ni, nj, nk)) continue;
            comp[nn] = id;
            q.push({ni, nj, nk});
          }
        }
      }

  // drop small components, order the rest by size (largest first)
  std::size_t min_size = std::size_t(min_size_frac * double(g.size()));
  std::vector<int> keep;
  for (int id = 0; id < int(members.size()); ++id)
    if (members[id].size() >= std::max<std::size_t>(min_size, 1)) keep.push_back(id);
  std::sort(keep.begin(), keep.end(), [&](int a, int b) {
    if (members[a].size() != members[b].size())
      return members[a].size() > members[b].size();
    return a < b;
  });
  out.n = int(keep.size());
  for (int newid = 0; newid < out.n; ++newid)
    for (std::size_t n : members[keep[newid]])
      out.labels.v[n] = newid + 1;
  return out;
}

// ---------------------------------------------------------------------------
// Component-informed grouped costs
// ---------------------------------------------------------------------------

struct GroupedCost {
  int n = 0;
  std::vector<RealField> fields;               // per component, [delta, 1]
  std::vector<std::vector<std::uint8_t>> regions;  // once-more-dilated claims
  bool stalled = false;                        // fallback assignment used
};

// Iterated-dilation claiming of the low-cost set I = {C <= low_threshold}.
// Component indicators grow one kernel step per round (frontier BFS over the
// rounded group-translate stencil); unclaimed I-voxels reached in a round are
// claimed by the lowest-index reaching component. If claiming stalls with
// I-voxels left, the leftovers are assigned by stencil-step distance
// (multi-source BFS ignoring the mask), flagged via `stalled`.
inline GroupedCost group_cost(const RealField& C,
                              const ComponentLabeling& labeling,
                              const BallKernel& kernel,
                              double low_threshold = 0.1) {
  const GridSpec& g = C.grid;
  GroupedCost out;
  out.n = labeling.n;
  if (labeling.n == 0) return out;

  auto stencil = detail::voxel_stencil(kernel, g);
  std::vector<std::int32_t> claim(g.size(), 0);
  std::vector<std::uint8_t> low(g.size());
  for (std::size_t n = 0; n < g.size(); ++n) low[n] = C.v[n] <= low_threshold;

  std::vector<std::vector<std::size_t>> frontier(labeling.n + 1);
  std::size_t unclaimed = 0;
  for (int k = 0; k < g.nt; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        std::size_t n = g.index(i, j, k);
        std::int32_t lab = labeling.labels.v[n];
        if (lab > 0) {
          claim[n] = lab;
          frontier[lab].push_back(n);
        } else if (low[n]) {
          ++unclaimed;
        }
      }

  auto decode = [&](std::size_t n, int& i, int& j, int& k) {
    i = int(n % g.nx);
    j = int((n / g.nx) % g.ny);
    k = int(n / (std::size_t(g.nx) * g.ny));
  };

  int max_rounds = g.nx + g.ny + g.nt;
  for (int round = 0; round < max_rounds && unclaimed > 0; ++round) {
    // tentative claims this round: lowest component index wins ties
    std::vector<std::int32_t> tentative(g.size(), 0);
    bool any = false;
    for (int c = 1; c <= labeling.n; ++c) {
      for (std::size_t n : frontier[c]) {
        int i, j, k;
        decode(n, i, j, k);
        for (const auto& st : stencil.steps[k]) {
          int ni = i + st[0], nj = j + st[1];
          int nk = ((k + st[2]) % g.nt + g.nt) % g.nt;
          if (ni < 0 || nj < 0 || ni >= g.nx || nj >= g.ny) continue;
          std::size_t nn = g.index(ni, nj, nk);
          if (claim[nn] || !low[nn]) continue;
          if (tentative[nn] == 0 || c < tentative[nn]) {
            if (tentative[nn] == 0) any = true;
            tentative[nn] = std::int32_t(c);
          }
        }
      }
    }
    if (!any) break;
    for (auto& f : frontier) f.clear();
    for (std::size_t n = 0; n < g.size(); ++n)
      if (tentative[n] > 0) {
        claim[n] = tentative[n];
        frontier[tentative[n]].push_back(n);
        --unclaimed;
      }
  }

  if (unclaimed > 0) {
    // stall fallback: nearest component by stencil-step distance, BFS that
    // may cross non-low voxels
    out.stalled = true;
    std::queue<std::size_t> q;
    std::vector<std::int32_t> near(g.size(), 0);
    for (std::size_t n = 0; n < g.size(); ++n)
      if (claim[n]) {
        near[n] = claim[n];
        q.push(n);
      }
    while (!q.empty()) {
      std::size_t n = q.front();
      q.pop();
      int i, j, k;
      decode(n, i, j, k);
      for (const auto& st : stencil.steps[k]) {
        int ni = i + st[0], nj = j + st[1];
        int nk = ((k + st[2]) % g.nt + g.nt) % g.nt;
        if (ni < 0 || nj < 0 || ni >= g.nx || nj >= g.ny) continue;
        std::size_t nn = g.index(ni, nj, nk);
        if (near[nn]) continue;
        near[nn] = near[n];
        q.push(nn);
      }
    }
    for (std::size_t n = 0; n < g.size(); ++n)
      if (low[n] && !claim[n] && near[n]) claim[n] = near[n];
  }

  // final regions: one more kernel step around each component's claims
  out.fields.reserve(labeling.n);
  out.regions.reserve(labeling.n);
  for (int c = 1; c <= labeling.n; ++c) {
    std::vector<std::uint8_t> region(g.size(), 0);
    for (std::size_t n = 0; n < g.size(); ++n)
      if (claim[n] == c) region[n] = 1;
    std::vector<std::uint8_t> grown = region;
    for (int k = 0; k < g.nt; ++k)
      for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
          std::size_t n = g.index(i, j, k);
          if (!region[n]) continue;
          for (const auto& st : stencil.steps[k]) {
            int ni = i + st[0], nj = j + st[1];
            int nk = ((k + st[2]) % g.nt + g.nt) % g.nt;
            if (ni < 0 || nj < 0 || ni >= g.nx || nj >= g.ny) continue;
            grown[g.index(ni, nj, nk)] = 1;
          }
        }
    RealField f(g, 1.0);
    for (std::size_t n = 0; n < g.size(); ++n)
      if (grown[n]) f.v[n] = C.v[n];
    out.fields.push_back(std::move(f));
    out.regions.push_back(std::move(grown));
  }
  return out;
}

// Field of the component whose claimed region contains p1; -1 if unclaimed
// (the caller should fall back to the ungrouped cost).
inline int select_cost_index(const GroupedCost& grouped, const GridSpec& g,
                             const Point& p1) {
  int i = int(std::lround(p1.x)), j = int(std::lround(p1.y));
  int k = int(std::lround(wrap_2pi(p1.th) / g.dtheta())) % g.nt;
  if (i < 0 || j < 0 || i >= g.nx || j >= g.ny) return -1;
  std::size_t n = g.index(i, j, k);
  for (int c = 0; c < grouped.n; ++c)
    if (grouped.regions[c][n]) return c;
  return -1;
}

inline const RealField& select_cost(const GroupedCost& grouped,
                                    const GridSpec& g, const Point& p1) {
  int c = select_cost_index(grouped, g, p1);
  if (c < 0)
    throw std::domain_error(
        "select_cost: endpoint not inside any claimed region; use the "
        "ungrouped cost");
  return grouped.fields[c];
}

}  // namespace plb
