// Iterative (Jacobi time-relaxation) solver for the Finsler eikonal equation
// F*(p, dW) = 1, W(p0) = 0 on R^2 x S^1, producing distance maps for both the
// symmetric model and the forward-gear-only model.
//
// Discretization:
//   * A1 W uses bilinearly interpolated half-step samples of W at
//     x -+ dx*(cos th, sin th) on the same theta layer (the frame is not grid
//     aligned), combined Rouy-Tourin style: max(D-, -D+, 0). The forward-only
//     model keeps only the backward branch max(D-, 0) — that *is* the positive
//     part clamp after upwinding.
//   * A3 W uses standard upwind differences along the periodic theta axis.
//   * Update W <- W + eps * (1 - F*(dW)), Jacobi (synchronous), deterministic.
//
// The pseudo-time step is per voxel by default, eps(p) = cfl * C(p) *
// min(xi*dx, dtheta), which has the same fixed point as a single global step
// but converges in O(grid diameter) sweeps instead of O(diameter/delta). Set
// `global_step` to force the conservative global bound with delta = min C.
// Updates are floored by the smallest sampled neighbor minus one local cell
// cost so the huge "unreached" initialization cannot overshoot downward.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "geometry.hpp"
#include "grid.hpp"

namespace plb {

struct EikonalProblem {
  FinslerSpec spec;
  GridSpec grid;       // must match spec.cost when a cost field is present
  Point source;        // snapped to the nearest node by the solver
  double cfl = 0.5;
  double tol = 1e-5;   // relative-change stopping threshold
  int max_iters = 20000;
  bool global_step = false;
  // First-order upwinding smears the cone tip at the source, which shows up
  // as a constant overshoot everywhere downstream. To kill it, voxels within
  // `seed_radius` (Chebyshev, all theta layers) of the source are pinned to
  // values read from a spatially `seed_refine`-times-finer local solve with
  // the frozen cost C(source). Scaling space by m while dividing xi by m
  // leaves distances unchanged, and left-invariance lets one theta=0 table
  // (cached per model/xi/nt) serve every source orientation.
  int seed_radius = 2;
  int seed_refine = 4;

  EikonalProblem() = default;
  EikonalProblem(FinslerSpec s, GridSpec g, Point src)
      : spec(std::move(s)), grid(g), source(src) {
    if (!spec.uniform() && !(spec.cost.grid == grid))
      throw std::invalid_argument("EikonalProblem: cost grid mismatch");
  }
};

struct DistanceMap {
  RealField W;
  Point source;                  // snapped node
  int source_idx[3] = {0, 0, 0};
  std::vector<double> residual_history;  // max relative change per iteration
  int iters = 0;
  bool converged = false;

  double value(const Point& p) const { return W.interp_clamped(p.x, p.y, p.th); }
};

struct ResidualStats {
  double median = 0;
  double p95 = 0;
  std::size_t count = 0;
};

// Thrown on non-convergence; carries the per-iteration residual history and
// the partial distance map for diagnosis.
struct EikonalDivergence : std::runtime_error {
  std::vector<double> residual_history;
  DistanceMap partial;
  EikonalDivergence(const std::string& msg, std::vector<double> hist,
                    DistanceMap map)
      : std::runtime_error(msg),
        residual_history(std::move(hist)),
        partial(std::move(map)) {}
};

inline DistanceMap eikonal_solve(const EikonalProblem& prob);

namespace detail {
// Fine local distance table used to seed voxels around a source. Solved once
// per (model, xi, nt, refine, box radius) with unit cost, source at the
// center with theta = 0, on a grid refined `refine`-fold in space (and with
// xi divided by the same factor, which keeps distances unchanged).
inline const DistanceMap& source_seed_table(Model model, double xi, int nt,
                                            int refine, int box_r) {
  using Key = std::tuple<int, double, int, int, int>;
  static std::map<Key, DistanceMap> cache;
  Key key{int(model), xi, nt, refine, box_r};
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  int half = box_r * refine;
  GridSpec g(2 * half + 1, 2 * half + 1, nt);
  FinslerSpec spec(model, xi / refine);
  EikonalProblem sub(spec, g, {double(half), double(half), 0.0});
  sub.seed_radius = 0;
  sub.tol = 1e-6;
  sub.max_iters = 200000;
  return cache.emplace(key, eikonal_solve(sub)).first->second;
}

// Per-theta-layer sampling plan for a constant spatial offset (ox, oy):
// linear interpolation on the triangle of the unit cell whose hypotenuse is
// the cell diagonal most parallel to the offset direction. Compared to
// bilinear weights this keeps the stencil from straddling the kink the
// distance function has transverse to a straight geodesic, which would
// otherwise inflate diagonal distances by a few percent.
struct SamplePlan {
  int di, dj;
  double w00, w10, w01, w11;  // one of the four is always zero
};
inline SamplePlan make_plan(double ox, double oy) {
  int di = int(std::floor(ox)), dj = int(std::floor(oy));
  double fx = ox - di, fy = oy - dj;
  SamplePlan p{di, dj, 0, 0, 0, 0};
  if (ox * oy >= 0) {
    // split along the (0,0)-(1,1) diagonal
    if (fx >= fy) {
      p.w00 = 1 - fx;
      p.w10 = fx - fy;
      p.w11 = fy;
    } else {
      p.w00 = 1 - fy;
      p.w01 = fy - fx;
      p.w11 = fx;
    }
  } else {
    // split along the (1,0)-(0,1) diagonal
    if (fx + fy <= 1) {
      p.w00 = 1 - fx - fy;
      p.w10 = fx;
      p.w01 = fy;
    } else {
      p.w11 = fx + fy - 1;
      p.w10 = 1 - fy;
      p.w01 = 1 - fx;
    }
  }
  return p;
}
}  // namespace detail

inline DistanceMap eikonal_solve(const EikonalProblem& prob) {
  const GridSpec& g = prob.grid;
  const FinslerSpec& spec = prob.spec;
  const int nx = g.nx, ny = g.ny, nt = g.nt;
  const double dth = g.dtheta();
  const double xi = spec.xi;
  const double hmin = std::min(xi, dth);  // dx = 1

  int is = int(std::lround(prob.source.x));
  int js = int(std::lround(prob.source.y));
  int ks = int(std::lround(wrap_2pi(prob.source.th) / dth)) % nt;
  if (is < 0 || is >= nx || js < 0 || js >= ny)
    throw std::domain_error("eikonal_solve: source outside domain");

  DistanceMap out;
  out.W = RealField(g, kInf);
  out.source = {double(is), double(js), g.theta(ks)};
  out.source_idx[0] = is;
  out.source_idx[1] = js;
  out.source_idx[2] = ks;

  std::vector<double> cur = out.W.v;
  std::vector<double> nxt(cur.size());
  const std::size_t src = g.index(is, js, ks);
  cur[src] = 0.0;

  std::vector<char> pinned(cur.size(), 0);
  pinned[src] = 1;
  if (prob.seed_radius > 0) {
    const int r = prob.seed_radius, m = prob.seed_refine;
    const int box_r = r + 4;  // margin so seeded geodesics stay in the box
    const DistanceMap& tab =
        detail::source_seed_table(spec.model, spec.xi, nt, m, box_r);
    double c0 = spec.uniform() ? 1.0 : spec.cost.v[src];
    double ths = g.theta(ks);
    double ct = std::cos(ths), st = std::sin(ths);
    double half = double(box_r * m);
    for (int k = 0; k < nt; ++k) {
      int krel = ((k - ks) % nt + nt) % nt;
      double thloc = tab.W.grid.theta(krel);
      for (int dj = -r; dj <= r; ++dj) {
        for (int di = -r; di <= r; ++di) {
          int i = is + di, j = js + dj;
          if (i < 0 || i >= nx || j < 0 || j >= ny) continue;
          // offset rotated into the table frame (source orientation -> 0)
          double xr = (ct * di + st * dj) * m + half;
          double yr = (-st * di + ct * dj) * m + half;
          std::size_t n = g.index(i, j, k);
          cur[n] = c0 * tab.W.interp_unchecked(xr, yr, thloc);
          pinned[n] = 1;
        }
      }
    }
  }

  // Per-layer sampling plans for the backward (-A1) and forward (+A1) samples.
  std::vector<detail::SamplePlan> pm(nt), pp(nt);
  for (int k = 0; k < nt; ++k) {
    double c = std::cos(g.theta(k)), s = std::sin(g.theta(k));
    pm[k] = detail::make_plan(-c, -s);
    pp[k] = detail::make_plan(c, s);
  }

  // Cost values per voxel (1 if uniform), and eps per voxel.
  const bool unif = spec.uniform();
  const double* cost = unif ? nullptr : spec.cost.v.data();
  const double eps_global = prob.cfl * hmin * spec.delta;
  const bool fwd_only = spec.model == Model::F0plus;

  auto sample = [&](const std::vector<double>& w, int i, int j, int k,
                    const detail::SamplePlan& pl) -> double {
    int i0 = i + pl.di, j0 = j + pl.dj;
    if (i0 < 0 || j0 < 0 || i0 + 1 >= nx || j0 + 1 >= ny) {
      // partially or fully outside: outside nodes count as unreachable
      double acc = 0;
      auto get = [&](int a, int b, double wt) {
        if (wt == 0) return 0.0;
        if (a < 0 || b < 0 || a >= nx || b >= ny) return wt * kInf;
        return wt * w[g.index(a, b, k)];
      };
      acc += get(i0, j0, pl.w00);
      acc += get(i0 + 1, j0, pl.w10);
      acc += get(i0, j0 + 1, pl.w01);
      acc += get(i0 + 1, j0 + 1, pl.w11);
      return acc;
    }
    const double* base = w.data() + g.index(i0, j0, k);
    return pl.w00 * base[0] + pl.w10 * base[1] + pl.w01 * base[nx] +
           pl.w11 * base[nx + 1];
  };

  // Switched one-sided theta difference: second order when the two-point
  // stencil toward the neighbor is monotone and fully reached, first order
  // otherwise.
  auto upwind = [](double w, double w1, double w2) {
    if (w2 < 0.5 * kInf && w2 <= w1) return 0.5 * (3 * w - 4 * w1 + w2);
    return w - w1;
  };

  double prev_rel = kInf;
  for (int it = 0; it < prob.max_iters; ++it) {
    double maxrel = 0;
    for (int k = 0; k < nt; ++k) {
      int ku = (k + 1) % nt, kd = (k + nt - 1) % nt;
      int ku2 = (k + 2) % nt, kd2 = (k + nt - 2) % nt;
      const detail::SamplePlan& plm = pm[k];
      const detail::SamplePlan& plp = pp[k];
      for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
          std::size_t n = g.index(i, j, k);
          if (pinned[n]) {
            nxt[n] = cur[n];
            continue;
          }
          double w = cur[n];
          double wm = sample(cur, i, j, k, plm);
          double wp = sample(cur, i, j, k, plp);
          double wu = cur[g.index(i, j, ku)];
          double wd = cur[g.index(i, j, kd)];

          double a1;
          if (fwd_only) {
            a1 = std::max(w - wm, 0.0);  // dx = 1
          } else {
            a1 = std::max({w - wm, w - wp, 0.0});
          }
          double wu2 = cur[g.index(i, j, ku2)];
          double wd2 = cur[g.index(i, j, kd2)];
          double a3 = std::max({upwind(w, wd, wd2) / dth,
                                upwind(w, wu, wu2) / dth, 0.0});
          double c = unif ? 1.0 : cost[n];
          double f = std::sqrt(a1 * a1 / (xi * xi) + a3 * a3) / c;
          // the 3/2 diagonal coefficient of the second-order theta
          // difference shrinks the stable pseudo-time step accordingly
          double eps =
              (prob.global_step ? eps_global : prob.cfl * hmin * c) / 1.5;
          double cand = w + eps * (1.0 - f);
          // floor: never drop below the best neighbor minus one local cell
          double floor_v = std::min(std::min(wm, wp), std::min(wu, wd)) -
                           c * (xi + dth);
          cand = std::max(cand, floor_v);
          cand = std::max(cand, 0.0);
          cand = std::min(cand, kInf);
          nxt[n] = cand;
          double rel = std::abs(cand - w) /
                       (std::min(std::abs(w), std::abs(cand)) + 1e-12);
          if (rel > maxrel) maxrel = rel;
        }
      }
    }
    cur.swap(nxt);
    out.residual_history.push_back(maxrel);
    out.iters = it + 1;
    if (maxrel <= prob.tol) {
      out.converged = true;
      break;
    }
    prev_rel = maxrel;
  }
  (void)prev_rel;
  out.W.v = std::move(cur);
  if (!out.converged && prob.max_iters > 0 &&
      out.residual_history.back() > 100 * prob.tol)
    throw EikonalDivergence("eikonal_solve: no convergence after " +
                                std::to_string(out.iters) + " iterations",
                            out.residual_history, out);
  return out;
}

// Per-voxel PDE residual |F*(p, dW) - 1| by central differences, excluding a
// small neighborhood of the source (W is not differentiable there), the
// spatial border, and unreached voxels.
inline ResidualStats residual_report(const DistanceMap& map,
                                     const FinslerSpec& spec,
                                     int source_margin = 3) {
  const GridSpec& g = map.W.grid;
  const double dth = g.dtheta();
  std::vector<double> res;
  res.reserve(g.size());
  for (int k = 0; k < g.nt; ++k) {
    double th = g.theta(k);
    double c = std::cos(th), s = std::sin(th);
    int ku = (k + 1) % g.nt, kd = (k + g.nt - 1) % g.nt;
    for (int j = 1; j < g.ny - 1; ++j) {
      for (int i = 1; i < g.nx - 1; ++i) {
        int dk = std::abs(k - map.source_idx[2]);
        dk = std::min(dk, g.nt - dk);
        if (std::abs(i - map.source_idx[0]) <= source_margin &&
            std::abs(j - map.source_idx[1]) <= source_margin &&
            dk <= source_margin)
          continue;
        double w = map.W.at(i, j, k);
        if (w >= 0.5 * kInf) continue;
        double x = i, y = j;
        if (x - std::abs(c) < 0 || x + std::abs(c) > g.nx - 1 ||
            y - std::abs(s) < 0 || y + std::abs(s) > g.ny - 1)
          continue;
        double wp = map.W.interp_unchecked(x + c, y + s, th);
        double wm = map.W.interp_unchecked(x - c, y - s, th);
        double wu = map.W.at(i, j, ku), wd = map.W.at(i, j, kd);
        if (std::max({wp, wm, wu, wd}) >= 0.5 * kInf) continue;
        double p1 = 0.5 * (wp - wm);
        double p3 = 0.5 * (wu - wd) / dth;
        double f = dual_hamiltonian(spec, {x, y, th}, p1, p3);
        res.push_back(std::abs(f - 1.0));
      }
    }
  }
  ResidualStats st;
  st.count = res.size();
  if (res.empty()) return st;
  std::sort(res.begin(), res.end());
  st.median = res[res.size() / 2];
  st.p95 = res[std::size_t(0.95 * double(res.size() - 1))];
  return st;
}

}  // namespace plb
