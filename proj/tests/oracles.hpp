// Reference implementations used only by tests: graph shortest-path oracles
// and brute-force scans the solvers are validated against.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <random>
#include <vector>

#include "plb/costfield.hpp"
#include "plb/geometry.hpp"
#include "plb/grid.hpp"

namespace oracle {

using plb::GridSpec;
using plb::kInf;
using plb::kPi;
using plb::kTwoPi;

// Dijkstra on the voxel graph. Edges per layer: integer spatial steps
// (di, dj) with max coordinate <= 3 whose direction lies within half a layer
// spacing of the layer orientation (forward only for the forward-gear model,
// both signs otherwise), weighted by the Finsler length of the straight step
// using the endpoint-averaged cost; plus +-1 steps along theta. The graph
// metric slightly overestimates the continuum distance (discrete directions
// and translate-then-rotate decomposition), which is what the 5% agreement
// bound accounts for.
inline std::vector<double> dijkstra_distance(const plb::FinslerSpec& spec,
                                             const GridSpec& g, int si, int sj,
                                             int sk) {
  const double dth = g.dtheta();
  const bool fwd = spec.model == plb::Model::F0plus;

  // Per-layer admissible moves. Straight steps keep the original
  // within-half-a-layer alignment rule. Turning moves (dk != 0) are charged
  // the cost of an explicitly feasible maneuver: rotate in place by r1,
  // follow a circular arc with turning phi_arc whose chord is the lattice
  // step, rotate in place by r2, minimized over a few arc candidates. Every
  // weight is the length of a feasible path, so the oracle can only
  // overestimate.
  struct Move {
    int di, dj, dk;
    double len;
  };
  std::vector<std::vector<Move>> moves(g.nt);
  auto maneuver = [&](double A, double phi, double chord) {
    // A: chord direction minus start heading; phi: net heading change
    double best = kInf;
    for (double parc : {phi, 2 * A, 2 * (phi - A), 0.0}) {
      if (std::abs(parc) > 1.8 * kPi) continue;
      double q = std::abs(parc) < 1e-9
                     ? 1.0
                     : (0.5 * std::abs(parc)) / std::sin(0.5 * std::abs(parc));
      if (q < 0) continue;  // arc longer than a half turn
      double r1 = A - 0.5 * parc, r2 = phi - A - 0.5 * parc;
      double c = std::abs(r1) + std::abs(r2) +
                 std::sqrt(spec.xi * spec.xi * chord * chord * q * q +
                           parc * parc);
      best = std::min(best, c);
    }
    return best;
  };
  for (int k = 0; k < g.nt; ++k) {
    double th = g.theta(k);
    for (int dj = -3; dj <= 3; ++dj)
      for (int di = -3; di <= 3; ++di) {
        if (di == 0 && dj == 0) continue;
        double ang = std::atan2(dj, di);
        double chord = std::hypot(double(di), double(dj));
        double dev_f = std::abs(plb::wrap_pi(ang - th));
        double dev_b = std::abs(plb::wrap_pi(ang - th - kPi));
        if (dev_f <= 0.51 * dth || (!fwd && dev_b <= 0.51 * dth))
          moves[k].push_back({di, dj, 0, spec.xi * chord});
        for (int dk = -2; dk <= 2; ++dk) {
          if (dk == 0) continue;
          double phi = dk * dth;
          double A_f = plb::wrap_pi(ang - th);
          double len = maneuver(A_f, phi, chord);
          if (!fwd) {
            double A_b = plb::wrap_pi(ang - th - kPi);
            len = std::min(len, maneuver(A_b, phi, chord));
          }
          if (std::abs(A_f) <= 0.45 || (!fwd && std::abs(plb::wrap_pi(
                                            ang - th - kPi)) <= 0.45))
            moves[k].push_back({di, dj, dk, len});
        }
      }
  }

  auto cost_at = [&](int i, int j, int k) {
    return spec.uniform() ? 1.0 : spec.cost.at(i, j, k);
  };
  // average cost along the straight chord of a move (trapezoid over 5
  // samples, interpolated); theta taken at the end layer for the samples in
  // between, which is accurate enough for an oracle
  auto cost_along = [&](int i, int j, int k, int ni, int nj, int nk) {
    if (spec.uniform()) return 1.0;
    double acc = 0.5 * (cost_at(i, j, k) + cost_at(ni, nj, nk));
    for (int t = 1; t <= 3; ++t) {
      double s = t / 4.0;
      double x = i + s * (ni - i), y = j + s * (nj - j);
      acc += spec.cost.interp_clamped(x, y, g.theta(nk));
    }
    return acc / 4.0;
  };

  std::vector<double> dist(g.size(), kInf);
  using QN = std::pair<double, std::size_t>;
  std::priority_queue<QN, std::vector<QN>, std::greater<QN>> pq;
  std::size_t s = g.index(si, sj, sk);
  dist[s] = 0;
  pq.push({0, s});
  while (!pq.empty()) {
    auto [d, n] = pq.top();
    pq.pop();
    if (d > dist[n]) continue;
    int i = int(n % g.nx), j = int((n / g.nx) % g.ny),
        k = int(n / (std::size_t(g.nx) * g.ny));
    double c0 = cost_at(i, j, k);
    for (const auto& mv : moves[k]) {
      int ni = i + mv.di, nj = j + mv.dj;
      if (ni < 0 || nj < 0 || ni >= g.nx || nj >= g.ny) continue;
      int nk = ((k + mv.dk) % g.nt + g.nt) % g.nt;
      std::size_t nn = g.index(ni, nj, nk);
      double w = cost_along(i, j, k, ni, nj, nk) * mv.len;
      if (dist[n] + w < dist[nn]) {
        dist[nn] = dist[n] + w;
        pq.push({dist[nn], nn});
      }
    }
    for (int dk : {-1, 1}) {
      int nk = ((k + dk) % g.nt + g.nt) % g.nt;
      std::size_t nn = g.index(i, j, nk);
      double w = 0.5 * (c0 + cost_at(i, j, nk)) * dth;
      if (dist[n] + w < dist[nn]) {
        dist[nn] = dist[n] + w;
        pq.push({dist[nn], nn});
      }
    }
  }
  return dist;
}

// Brute-force cusp scan: indices of strict sign changes of u1, requiring
// magnitude above tol on `window` samples to each side. Mirrors the
// definition directly instead of the run-compression in the library.
inline std::vector<std::size_t> sign_change_scan(const std::vector<double>& u,
                                                 double tol, int window) {
  // restrict to the samples with |u| > tol, then look for sign changes with
  // `window` same-sign samples on each side of the change
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < u.size(); ++i)
    if (std::abs(u[i]) > tol) idx.push_back(i);
  std::vector<std::size_t> out;
  for (std::size_t a = 0; a + 1 < idx.size(); ++a) {
    if (u[idx[a]] * u[idx[a + 1]] >= 0) continue;
    bool ok = a + 1 >= std::size_t(window) &&
              a + std::size_t(window) < idx.size();
    for (int w = 1; ok && w < window; ++w) {
      if (u[idx[a - std::size_t(w)]] * u[idx[a]] <= 0) ok = false;
      if (u[idx[a + 1 + std::size_t(w)]] * u[idx[a + 1]] <= 0) ok = false;
    }
    if (ok) out.push_back(idx[a]);
  }
  return out;
}

// Dijkstra approximation of the Riemannian distance from the origin on a fine
// (x, y, theta) lattice with the full left-invariant metric
// G = g11 w1^2 + g22 w2^2 + g33 w3^2; used to validate the logarithm-norm
// ball. `h` is the spatial step of the fine lattice, `ht` the angular step.
inline std::vector<double> riemann_ball_distance(const plb::MetricParams& g,
                                                 int half_n, double h,
                                                 int half_nt, double ht) {
  int nx = 2 * half_n + 1, nt = 2 * half_nt + 1;
  auto idx = [&](int i, int j, int k) {
    return (std::size_t(k) * nx + j) * nx + i;
  };
  std::vector<double> dist(std::size_t(nx) * nx * nt, kInf);
  using QN = std::pair<double, std::size_t>;
  std::priority_queue<QN, std::vector<QN>, std::greater<QN>> pq;
  std::size_t s = idx(half_n, half_n, half_nt);
  dist[s] = 0;
  pq.push({0, s});
  // 26-neighborhood
  while (!pq.empty()) {
    auto [d, n] = pq.top();
    pq.pop();
    if (d > dist[n]) continue;
    int i = int(n % nx), j = int((n / nx) % nx), k = int(n / (std::size_t(nx) * nx));
    for (int dk = -1; dk <= 1; ++dk)
      for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) {
          if (!di && !dj && !dk) continue;
          int ni = i + di, nj = j + dj, nk = k + dk;
          if (ni < 0 || nj < 0 || nk < 0 || ni >= nx || nj >= nx || nk >= nt)
            continue;
          double th = (k - half_nt) * ht + 0.5 * dk * ht;  // midpoint frame
          double dx = di * h, dy = dj * h, dthv = dk * ht;
          double c = std::cos(th), sgn = std::sin(th);
          double u1 = c * dx + sgn * dy;
          double u2 = -sgn * dx + c * dy;
          double w = std::sqrt(g.g11 * u1 * u1 + g.g22 * u2 * u2 +
                               g.g33 * dthv * dthv);
          std::size_t nn = idx(ni, nj, nk);
          if (dist[n] + w < dist[nn]) {
            dist[nn] = dist[n] + w;
            pq.push({dist[nn], nn});
          }
        }
  }
  return dist;
}

// Smooth random antipodally-symmetric cost field in [delta, 1]: a few random
// low-frequency Fourier modes, symmetrized, rescaled.
inline plb::RealField random_symmetric_cost(const GridSpec& g, double delta,
                                            unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  struct Mode {
    double kx, ky;
    int m;  // even angular frequency keeps theta -> theta + pi symmetry
    double amp, phase, aphase;
  };
  std::vector<Mode> modes;
  for (int q = 0; q < 5; ++q)
    modes.push_back({uni(rng) * 2.0 * kPi / g.nx, uni(rng) * 2.0 * kPi / g.ny,
                     2 * (int(std::abs(uni(rng)) * 2) + (q % 2)), uni(rng),
                     uni(rng) * kPi, uni(rng) * kPi});
  plb::RealField f(g);
  double mn = kInf, mx = -kInf;
  for (int k = 0; k < g.nt; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        double v = 0;
        for (const auto& m : modes)
          v += m.amp * std::cos(m.kx * i + m.ky * j + m.phase) *
               std::cos(m.m * g.theta(k) + m.aphase);
        f.at(i, j, k) = v;
        mn = std::min(mn, v);
        mx = std::max(mx, v);
      }
  for (auto& x : f.v) x = delta + (1.0 - delta) * (x - mn) / std::max(mx - mn, 1e-12);
  // enforce the antipodal symmetry exactly
  plb::RealField r = plb::antipodal_reflect(f);
  for (std::size_t n = 0; n < f.v.size(); ++n) f.v[n] = 0.5 * (f.v[n] + r.v[n]);
  return f;
}

}  // namespace oracle
