// Geometric vocabulary shared by the solvers: the left-invariant frame on
// R^2 x S^1, the (forward-gear restricted) Finsler line element and its dual,
// sampled curves with their velocity controls u1 = xdot . n and u3 = thetadot,
// cusp detection, and the deviation-from-horizontality angle phi.
#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "grid.hpp"

namespace plb {

enum class Model { F0, F0plus };

struct Frame {
  double a1[3], a2[3], a3[3];
};

inline Frame left_frame(double th) {
  double c = std::cos(th), s = std::sin(th);
  return Frame{{c, s, 0}, {-s, c, 0}, {0, 0, 1}};
}

// Which metric, the bending stiffness xi (1/pixel), and the cost field C with
// values in [delta, 1]. A default-constructed cost means C == 1 (analytic
// setting); `uniform` short-circuits field lookups in hot loops.
struct FinslerSpec {
  Model model = Model::F0;
  double xi = 1.0;
  RealField cost;   // empty => C == 1 everywhere
  double delta = 1.0;

  FinslerSpec() = default;
  FinslerSpec(Model m, double xi_) : model(m), xi(xi_) {
    if (xi_ <= 0) throw std::invalid_argument("FinslerSpec: xi must be positive");
  }
  FinslerSpec(Model m, double xi_, RealField c) : model(m), xi(xi_), cost(std::move(c)) {
    if (xi_ <= 0) throw std::invalid_argument("FinslerSpec: xi must be positive");
    delta = kInf;
    for (double x : cost.v) delta = std::min(delta, x);
    if (delta <= 0)
      throw std::invalid_argument("FinslerSpec: cost must be strictly positive");
  }

  bool uniform() const { return cost.v.empty(); }
  double C(const Point& p) const {
    return uniform() ? 1.0 : cost.interp_clamped(p.x, p.y, p.th);
  }
};

// Dual Hamiltonian F^*(p, .) evaluated on the (A1, A3) covector components.
// The forward-gear model clamps the A1 component to its positive part.
inline double dual_hamiltonian(const FinslerSpec& spec, const Point& p,
                               double p1, double p3) {
  if (spec.model == Model::F0plus) p1 = std::max(p1, 0.0);
  double c = spec.C(p);
  return std::sqrt(p1 * p1 / (spec.xi * spec.xi) + p3 * p3) / c;
}

// Marker for phi at samples with (numerically) zero spatial velocity: the
// switching logic must treat those as "not horizontal".
inline constexpr double kPhiUndefined = std::numeric_limits<double>::quiet_NaN();
inline bool phi_defined(double phi) { return !std::isnan(phi); }

struct Curve {
  std::vector<Point> samples;           // uniform parameter steps
  std::vector<double> u1, u3, phi;      // derived, same length as samples
  double length = 0;                    // Finsler length, filled by finsler_length

  std::size_t size() const { return samples.size(); }

  // Central-difference controls with shortest-increment theta unwrapping.
  // dt is the parameter step between consecutive samples.
  void compute_controls(double dt = 1.0) {
    std::size_t n = samples.size();
    u1.assign(n, 0.0);
    u3.assign(n, 0.0);
    phi.assign(n, kPhiUndefined);
    if (n < 2) return;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t ia = i == 0 ? 0 : i - 1;
      std::size_t ib = i + 1 == n ? n - 1 : i + 1;
      double span = double(ib - ia) * dt;
      double dx = (samples[ib].x - samples[ia].x) / span;
      double dy = (samples[ib].y - samples[ia].y) / span;
      double dth = wrap_pi(samples[ib].th - samples[ia].th) / span;
      double c = std::cos(samples[i].th), s = std::sin(samples[i].th);
      u1[i] = dx * c + dy * s;
      u3[i] = dth;
      double speed = std::hypot(dx, dy);
      if (speed > 1e-9) {
        double cosphi = std::clamp(u1[i] / speed, -1.0, 1.0);
        phi[i] = std::acos(cosphi);
      }
    }
  }
};

// Trapezoidal integral of C * sqrt(xi^2 u1^2 + u3^2). For the forward-gear
// model a sample with u1 < -tol makes the curve infeasible.
inline double finsler_length(const Curve& curve, const FinslerSpec& spec,
                             double dt = 1.0, double tol = 1e-6) {
  if (curve.samples.size() < 2)
    throw std::invalid_argument("finsler_length: need at least 2 samples");
  if (curve.u1.size() != curve.samples.size())
    throw std::invalid_argument("finsler_length: controls not computed");
  std::size_t n = curve.samples.size();
  std::vector<double> f(n);
  double maxu1 = 0;
  for (double u : curve.u1) maxu1 = std::max(maxu1, std::abs(u));
  for (std::size_t i = 0; i < n; ++i) {
    if (spec.model == Model::F0plus && curve.u1[i] < -std::max(tol, tol * maxu1) - 1e-12)
      throw std::domain_error("finsler_length: curve infeasible for forward-gear model");
    double sp = std::sqrt(spec.xi * spec.xi * curve.u1[i] * curve.u1[i] +
                          curve.u3[i] * curve.u3[i]);
    f[i] = spec.C(curve.samples[i]) * sp;
  }
  double len = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) len += 0.5 * (f[i] + f[i + 1]) * dt;
  return len;
}

// Parameter locations (as fractional sample indices) of sign changes of u1
// whose magnitude exceeds tol_frac * max|u1| on a `window`-sample stretch on
// both sides — the discrete surrogate for a transversal zero-crossing.
inline std::vector<double> detect_cusps(const Curve& curve,
                                        double tol_frac = 0.05,
                                        int window = 3) {
  std::vector<double> out;
  const auto& u = curve.u1;
  std::size_t n = u.size();
  if (n < std::size_t(2 * window)) return out;
  double maxu = 0;
  for (double x : u) maxu = std::max(maxu, std::abs(x));
  if (maxu <= 0) return out;
  double tol = tol_frac * maxu;

  // Compress the control sequence into runs of solidly positive / solidly
  // negative samples (|u1| > tol); a cusp is a +run followed by a -run (or
  // vice versa) each at least `window` samples long, with the crossing placed
  // midway between them.
  struct Run { int sign; std::size_t begin, end; };  // [begin, end)
  std::vector<Run> runs;
  for (std::size_t i = 0; i < n; ++i) {
    int s = u[i] > tol ? 1 : (u[i] < -tol ? -1 : 0);
    if (s == 0) continue;
    if (!runs.empty() && runs.back().sign == s && runs.back().end == i)
      runs.back().end = i + 1;
    else if (!runs.empty() && runs.back().sign == s && i - runs.back().end <= 1)
      runs.back().end = i + 1;  // bridge a single sub-tolerance sample
    else
      runs.push_back({s, i, i + 1});
  }
  for (std::size_t r = 0; r + 1 < runs.size(); ++r) {
    const Run& a = runs[r];
    const Run& b = runs[r + 1];
    if (a.sign == b.sign) continue;
    if (a.end - a.begin < std::size_t(window)) continue;
    if (b.end - b.begin < std::size_t(window)) continue;
    double t = 0.5 * (double(a.end - 1) + double(b.begin));
    out.push_back(t / double(n - 1));
  }
  return out;
}

// ------------------------------ CSV ----------------------------------------

inline void save_curve_csv(const std::string& path, const Curve& curve,
                           double dt = 1.0) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("save_curve_csv: cannot open " + path);
  os << "t,x,y,theta,u1,u3,phi\n";
  char buf[256];
  for (std::size_t i = 0; i < curve.samples.size(); ++i) {
    const Point& p = curve.samples[i];
    double u1 = i < curve.u1.size() ? curve.u1[i] : 0;
    double u3 = i < curve.u3.size() ? curve.u3[i] : 0;
    double ph = i < curve.phi.size() ? curve.phi[i] : kPhiUndefined;
    std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n",
                  double(i) * dt, p.x, p.y, p.th, u1, u3, ph);
    os << buf;
  }
}

inline Curve load_curve_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_curve_csv: cannot open " + path);
  Curve c;
  std::string line;
  std::getline(is, line);  // header
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    double t, x, y, th, u1, u3, ph;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf,%lf", &t, &x, &y,
                    &th, &u1, &u3, &ph) < 4)
      throw std::runtime_error("load_curve_csv: bad row in " + path);
    c.samples.push_back({x, y, wrap_2pi(th)});
  }
  c.compute_controls();
  return c;
}

}  // namespace plb
