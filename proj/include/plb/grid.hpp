// Discretized R^2 x S^1 domain: grid description, fields, trilinear
// interpolation with a periodic orientation axis, and the antipodal map that
// realizes the projective identification (x, n) ~ (x, -n).
//
// Conventions used throughout the library:
//   * dx = 1 pixel, fixed. Physical scale is absorbed by the stiffness xi.
//   * theta lives in [0, 2*pi); n_theta is even so theta -> theta + pi is an
//     exact index shift by n_theta/2.
//   * storage is C-order with theta slowest, then y, then x fastest.
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace plb {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Value standing in for "unreachable"; large but finite so arithmetic stays
// well behaved in the relaxation solver.
inline constexpr double kInf = 1e10;

inline double wrap_2pi(double th) {
  th = std::fmod(th, kTwoPi);
  if (th < 0) th += kTwoPi;
  // fmod can return exactly 2*pi after the negative fixup
  if (th >= kTwoPi) th -= kTwoPi;
  return th;
}

// Wrap an angular difference to (-pi, pi].
inline double wrap_pi(double dth) {
  dth = std::fmod(dth, kTwoPi);
  if (dth > kPi) dth -= kTwoPi;
  if (dth <= -kPi) dth += kTwoPi;
  return dth;
}

struct GridSpec {
  int nx = 0;
  int ny = 0;
  int nt = 0;  // orientation samples over [0, 2*pi); must be even

  GridSpec() = default;
  GridSpec(int nx_, int ny_, int nt_) : nx(nx_), ny(ny_), nt(nt_) {
    if (nt % 2 != 0)
      throw std::invalid_argument("GridSpec: n_theta must be even");
    if (nx <= 0 || ny <= 0 || nt <= 0)
      throw std::invalid_argument("GridSpec: dimensions must be positive");
  }

  double dtheta() const { return kTwoPi / nt; }
  std::size_t size() const {
    return std::size_t(nx) * std::size_t(ny) * std::size_t(nt);
  }
  std::size_t index(int i, int j, int k) const {
    return (std::size_t(k) * ny + j) * nx + i;
  }
  double theta(int k) const { return k * dtheta(); }
  bool operator==(const GridSpec& o) const {
    return nx == o.nx && ny == o.ny && nt == o.nt;
  }
};

struct Point {
  double x = 0, y = 0, th = 0;
};

inline Point antipode(const Point& p) { return {p.x, p.y, wrap_2pi(p.th + kPi)}; }

template <class T>
struct Field3 {
  GridSpec grid;
  std::vector<T> v;

  Field3() = default;
  explicit Field3(const GridSpec& g, T fill = T{}) : grid(g), v(g.size(), fill) {}

  T& at(int i, int j, int k) { return v[grid.index(i, j, k)]; }
  const T& at(int i, int j, int k) const { return v[grid.index(i, j, k)]; }

  // k with periodic wrap
  T atp(int i, int j, int k) const {
    k %= grid.nt;
    if (k < 0) k += grid.nt;
    return v[grid.index(i, j, k)];
  }

  // Trilinear interpolation; theta periodic, spatial domain strict.
  T interp(const Point& p) const {
    if (p.x < 0 || p.x > grid.nx - 1 || p.y < 0 || p.y > grid.ny - 1)
      throw std::domain_error("Field3::interp: spatial coordinate outside domain");
    return interp_unchecked(p.x, p.y, p.th);
  }

  // Same, but clamps to the spatial border instead of throwing. Used by hot
  // loops that have already decided how to treat the boundary.
  T interp_clamped(double x, double y, double th) const {
    if (x < 0) x = 0;
    if (y < 0) y = 0;
    if (x > grid.nx - 1) x = grid.nx - 1;
    if (y > grid.ny - 1) y = grid.ny - 1;
    return interp_unchecked(x, y, th);
  }

  T interp_unchecked(double x, double y, double th) const {
    int i0 = int(std::floor(x));
    int j0 = int(std::floor(y));
    if (i0 >= grid.nx - 1) i0 = grid.nx - 2;
    if (j0 >= grid.ny - 1) j0 = grid.ny - 2;
    if (i0 < 0) i0 = 0;
    if (j0 < 0) j0 = 0;
    double fx = x - i0, fy = y - j0;
    double t = wrap_2pi(th) / grid.dtheta();
    int k0 = int(std::floor(t));
    double ft = t - k0;
    k0 %= grid.nt;
    int k1 = (k0 + 1) % grid.nt;

    auto plane = [&](int k) {
      const T* base = v.data() + grid.index(0, 0, k);
      const T* r0 = base + std::size_t(j0) * grid.nx + i0;
      const T* r1 = r0 + grid.nx;
      T a = r0[0] * (1 - fx) + r0[1] * fx;
      T b = r1[0] * (1 - fx) + r1[1] * fx;
      return a * (1 - fy) + b * fy;
    };
    if (grid.ny == 1) {
      // degenerate, not used in practice but keep it defined
      return plane(k0) * (1 - ft) + plane(k1) * ft;
    }
    return plane(k0) * (1 - ft) + plane(k1) * ft;
  }
};

using RealField = Field3<double>;
using ComplexField = Field3<std::complex<double>>;

// theta -> theta + pi as an exact index shift (requires even n_theta, which
// GridSpec already enforces).
template <class T>
Field3<T> antipodal_reflect(const Field3<T>& f) {
  Field3<T> out(f.grid);
  int half = f.grid.nt / 2;
  for (int k = 0; k < f.grid.nt; ++k) {
    int ks = (k + half) % f.grid.nt;
    std::memcpy(out.v.data() + f.grid.index(0, 0, k),
                f.v.data() + f.grid.index(0, 0, ks),
                sizeof(T) * std::size_t(f.grid.nx) * f.grid.ny);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization: one-line JSON header + flat little-endian float32 payload,
// theta slowest / x fastest (the in-memory order). Round-trips bit-exactly
// for float32 data.
// ---------------------------------------------------------------------------

namespace detail {
inline void write_f32(std::ostream& os, const float* p, std::size_t n) {
  os.write(reinterpret_cast<const char*>(p),
           std::streamsize(n * sizeof(float)));
}
}  // namespace detail

inline void save_field(const std::string& path, const RealField& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_field: cannot open " + path);
  nlohmann::json h{{"nx", f.grid.nx}, {"ny", f.grid.ny}, {"ntheta", f.grid.nt},
                   {"dtype", "float32"}, {"complex", false}};
  os << h.dump() << "\n";
  std::vector<float> buf(f.v.begin(), f.v.end());
  detail::write_f32(os, buf.data(), buf.size());
}

inline void save_field(const std::string& path, const ComplexField& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_field: cannot open " + path);
  nlohmann::json h{{"nx", f.grid.nx}, {"ny", f.grid.ny}, {"ntheta", f.grid.nt},
                   {"dtype", "float32"}, {"complex", true}};
  os << h.dump() << "\n";
  std::vector<float> buf;
  buf.reserve(f.v.size() * 2);
  for (auto& z : f.v) {
    buf.push_back(float(z.real()));
    buf.push_back(float(z.imag()));
  }
  detail::write_f32(os, buf.data(), buf.size());
}

inline nlohmann::json read_field_header(std::istream& is) {
  std::string line;
  if (!std::getline(is, line))
    throw std::runtime_error("load_field: missing header line");
  return nlohmann::json::parse(line);
}

inline RealField load_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_field: cannot open " + path);
  auto h = read_field_header(is);
  if (h.value("complex", false))
    throw std::runtime_error("load_field: field is complex, use load_field_complex");
  GridSpec g(h.at("nx").get<int>(), h.at("ny").get<int>(), h.at("ntheta").get<int>());
  RealField f(g);
  std::vector<float> buf(g.size());
  is.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size() * 4));
  if (!is) throw std::runtime_error("load_field: truncated payload in " + path);
  for (std::size_t n = 0; n < buf.size(); ++n) f.v[n] = buf[n];
  return f;
}

inline ComplexField load_field_complex(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_field_complex: cannot open " + path);
  auto h = read_field_header(is);
  if (!h.value("complex", false))
    throw std::runtime_error("load_field_complex: field is real");
  GridSpec g(h.at("nx").get<int>(), h.at("ny").get<int>(), h.at("ntheta").get<int>());
  ComplexField f(g);
  std::vector<float> buf(g.size() * 2);
  is.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size() * 4));
  if (!is) throw std::runtime_error("load_field_complex: truncated payload");
  for (std::size_t n = 0; n < g.size(); ++n)
    f.v[n] = {double(buf[2 * n]), double(buf[2 * n + 1])};
  return f;
}

}  // namespace plb
