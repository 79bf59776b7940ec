// Invertible orientation-score transform: lift a 2D image to R^2 x S^1 by
// correlating with rotated copies of a complex "cake" wavelet, built in the
// Fourier domain as angular wedges that tile the frequency plane.
//
// Construction (the source material leaves the radial/angular details to
// external work; these are this library's choices, exposed as parameters):
//   * angular profile sqrt(B_q((phi - theta_k - pi/2)/s_theta)) with B_q the
//     B-spline of order q = overlap - 2 (quadratic for the default overlap 4).
//     Squared magnitudes then sum to exactly 1 across orientations (B-spline
//     partition of unity), which is the reconstruction condition.
//   * raised-cosine radial low-pass: flat to flat_frac*cutoff*Nyquist, cos^2
//     rolloff to cutoff*Nyquist (default cutoff 0.8).
//   * the DC bin is split evenly over the orientations so summing the layers
//     preserves the mean.
// The pi/2 angular offset makes layer theta_k respond to structures *running
// along* direction (cos theta_k, sin theta_k).
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include <fftw3.h>

#include "grid.hpp"
#include "image.hpp"

namespace plb {

// Centered cardinal B-spline of order q (support (q+1)/2 on each side),
// Cox–de Boor recursion.
inline double bspline(int q, double x) {
  if (q == 0) return (x >= -0.5 && x < 0.5) ? 1.0 : 0.0;
  double a = (x + 0.5 * (q + 1)) * bspline(q - 1, x + 0.5);
  double b = (0.5 * (q + 1) - x) * bspline(q - 1, x - 0.5);
  return (a + b) / q;
}

struct WaveletParams {
  int n_orient = 12;   // even
  int overlap = 4;     // angular B-spline order = overlap - 2
  int size = 31;       // odd spatial support in pixels
  double cutoff = 0.8;      // radial cutoff as a fraction of Nyquist
  double flat_frac = 0.5;   // flat part of the radial window
};

struct WaveletStack {
  WaveletParams params;
  // spatial-domain filters, centered, row-major size x size
  std::vector<std::vector<std::complex<double>>> filters;
  // Fourier-domain construction on the size x size grid (real, FFT index
  // order); kept for diagnostics and tests
  std::vector<std::vector<double>> fourier;
};

namespace detail {
struct Fft2 {
  int nx, ny;
  std::vector<std::complex<double>> buf;
  Fft2(int nx_, int ny_) : nx(nx_), ny(ny_), buf(std::size_t(nx_) * ny_) {}
  void run(int sign) {
    fftw_plan plan = fftw_plan_dft_2d(
        ny, nx, reinterpret_cast<fftw_complex*>(buf.data()),
        reinterpret_cast<fftw_complex*>(buf.data()), sign, FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
  }
};
// FFT frequency in cycles/sample for index i of n.
inline double fft_freq(int i, int n) {
  return (i <= n / 2 ? i : i - n) / double(n);
}
}  // namespace detail

inline WaveletStack build_cake_wavelets(const WaveletParams& params) {
  if (params.n_orient % 2 != 0)
    throw std::invalid_argument("build_cake_wavelets: n_orient must be even");
  if (params.size % 2 == 0)
    throw std::invalid_argument("build_cake_wavelets: size must be odd");
  if (params.overlap < 2)
    throw std::invalid_argument("build_cake_wavelets: overlap must be >= 2");
  const int s = params.size;
  const int no = params.n_orient;
  const int q = params.overlap - 2;
  const double s_theta = kTwoPi / no;
  const double nyq = 0.5;  // cycles/pixel
  const double hi = params.cutoff * nyq;
  const double lo = params.flat_frac * hi;

  WaveletStack stack;
  stack.params = params;
  stack.filters.resize(no);
  stack.fourier.resize(no);

  for (int k = 0; k < no; ++k) {
    double th_k = k * s_theta;
    std::vector<double>& hat = stack.fourier[k];
    hat.assign(std::size_t(s) * s, 0.0);
    for (int jv = 0; jv < s; ++jv) {
      double fy = detail::fft_freq(jv, s);
      for (int iu = 0; iu < s; ++iu) {
        double fx = detail::fft_freq(iu, s);
        double rho = std::hypot(fx, fy);
        double val;
        if (rho == 0.0) {
          val = 1.0 / no;  // DC split evenly
        } else {
          double radial;
          if (rho <= lo)
            radial = 1.0;
          else if (rho >= hi)
            radial = 0.0;
          else {
            double t = (rho - lo) / (hi - lo);
            double c = std::cos(0.5 * kPi * t);
            radial = c * c;
          }
          if (radial == 0.0) {
            val = 0.0;
          } else {
            double phi = std::atan2(fy, fx);
            double u = wrap_pi(phi - th_k - 0.5 * kPi) / s_theta;
            double b = bspline(q, u);
            val = radial * (b > 0 ? std::sqrt(b) : 0.0);
          }
        }
        hat[std::size_t(jv) * s + iu] = val;
      }
    }
    // inverse FFT to the (complex) spatial filter, then center it
    detail::Fft2 fft(s, s);
    for (std::size_t n = 0; n < hat.size(); ++n) fft.buf[n] = hat[n];
    fft.run(FFTW_BACKWARD);
    std::vector<std::complex<double>> spatial(hat.size());
    int half = s / 2;
    for (int j = 0; j < s; ++j)
      for (int i = 0; i < s; ++i) {
        int js = (j + half + 1) % s;  // fftshift for odd s: center lands mid
        int is = (i + half + 1) % s;
        spatial[std::size_t(j) * s + i] =
            fft.buf[std::size_t(js) * s + is] / double(s * s);
      }
    stack.filters[k] = std::move(spatial);
  }
  return stack;
}

// Max deviation of sum_k |psi_hat_k|^2 from 1 over the mid-band annulus
// (reconstruction-condition diagnostic).
inline double partition_deviation(const WaveletStack& stack) {
  const int s = stack.params.size;
  const double nyq = 0.5;
  double lo = 0.15 * nyq, hi = 0.5 * stack.params.cutoff * nyq;
  double worst = 0;
  for (int jv = 0; jv < s; ++jv) {
    double fy = detail::fft_freq(jv, s);
    for (int iu = 0; iu < s; ++iu) {
      double fx = detail::fft_freq(iu, s);
      double rho = std::hypot(fx, fy);
      if (rho < lo || rho > hi) continue;
      double sum = 0;
      for (int k = 0; k < stack.params.n_orient; ++k) {
        double v = stack.fourier[k][std::size_t(jv) * s + iu];
        sum += v * v;
      }
      worst = std::max(worst, std::abs(sum - 1.0));
    }
  }
  return worst;
}

struct OrientationScore {
  ComplexField U;       // n_theta == n_orient layers
  int src_nx = 0, src_ny = 0;
  double src_min = 0, src_max = 1;
};

// Correlate the image with every rotated filter via FFT. The image is mirror
// extended by the filter half-width before the periodic transform so that
// wrap-around does not inject fake edge responses.
inline OrientationScore lift(const Image& img, const WaveletStack& stack) {
  const int s = stack.params.size;
  const int pad = s / 2;
  const int px = img.nx + 2 * pad, py = img.ny + 2 * pad;
  if (img.nx < 2 || img.ny < 2)
    throw std::invalid_argument("lift: image too small");

  auto mirror = [](int i, int n) {
    while (i < 0 || i >= n) {
      if (i < 0) i = -i - 1;
      if (i >= n) i = 2 * n - 1 - i;
    }
    return i;
  };

  detail::Fft2 fimg(px, py);
  for (int j = 0; j < py; ++j)
    for (int i = 0; i < px; ++i)
      fimg.buf[std::size_t(j) * px + i] =
          img.at(mirror(i - pad, img.nx), mirror(j - pad, img.ny));
  fimg.run(FFTW_FORWARD);

  OrientationScore out;
  out.src_nx = img.nx;
  out.src_ny = img.ny;
  out.src_min = *std::min_element(img.v.begin(), img.v.end());
  out.src_max = *std::max_element(img.v.begin(), img.v.end());
  GridSpec g(img.nx, img.ny, stack.params.n_orient);
  out.U = ComplexField(g);

  for (int k = 0; k < stack.params.n_orient; ++k) {
    // place the centered filter at the origin of the padded grid (wrapped)
    detail::Fft2 ffil(px, py);
    const auto& fil = stack.filters[k];
    for (int j = 0; j < s; ++j)
      for (int i = 0; i < s; ++i) {
        int ii = (i - pad + px) % px;
        int jj = (j - pad + py) % py;
        ffil.buf[std::size_t(jj) * px + ii] = fil[std::size_t(j) * s + i];
      }
    ffil.run(FFTW_FORWARD);
    detail::Fft2 prod(px, py);
    for (std::size_t n = 0; n < prod.buf.size(); ++n)
      prod.buf[n] = fimg.buf[n] * std::conj(ffil.buf[n]);
    prod.run(FFTW_BACKWARD);
    double norm = 1.0 / (double(px) * py);
    for (int j = 0; j < img.ny; ++j)
      for (int i = 0; i < img.nx; ++i)
        out.U.at(i, j, k) =
            prod.buf[std::size_t(j + pad) * px + (i + pad)] * norm;
  }
  return out;
}

// Approximate inverse: real part of the sum over orientation layers, affinely
// rescaled to the recorded input intensity range.
inline Image reconstruct(const OrientationScore& score) {
  Image out(score.U.grid.nx, score.U.grid.ny, 0.0);
  if (score.U.v.empty()) return out;
  for (int j = 0; j < out.ny; ++j)
    for (int i = 0; i < out.nx; ++i) {
      double sum = 0;
      for (int k = 0; k < score.U.grid.nt; ++k)
        sum += score.U.at(i, j, k).real();
      out.at(i, j) = sum;
    }
  double mn = *std::min_element(out.v.begin(), out.v.end());
  double mx = *std::max_element(out.v.begin(), out.v.end());
  if (mx > mn) {
    double a = (score.src_max - score.src_min) / (mx - mn);
    for (auto& x : out.v) x = score.src_min + a * (x - mn);
  }
  return out;
}

}  // namespace plb
