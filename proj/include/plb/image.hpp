// 2D image utilities: a small float image type, grayscale PNG/PGM I/O
// (8/16-bit), RGB PNG output for overlays, and Gaussian smoothing.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <png.h>

namespace plb {

struct Image {
  int nx = 0, ny = 0;
  std::vector<double> v;  // row-major, v[j*nx + i], intensities in [0,1]

  Image() = default;
  Image(int nx_, int ny_, double fill = 0.0) : nx(nx_), ny(ny_), v(std::size_t(nx_) * ny_, fill) {}
  double& at(int i, int j) { return v[std::size_t(j) * nx + i]; }
  double at(int i, int j) const { return v[std::size_t(j) * nx + i]; }
  double at_clamped(int i, int j) const {
    i = std::clamp(i, 0, nx - 1);
    j = std::clamp(j, 0, ny - 1);
    return v[std::size_t(j) * nx + i];
  }
  double interp(double x, double y) const {
    x = std::clamp(x, 0.0, double(nx - 1));
    y = std::clamp(y, 0.0, double(ny - 1));
    int i0 = std::min(int(x), nx - 2), j0 = std::min(int(y), ny - 2);
    if (i0 < 0) i0 = 0;
    if (j0 < 0) j0 = 0;
    double fx = x - i0, fy = y - j0;
    double a = at(i0, j0) * (1 - fx) + at(i0 + 1, j0) * fx;
    double b = at(i0, j0 + 1) * (1 - fx) + at(i0 + 1, j0 + 1) * fx;
    return a * (1 - fy) + b * fy;
  }
};

// --------------------------- PGM ------------------------------------------

inline Image read_pgm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("read_pgm: cannot open " + path);
  std::string magic;
  is >> magic;
  if (magic != "P5" && magic != "P2")
    throw std::runtime_error("read_pgm: not a PGM file: " + path);
  auto next_int = [&]() {
    int c;
    // skip whitespace and '#' comments
    while ((c = is.peek()) != EOF) {
      if (c == '#') {
        std::string line;
        std::getline(is, line);
      } else if (std::isspace(c)) {
        is.get();
      } else {
        break;
      }
    }
    long val;
    is >> val;
    return val;
  };
  long w = next_int(), h = next_int(), maxv = next_int();
  if (w <= 0 || h <= 0 || maxv <= 0)
    throw std::runtime_error("read_pgm: bad header in " + path);
  Image img{int(w), int(h)};
  if (magic == "P2") {
    for (auto& x : img.v) x = double(next_int()) / maxv;
    return img;
  }
  is.get();  // single whitespace after maxval
  if (maxv < 256) {
    std::vector<std::uint8_t> buf(img.v.size());
    is.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size()));
    for (std::size_t n = 0; n < buf.size(); ++n) img.v[n] = buf[n] / double(maxv);
  } else {
    std::vector<std::uint8_t> buf(img.v.size() * 2);
    is.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size()));
    for (std::size_t n = 0; n < img.v.size(); ++n)
      img.v[n] = double((buf[2 * n] << 8) | buf[2 * n + 1]) / maxv;  // big-endian per spec of PGM
  }
  if (!is) throw std::runtime_error("read_pgm: truncated " + path);
  return img;
}

inline void write_pgm(const std::string& path, const Image& img) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_pgm: cannot open " + path);
  os << "P5\n" << img.nx << " " << img.ny << "\n255\n";
  for (double x : img.v)
    os.put(char(std::uint8_t(std::clamp(x, 0.0, 1.0) * 255.0 + 0.5)));
}

// --------------------------- PNG ------------------------------------------

inline Image read_png_gray(const std::string& path) {
  FILE* fp = std::fopen(path.c_str(), "rb");
  if (!fp) throw std::runtime_error("read_png_gray: cannot open " + path);
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    std::fclose(fp);
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("read_png_gray: libpng failure on " + path);
  }
  png_init_io(png, fp);
  png_read_info(png, info);
  png_uint_32 w = png_get_image_width(png, info);
  png_uint_32 h = png_get_image_height(png, info);
  int depth = png_get_bit_depth(png, info);
  int color = png_get_color_type(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color & PNG_COLOR_MASK_COLOR || color == PNG_COLOR_TYPE_PALETTE)
    png_set_rgb_to_gray_fixed(png, 1, -1, -1);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  png_read_update_info(png, info);
  depth = png_get_bit_depth(png, info);
  double maxv = depth == 16 ? 65535.0 : 255.0;
  std::size_t rowbytes = png_get_rowbytes(png, info);
  std::vector<std::uint8_t> row(rowbytes);
  Image img{int(w), int(h)};
  for (png_uint_32 j = 0; j < h; ++j) {
    png_read_row(png, row.data(), nullptr);
    for (png_uint_32 i = 0; i < w; ++i) {
      double val = depth == 16 ? double((row[2 * i] << 8) | row[2 * i + 1]) : double(row[i]);
      img.at(int(i), int(j)) = val / maxv;
    }
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  std::fclose(fp);
  return img;
}

inline Image read_image(const std::string& path) {
  if (path.size() >= 4) {
    std::string ext = path.substr(path.size() - 4);
    for (auto& c : ext) c = char(std::tolower(c));
    if (ext == ".pgm") return read_pgm(path);
  }
  return read_png_gray(path);
}

namespace detail {
inline void write_png_impl(const std::string& path, int nx, int ny, int channels,
                           const std::vector<std::uint8_t>& bytes) {
  FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw std::runtime_error("write_png: cannot open " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    std::fclose(fp);
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("write_png: libpng failure on " + path);
  }
  png_init_io(png, fp);
  int type = channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
  png_set_IHDR(png, info, png_uint_32(nx), png_uint_32(ny), 8, type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int j = 0; j < ny; ++j)
    png_write_row(png, const_cast<png_bytep>(bytes.data() + std::size_t(j) * nx * channels));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}
}  // namespace detail

inline void write_png_gray(const std::string& path, const Image& img) {
  std::vector<std::uint8_t> bytes(img.v.size());
  for (std::size_t n = 0; n < img.v.size(); ++n)
    bytes[n] = std::uint8_t(std::clamp(img.v[n], 0.0, 1.0) * 255.0 + 0.5);
  detail::write_png_impl(path, img.nx, img.ny, 1, bytes);
}

struct RgbImage {
  int nx = 0, ny = 0;
  std::vector<std::uint8_t> v;  // 3 bytes per pixel, row-major
  RgbImage(int nx_, int ny_) : nx(nx_), ny(ny_), v(std::size_t(nx_) * ny_ * 3, 0) {}
  void set(int i, int j, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    if (i < 0 || j < 0 || i >= nx || j >= ny) return;
    std::size_t n = (std::size_t(j) * nx + i) * 3;
    v[n] = r; v[n + 1] = g; v[n + 2] = b;
  }
};

inline void write_png_rgb(const std::string& path, const RgbImage& img) {
  detail::write_png_impl(path, img.nx, img.ny, 3, img.v);
}

// ------------------------ Gaussian smoothing -------------------------------

inline std::vector<double> gauss_kernel(double sigma) {
  int r = std::max(1, int(std::ceil(3.0 * sigma)));
  std::vector<double> k(2 * r + 1);
  double sum = 0;
  for (int i = -r; i <= r; ++i) {
    k[i + r] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += k[i + r];
  }
  for (auto& x : k) x /= sum;
  return k;
}

// Separable blur with reflected boundaries.
inline Image gauss_blur(const Image& img, double sigma) {
  if (sigma <= 0) return img;
  auto k = gauss_kernel(sigma);
  int r = int(k.size() / 2);
  Image tmp(img.nx, img.ny), out(img.nx, img.ny);
  auto reflect = [](int i, int n) {
    while (i < 0 || i >= n) {
      if (i < 0) i = -i - 1;
      if (i >= n) i = 2 * n - 1 - i;
    }
    return i;
  };
  for (int j = 0; j < img.ny; ++j)
    for (int i = 0; i < img.nx; ++i) {
      double s = 0;
      for (int d = -r; d <= r; ++d) s += k[d + r] * img.at(reflect(i + d, img.nx), j);
      tmp.at(i, j) = s;
    }
  for (int j = 0; j < img.ny; ++j)
    for (int i = 0; i < img.nx; ++i) {
      double s = 0;
      for (int d = -r; d <= r; ++d) s += k[d + r] * tmp.at(i, reflect(j + d, img.ny));
      out.at(i, j) = s;
    }
  return out;
}

}  // namespace plb
