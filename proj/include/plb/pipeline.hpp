// End-to-end segmentation pipeline: lift -> line measure -> components ->
// initial contours -> switching split -> grouped costs -> spatial refinement
// -> geodesic completion, with per-stage artifact dumping, a flat TOML-style
// configuration (file + flag overrides, resolved config emitted alongside the
// outputs), and deterministic overlay rendering.
#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "analysis.hpp"
#include "costfield.hpp"
#include "grid.hpp"
#include "image.hpp"
#include "liftscore.hpp"
#include "snakes.hpp"
#include "synthgen.hpp"

namespace plb {

struct StageError : std::runtime_error {
  std::string stage;
  int component = -1;  // -1 = not component specific
  StageError(std::string st, int comp, const std::string& msg)
      : std::runtime_error("stage '" + st + "'" +
                           (comp >= 0 ? " component " + std::to_string(comp) : "") +
                           ": " + msg),
        stage(std::move(st)),
        component(comp) {}
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat key=value configuration. Keys are dotted ("wavelets.n_orient"); the
// file may use [section] headers that prefix the keys that follow.
struct PipelineConfig {
  std::map<std::string, std::string> kv;

  PipelineConfig() { set_defaults(); }

  void set_defaults() {
    kv = {
        {"wavelets.n_orient", "12"},
        {"wavelets.overlap", "4"},
        {"wavelets.size", "31"},
        {"wavelets.cutoff", "0.8"},
        {"wavelets.flat_frac", "0.5"},
        // expected structure width in px; scales the component measure blur
        // and the snake scan radius when those are left at 0 (= auto)
        {"measure.width", "12"},
        // component-detection measure (broad, nonlinear contrast)
        {"measure.comp_lambda", "50"},
        {"measure.comp_p", "3"},
        {"measure.comp_sigma_s", "0"},  // 0 => 0.75 * width
        {"measure.comp_sigma_a", std::to_string(2.0 * kTwoPi / 48.0)},
        // tracking cost (sharp)
        {"measure.track_lambda", "100"},
        {"measure.track_p", "1"},
        {"measure.track_sigma_s", "2"},
        {"measure.track_sigma_a", std::to_string(4.0 * kTwoPi / 48.0)},
        {"measure.ntheta", "32"},
        {"metric.g11", "0.2"},
        {"metric.g22", "1"},
        {"metric.g33", "7"},
        {"components.threshold", "0.5"},
        {"components.min_size_frac", "0.001"},
        {"grouping.low_threshold", "0.1"},
        {"snakes.alpha", std::to_string(3.0 * kTwoPi / 48.0)},
        {"snakes.scan_radius", "0"},  // 0 => width / 2 + 2
        {"snakes.close_radius", "0"}, // 0 => width / 2 + 4
        {"snakes.shrink_radius", "-1"},  // -1 => track_sigma_s + 1, 0 => off
        {"snakes.xi", std::to_string(std::sqrt(0.2 / 7.0))},
        {"tracking.model", "dc"},
        {"tracking.eikonal_tol", "1e-5"},
        {"tracking.eikonal_max_iters", "20000"},
    };
  }

  bool has(const std::string& key) const { return kv.count(key) != 0; }

  void set(const std::string& key, const std::string& value) {
    if (!kv.count(key)) throw ConfigError("unknown config key: " + key);
    kv[key] = value;
  }

  double get_num(const std::string& key) const {
    auto it = kv.find(key);
    if (it == kv.end()) throw ConfigError("unknown config key: " + key);
    try {
      std::size_t pos = 0;
      double v = std::stod(it->second, &pos);
      if (pos != it->second.size())
        throw ConfigError("bad number for " + key + ": " + it->second);
      return v;
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigError("bad number for " + key + ": " + it->second);
    }
  }
  int get_int(const std::string& key) const {
    double v = get_num(key);
    return int(std::lround(v));
  }
  std::string get_str(const std::string& key) const {
    auto it = kv.find(key);
    if (it == kv.end()) throw ConfigError("unknown config key: " + key);
    return it->second;
  }

  // "section.key = value" lines, [section] headers, '#' comments.
  void load_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file: " + path);
    std::string line, section;
    int ln = 0;
    while (std::getline(is, line)) {
      ++ln;
      auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      auto trim = [](std::string s) {
        std::size_t a = s.find_first_not_of(" \t\r");
        std::size_t b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
      };
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']')
          throw ConfigError(path + ":" + std::to_string(ln) + ": bad section");
        section = trim(line.substr(1, line.size() - 2));
        continue;
      }
      auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError(path + ":" + std::to_string(ln) + ": expected key = value");
      std::string key = trim(line.substr(0, eq));
      std::string val = trim(line.substr(eq + 1));
      if (val.size() >= 2 && val.front() == '"' && val.back() == '"')
        val = val.substr(1, val.size() - 2);
      if (!section.empty() && key.find('.') == std::string::npos)
        key = section + "." + key;
      set(key, val);
    }
  }

  // "section.key=value" flag overrides.
  void apply_overrides(const std::vector<std::string>& overrides) {
    for (const std::string& o : overrides) {
      auto eq = o.find('=');
      if (eq == std::string::npos)
        throw ConfigError("override must be key=value: " + o);
      set(o.substr(0, eq), o.substr(eq + 1));
    }
  }

  // Fully resolved config, grouped by section, round-trips through load_file.
  void save(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot write config: " + path);
    std::string section;
    for (const auto& [key, val] : kv) {
      auto dot = key.find('.');
      std::string sec = dot == std::string::npos ? "" : key.substr(0, dot);
      std::string base = dot == std::string::npos ? key : key.substr(dot + 1);
      if (sec != section) {
        os << "[" << sec << "]\n";
        section = sec;
      }
      os << base << " = " << val << "\n";
    }
  }

  // derived values with the auto (0) rules applied
  double width() const { return get_num("measure.width"); }
  double comp_sigma_s() const {
    double v = get_num("measure.comp_sigma_s");
    return v > 0 ? v : 0.75 * width();
  }
  SnakeParams snake_params() const {
    SnakeParams sp;
    sp.alpha = get_num("snakes.alpha");
    double r = get_num("snakes.scan_radius");
    sp.scan_radius = r > 0 ? r : 0.5 * width() + 2.0;
    double cr = get_num("snakes.close_radius");
    sp.close_radius = cr > 0 ? cr : 0.5 * width() + 4.0;
    double sh = get_num("snakes.shrink_radius");
    sp.shrink_radius = sh >= 0 ? sh : get_num("measure.track_sigma_s") + 1.0;
    sp.xi = get_num("snakes.xi");
    return sp;
  }
  WaveletParams wavelet_params() const {
    WaveletParams wp;
    wp.n_orient = get_int("wavelets.n_orient");
    wp.overlap = get_int("wavelets.overlap");
    wp.size = get_int("wavelets.size");
    wp.cutoff = get_num("wavelets.cutoff");
    wp.flat_frac = get_num("wavelets.flat_frac");
    return wp;
  }
  MetricParams metric_params() const {
    return {get_num("metric.g11"), get_num("metric.g22"), get_num("metric.g33")};
  }
};

struct PipelineResult {
  OrientationScore score;
  RealField measure_comp;   // component-detection measure, resampled theta
  RealField measure_track;  // tracking measure, resampled theta
  RealField cost;           // ungrouped tracking cost
  ComponentLabeling labeling;
  GroupedCost grouped;
  std::vector<InitialContour> initial;
  std::vector<std::vector<Segment>> segments;  // parallel to `initial`
  std::vector<CompletedContour> contours;
  std::vector<std::string> warnings;
};

inline PipelineResult run_pipeline(const Image& img,
                                   const PipelineConfig& config,
                                   const std::string& dump_dir = "") {
  PipelineResult res;
  auto dump_field = [&](const std::string& name, const RealField& f) {
    if (!dump_dir.empty()) save_field(dump_dir + "/" + name + ".field", f);
  };

  // ---- lift --------------------------------------------------------------
  WaveletStack stack;
  try {
    stack = build_cake_wavelets(config.wavelet_params());
    res.score = lift(img, stack);
  } catch (const std::exception& e) {
    throw StageError("lift", -1, e.what());
  }
  if (!dump_dir.empty()) save_field(dump_dir + "/score.field", res.score.U);

  // ---- line measures and costs -------------------------------------------
  int nt = config.get_int("measure.ntheta");
  try {
    res.measure_comp = line_measure(res.score, config.comp_sigma_s(),
                                    config.get_num("measure.comp_sigma_a"), nt);
    res.measure_track =
        line_measure(res.score, config.get_num("measure.track_sigma_s"),
                     config.get_num("measure.track_sigma_a"), nt);
    CostParams cp;
    cp.lambda = config.get_num("measure.track_lambda");
    cp.p = config.get_num("measure.track_p");
    res.cost = cost_from_measure(res.measure_track, cp);
  } catch (const std::exception& e) {
    throw StageError("measure", -1, e.what());
  }
  dump_field("measure_comp", res.measure_comp);
  dump_field("measure_track", res.measure_track);
  dump_field("cost", res.cost);

  // ---- components ----------------------------------------------------------
  BallKernel kernel =
      ball_kernel(config.metric_params(), res.measure_comp.grid.dtheta());
  try {
    // sharpen the component measure with the nonlinear contrast before
    // thresholding: V_comp = 1 - C_comp, renormalized
    CostParams comp;
    comp.lambda = config.get_num("measure.comp_lambda");
    comp.p = config.get_num("measure.comp_p");
    RealField Vc = res.measure_comp;
    RealField Cc = cost_from_measure(Vc, comp);
    for (std::size_t n = 0; n < Vc.v.size(); ++n) Vc.v[n] = 1.0 - Cc.v[n];
    double mx = *std::max_element(Vc.v.begin(), Vc.v.end());
    if (mx > 0)
      for (auto& x : Vc.v) x /= mx;
    res.labeling = connected_components(
        Vc, config.get_num("components.threshold"), kernel,
        config.get_num("components.min_size_frac"));
  } catch (const std::exception& e) {
    throw StageError("components", -1, e.what());
  }
  if (res.labeling.n == 0) throw StageError("components", -1, "no components found");

  // ---- grouped costs -------------------------------------------------------
  try {
    res.grouped = group_cost(res.cost, res.labeling, kernel,
                             config.get_num("grouping.low_threshold"));
    if (res.grouped.stalled)
      res.warnings.push_back("grouping: claiming stalled; nearest-component fallback used");
  } catch (const std::exception& e) {
    throw StageError("group-cost", -1, e.what());
  }

  // ---- contours ------------------------------------------------------------
  SnakeParams sp = config.snake_params();
  try {
    res.initial = initial_contours(res.labeling, sp, &res.measure_track);
  } catch (const std::exception& e) {
    throw StageError("initial-contours", -1, e.what());
  }
  if (int(res.initial.size()) < res.labeling.n)
    res.warnings.push_back("initial-contours: some components yielded no contour");

  bool use_dc = config.get_str("tracking.model") == "dc";
  if (!use_dc && config.get_str("tracking.model") != "dproj")
    throw ConfigError("tracking.model must be dc or dproj");

  for (const InitialContour& ic : res.initial) {
    try {
      std::vector<Segment> segs = split_by_horizontality(ic.curve, sp.alpha);
      RefineResult refined = spatial_refine(ic.curve, segs, res.score, sp);
      CompletedContour done = complete_contour(
          ic.component, ic.curve, segs, refined, res.grouped, res.cost, sp, use_dc);
      if (done.failed_gaps > 0)
        res.warnings.push_back("component " + std::to_string(ic.component) + ": " +
                               std::to_string(done.failed_gaps) +
                               " geodesic gap(s) kept initial samples");
      res.segments.push_back(std::move(segs));
      res.contours.push_back(std::move(done));
    } catch (const std::exception& e) {
      throw StageError("contour", ic.component, e.what());
    }
  }
  return res;
}

// Deterministic per-component palette.
inline std::array<std::uint8_t, 3> palette_color(int idx) {
  static const std::array<std::uint8_t, 3> colors[] = {
      {230, 60, 60},  {60, 160, 230}, {60, 200, 100}, {240, 190, 50},
      {200, 90, 220}, {80, 220, 210}, {240, 130, 40}, {150, 150, 240},
  };
  return colors[std::size_t(idx) % (sizeof(colors) / sizeof(colors[0]))];
}

// Grayscale background with per-component colored closed polylines.
inline RgbImage render_overlay(const Image& img,
                               const std::vector<CompletedContour>& contours) {
  RgbImage out(img.nx, img.ny);
  for (int j = 0; j < img.ny; ++j)
    for (int i = 0; i < img.nx; ++i) {
      auto g = std::uint8_t(std::clamp(img.at(i, j), 0.0, 1.0) * 255.0 + 0.5);
      out.set(i, j, g, g, g);
    }
  for (const CompletedContour& cc : contours) {
    auto col = palette_color(cc.component - 1);
    const auto& s = cc.contour.samples;
    for (std::size_t a = 0; a < s.size(); ++a) {
      const Point& p = s[a];
      const Point& q = s[(a + 1) % s.size()];
      double len = std::hypot(q.x - p.x, q.y - p.y);
      int n = std::max(1, int(std::ceil(len / 0.5)));
      if (len > 10) continue;  // do not rasterize across wrap artifacts
      for (int t = 0; t <= n; ++t) {
        double f = double(t) / n;
        out.set(int(std::lround(p.x + f * (q.x - p.x))),
                int(std::lround(p.y + f * (q.y - p.y))), col[0], col[1], col[2]);
      }
    }
  }
  return out;
}

}  // namespace plb
