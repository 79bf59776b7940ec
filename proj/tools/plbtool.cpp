// Command-line front end: scene synthesis, the lift / cost / component /
// grouping stages as standalone steps, geodesic tracking, the full
// segmentation pipeline, sphere meshes, cone sampling, and contour metrics.
//
// Exit codes: 0 success, 2 configuration error, 3 stage failure.
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "plb/analysis.hpp"
#include "plb/pipeline.hpp"

using namespace plb;
using nlohmann::json;

namespace {

std::string g_workdir = ".";

std::string wd(const std::string& path) {
  if (path.empty() || path.front() == '/') return path;
  return g_workdir + "/" + path;
}

Point parse_point(const std::string& s) {
  Point p;
  if (std::sscanf(s.c_str(), "%lf,%lf,%lf", &p.x, &p.y, &p.th) != 3)
    throw ConfigError("expected x,y,theta: " + s);
  p.th = wrap_2pi(p.th);
  return p;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

void save_labels_field(const std::string& path, const ComponentLabeling& lab) {
  RealField f(lab.labels.grid);
  for (std::size_t n = 0; n < f.v.size(); ++n) f.v[n] = double(lab.labels.v[n]);
  save_field(path, f);
}

ComponentLabeling load_labels_field(const std::string& path) {
  RealField f = load_field(path);
  ComponentLabeling lab;
  lab.labels = Field3<std::int32_t>(f.grid, 0);
  for (std::size_t n = 0; n < f.v.size(); ++n) {
    lab.labels.v[n] = std::int32_t(std::lround(f.v[n]));
    lab.n = std::max(lab.n, int(lab.labels.v[n]));
  }
  return lab;
}

// ---------------------------------------------------------------------------

int cmd_synth(const std::string& preset, unsigned seed, const std::string& out) {
  SceneSpec spec = preset_scene(preset, seed);
  Scene scene = generate(spec);
  write_png_gray(wd(out + ".png"), scene.image);
  std::ofstream csv(wd(out + "_gt.csv"));
  csv << "bar,x,y\n";
  for (std::size_t b = 0; b < scene.gt.size(); ++b)
    for (const auto& p : scene.gt[b])
      csv << b << "," << p[0] << "," << p[1] << "\n";
  json labels = json::array();
  for (std::size_t b = 0; b < scene.gt.size(); ++b)
    labels.push_back({{"bar", b}, {"layer", scene.layer[b]}});
  std::ofstream(wd(out + "_labels.json")) << labels.dump(2) << "\n";
  return 0;
}

int cmd_lift(const std::string& image, const WaveletParams& wp,
             const std::string& out) {
  Image img = read_image(wd(image));
  OrientationScore score = lift(img, build_cake_wavelets(wp));
  save_field(wd(out), score.U);
  return 0;
}

int cmd_cost(const std::string& score_path, const CostParams& cp, int ntheta,
             const std::string& out_measure, const std::string& out_cost) {
  OrientationScore score;
  score.U = load_field_complex(wd(score_path));
  RealField V = line_measure(score, cp.sigma_s, cp.sigma_a, ntheta);
  RealField C = cost_from_measure(V, cp);
  if (!out_measure.empty()) save_field(wd(out_measure), V);
  save_field(wd(out_cost), C);
  return 0;
}

int cmd_components(const std::string& measure, const MetricParams& g,
                   double threshold, double min_size_frac,
                   const std::string& out) {
  RealField V = load_field(wd(measure));
  BallKernel k = ball_kernel(g, V.grid.dtheta());
  ComponentLabeling lab = connected_components(V, threshold, k, min_size_frac);
  save_labels_field(wd(out), lab);
  std::vector<std::size_t> sizes(std::size_t(lab.n), 0);
  for (auto l : lab.labels.v)
    if (l > 0) ++sizes[std::size_t(l) - 1];
  json j{{"n", lab.n}, {"sizes", sizes}};
  std::ofstream(wd(out + ".json")) << j.dump(2) << "\n";
  return 0;
}

int cmd_group_cost(const std::string& cost_path, const std::string& labels,
                   const MetricParams& g, double low_threshold,
                   const std::string& out) {
  RealField C = load_field(wd(cost_path));
  ComponentLabeling lab = load_labels_field(wd(labels));
  BallKernel k = ball_kernel(g, C.grid.dtheta());
  GroupedCost gc = group_cost(C, lab, k, low_threshold);
  json manifest{{"n", gc.n}, {"stalled", gc.stalled}, {"fields", json::array()}};
  for (int c = 0; c < gc.n; ++c) {
    std::string name = out + "_" + std::to_string(c + 1) + ".field";
    save_field(wd(name), gc.fields[std::size_t(c)]);
    manifest["fields"].push_back({{"component", c + 1}, {"path", name}});
  }
  std::ofstream(wd(out + ".json")) << manifest.dump(2) << "\n";
  return 0;
}

int cmd_track(const std::string& model, const std::string& src,
              const std::string& snk, const std::string& cost_path, double xi,
              const std::string& grid_s, double tol, int max_iters,
              const std::string& out) {
  Point p0 = parse_point(src), p1 = parse_point(snk);
  RealField cost;
  GridSpec grid;
  if (!cost_path.empty()) {
    cost = load_field(wd(cost_path));
    grid = cost.grid;
  } else {
    auto dims = parse_list(grid_s);
    if (dims.size() != 3) throw ConfigError("--grid must be nx,ny,ntheta");
    grid = GridSpec(int(dims[0]), int(dims[1]), int(dims[2]));
  }
  auto make_spec = [&](Model m) {
    return cost.v.empty() ? FinslerSpec(m, xi) : FinslerSpec(m, xi, cost);
  };
  auto solve = [&](const FinslerSpec& s, const Point& source) {
    EikonalProblem prob(s, grid, source);
    prob.tol = tol;
    prob.max_iters = max_iters;
    return eikonal_solve(prob);
  };
  TrackResult tr;
  if (model == "dc") {
    FinslerSpec spec = make_spec(Model::F0plus);
    DistanceMap m0 = solve(spec, p0);
    DistanceMap m1 = solve(spec, antipode(p0));
    tr = distance_dc(m0, m1, spec, p1);
  } else if (model == "dproj") {
    FinslerSpec spec = make_spec(Model::F0);
    DistanceMap m0 = solve(spec, p0);
    tr = distance_dproj(m0, spec, p1);
  } else {
    throw ConfigError("--model must be dc or dproj");
  }
  save_curve_csv(wd(out + ".csv"), tr.geodesic);
  json j{{"distance", tr.distance},
         {"instance", tr.instance},
         {"instances", tr.instances},
         {"tie", tr.tie},
         {"cusps", tr.cusps}};
  std::ofstream(wd(out + ".json")) << j.dump(2) << "\n";
  return 0;
}

int cmd_segment(const std::string& image, const std::string& config_file,
                const std::vector<std::string>& overrides, bool dump_stages,
                const std::string& out) {
  PipelineConfig config;
  if (!config_file.empty()) config.load_file(wd(config_file));
  config.apply_overrides(overrides);
  Image img = read_image(wd(image));
  config.save(wd(out + "_config.toml"));
  PipelineResult res =
      run_pipeline(img, config, dump_stages ? g_workdir : std::string());
  for (const CompletedContour& cc : res.contours)
    save_curve_csv(wd(out + "_c" + std::to_string(cc.component) + ".csv"),
                   cc.contour);
  write_png_rgb(wd(out + "_overlay.png"), render_overlay(img, res.contours));
  for (const std::string& w : res.warnings) std::cerr << "warning: " << w << "\n";
  return 0;
}

int cmd_spheres(const std::string& model, double xi, const std::string& radii_s,
                const std::string& grid_s, const std::string& out) {
  auto dims = parse_list(grid_s);
  if (dims.size() != 3) throw ConfigError("--grid must be nx,ny,ntheta");
  GridSpec grid{int(dims[0]), int(dims[1]), int(dims[2])};
  Point p0{grid.nx / 2.0, grid.ny / 2.0, 0.0};
  Model m = model == "dc" ? Model::F0plus : Model::F0;
  FinslerSpec spec(m, xi);
  EikonalProblem prob0(spec, grid, p0);
  DistanceMap w0 = eikonal_solve(prob0);
  EikonalProblem prob1(spec, grid, antipode(p0));
  DistanceMap w1 = eikonal_solve(prob1);
  RealField wmin(grid);
  for (std::size_t n = 0; n < wmin.v.size(); ++n)
    wmin.v[n] = std::min(w0.W.v[n], w1.W.v[n]);
  save_field(wd(out + "_min.field"), wmin);
  for (double r : parse_list(radii_s)) {
    std::vector<std::pair<std::string, Mesh>> fronts;
    fronts.emplace_back("front_p0", marching_cubes(w0.W, r));
    fronts.emplace_back("front_p0bar", marching_cubes(w1.W, r));
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_r%.3f.obj", out.c_str(), r);
    save_obj(wd(buf), fronts);
  }
  return 0;
}

int cmd_cone(double xi, const std::string& grid_s, const std::string& out) {
  auto dims = parse_list(grid_s);
  if (dims.size() != 3) throw ConfigError("--grid must be nx,ny,ntheta");
  GridSpec grid{int(dims[0]), int(dims[1]), int(dims[2])};
  Point p0{grid.nx / 2.0, grid.ny / 2.0, 0.0};
  FinslerSpec plus(Model::F0plus, xi), sym(Model::F0, xi);
  DistanceMap dc0 = eikonal_solve(EikonalProblem(plus, grid, p0));
  DistanceMap dc1 = eikonal_solve(EikonalProblem(plus, grid, antipode(p0)));
  DistanceMap pr0 = eikonal_solve(EikonalProblem(sym, grid, p0));
  std::vector<Point> endpoints;
  for (int j = 4; j < grid.ny - 4; j += 4)
    for (int i = 4; i < grid.nx - 4; i += 4)
      endpoints.push_back({double(i), double(j), 0.0});
  auto samples = cone_sample(dc0, dc1, pr0, plus, sym, endpoints);
  save_cone_csv(wd(out), samples);
  return 0;
}

Poly2 load_poly_csv(const std::string& path) {
  // accepts either curve CSV (t,x,y,...) or synth GT CSV (bar,x,y)
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::string header;
  std::getline(is, header);
  bool gt = header.rfind("bar,", 0) == 0;
  Poly2 out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    double a, b, c;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &a, &b, &c) < 3)
      throw std::runtime_error("bad row in " + path);
    out.push_back(gt ? std::array<double, 2>{b, c} : std::array<double, 2>{b, c});
  }
  return out;
}

int cmd_eval(const std::vector<std::string>& preds,
             const std::vector<std::string>& gts, const std::string& out) {
  if (preds.size() != gts.size() || preds.empty())
    throw ConfigError("eval: need matching --pred/--gt lists");
  json j = json::array();
  for (std::size_t i = 0; i < preds.size(); ++i) {
    Poly2 a = load_poly_csv(wd(preds[i]));
    Poly2 b = load_poly_csv(wd(gts[i]));
    j.push_back({{"pred", preds[i]},
                 {"gt", gts[i]},
                 {"masd", masd(a, b)},
                 {"hausdorff", hausdorff(a, b)}});
  }
  std::string text = j.dump(2) + "\n";
  if (out.empty())
    std::cout << text;
  else
    std::ofstream(wd(out)) << text;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"projective line bundle tracking and segmentation"};
  app.require_subcommand(1);
  app.add_option("--workdir", g_workdir, "base directory for relative paths");

  // synth
  std::string preset = "cd12-h5", out = "scene";
  unsigned seed = 1;
  auto* synth = app.add_subcommand("synth", "generate a synthetic scene");
  synth->add_option("--preset", preset);
  synth->add_option("--seed", seed);
  synth->add_option("--out", out);

  // lift
  std::string image, lift_out = "score.field";
  WaveletParams wp;
  auto* lift_cmd = app.add_subcommand("lift", "orientation-score lift");
  lift_cmd->add_option("--image", image)->required();
  lift_cmd->add_option("--n-orient", wp.n_orient);
  lift_cmd->add_option("--overlap", wp.overlap);
  lift_cmd->add_option("--size", wp.size);
  lift_cmd->add_option("--out", lift_out);

  // cost
  std::string score_path = "score.field", measure_out, cost_out = "cost.field";
  CostParams cp;
  int ntheta = 32;
  auto* cost_cmd = app.add_subcommand("cost", "line measure and cost");
  cost_cmd->add_option("--score", score_path);
  cost_cmd->add_option("--lambda", cp.lambda);
  cost_cmd->add_option("--p", cp.p);
  cost_cmd->add_option("--sigma-s", cp.sigma_s);
  cost_cmd->add_option("--sigma-a", cp.sigma_a);
  cost_cmd->add_option("--ntheta", ntheta);
  cost_cmd->add_option("--out-measure", measure_out);
  cost_cmd->add_option("--out", cost_out);

  // components
  std::string measure_path = "measure.field", comp_out = "labels.field";
  MetricParams mp;
  double threshold = 0.5, min_size_frac = 0.001;
  auto* comp_cmd = app.add_subcommand("components", "ball-connected components");
  comp_cmd->add_option("--measure", measure_path);
  comp_cmd->add_option("--g11", mp.g11);
  comp_cmd->add_option("--g22", mp.g22);
  comp_cmd->add_option("--g33", mp.g33);
  comp_cmd->add_option("--threshold", threshold);
  comp_cmd->add_option("--min-size-frac", min_size_frac);
  comp_cmd->add_option("--out", comp_out);

  // group-cost
  std::string gc_cost = "cost.field", gc_labels = "labels.field",
              gc_out = "grouped";
  double low_threshold = 0.1;
  auto* gc_cmd = app.add_subcommand("group-cost", "component-informed costs");
  gc_cmd->add_option("--cost", gc_cost);
  gc_cmd->add_option("--labels", gc_labels);
  gc_cmd->add_option("--g11", mp.g11);
  gc_cmd->add_option("--g22", mp.g22);
  gc_cmd->add_option("--g33", mp.g33);
  gc_cmd->add_option("--low-threshold", low_threshold);
  gc_cmd->add_option("--out", gc_out);

  // track
  std::string model = "dc", source_s, sink_s, track_cost, grid_s = "64,64,32",
              track_out = "track";
  double xi = 1.0, eik_tol = 1e-5;
  int eik_iters = 20000;
  auto* track_cmd = app.add_subcommand("track", "geodesic distance + tracking");
  track_cmd->add_option("--model", model);
  track_cmd->add_option("--source", source_s)->required();
  track_cmd->add_option("--sink", sink_s)->required();
  track_cmd->add_option("--cost", track_cost);
  track_cmd->add_option("--xi", xi);
  track_cmd->add_option("--grid", grid_s);
  track_cmd->add_option("--eikonal-tol", eik_tol);
  track_cmd->add_option("--eikonal-max-iters", eik_iters);
  track_cmd->add_option("--out", track_out);

  // segment
  std::string seg_image, seg_config, seg_out = "segment";
  std::vector<std::string> seg_set;
  bool dump_stages = false;
  auto* seg_cmd = app.add_subcommand("segment", "full segmentation pipeline");
  seg_cmd->add_option("--image", seg_image)->required();
  seg_cmd->add_option("--config", seg_config);
  seg_cmd->add_option("--set", seg_set, "key=value config overrides");
  seg_cmd->add_option("--model", model, "dc or dproj (tracking.model shortcut)");
  seg_cmd->add_flag("--dump-stages", dump_stages);
  seg_cmd->add_option("--out", seg_out);

  // spheres
  std::string radii = "0.5,1,2,3.14", sph_out = "sphere";
  auto* sph_cmd = app.add_subcommand("spheres", "distance-front meshes");
  sph_cmd->add_option("--model", model);
  sph_cmd->add_option("--xi", xi);
  sph_cmd->add_option("--radii", radii);
  sph_cmd->add_option("--grid", grid_s);
  sph_cmd->add_option("--out", sph_out);

  // cone
  std::string cone_out = "cone.csv";
  auto* cone_cmd = app.add_subcommand("cone", "cusp-free regime sampling");
  cone_cmd->add_option("--xi", xi);
  cone_cmd->add_option("--grid", grid_s);
  cone_cmd->add_option("--out", cone_out);

  // eval
  std::vector<std::string> preds, gts;
  std::string eval_out;
  auto* eval_cmd = app.add_subcommand("eval", "contour metrics");
  eval_cmd->add_option("--pred", preds)->required();
  eval_cmd->add_option("--gt", gts)->required();
  eval_cmd->add_option("--out", eval_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*synth) return cmd_synth(preset, seed, out);
    if (*lift_cmd) return cmd_lift(image, wp, lift_out);
    if (*cost_cmd)
      return cmd_cost(score_path, cp, ntheta, measure_out, cost_out);
    if (*comp_cmd)
      return cmd_components(measure_path, mp, threshold, min_size_frac, comp_out);
    if (*gc_cmd)
      return cmd_group_cost(gc_cost, gc_labels, mp, low_threshold, gc_out);
    if (*track_cmd)
      return cmd_track(model, source_s, sink_s, track_cost, xi, grid_s, eik_tol,
                       eik_iters, track_out);
    if (*seg_cmd) {
      if (seg_cmd->count("--model")) seg_set.push_back("tracking.model=" + model);
      return cmd_segment(seg_image, seg_config, seg_set, dump_stages, seg_out);
    }
    if (*sph_cmd) return cmd_spheres(model, xi, radii, grid_s, sph_out);
    if (*cone_cmd) return cmd_cone(xi, grid_s, cone_out);
    if (*eval_cmd) return cmd_eval(preds, gts, eval_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
