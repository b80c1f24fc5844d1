#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <event_warp/analytic.hpp>
#include <event_warp/correction.hpp>
#include <event_warp/events.hpp>
#include <event_warp/noise_sim.hpp>
#include <event_warp/objective.hpp>
#include <event_warp/optimizer.hpp>
#include <event_warp/render.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace event_warp::cli {

namespace {

namespace fs = std::filesystem;

std::vector<double> split_numbers(const std::string& text, std::size_t count) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() || !std::isfinite(v)) {
      throw std::invalid_argument("'" + text + "' is not a list of " + std::to_string(count) +
                                  " numbers");
    }
    out.push_back(v);
  }
  if (out.size() != count) {
    throw std::invalid_argument("'" + text + "' must have " + std::to_string(count) +
                                " comma-separated numbers");
  }
  return out;
}

Velocity parse_velocity(const std::string& text) {
  const auto v = split_numbers(text, 2);
  return {v[0], v[1]};
}

VelocityBounds parse_bounds(const std::string& text) {
  const auto v = split_numbers(text, 4);
  if (!(v[0] <= v[1] && v[2] <= v[3])) {
    throw std::invalid_argument("bounds '" + text + "' must read vx_min,vx_max,vy_min,vy_max");
  }
  return {v[0], v[1], v[2], v[3]};
}

SensorGeometry parse_geometry(const std::string& text) {
  const auto x = text.find('x');
  SensorGeometry g;
  try {
    std::size_t used_w = 0;
    std::size_t used_h = 0;
    const auto w = text.substr(0, x);
    const auto h = x == std::string::npos ? std::string{} : text.substr(x + 1);
    g.width = std::stoi(w, &used_w);
    g.height = std::stoi(h, &used_h);
    if (used_w != w.size() || used_h != h.size()) throw std::invalid_argument(text);
  } catch (const std::exception&) {
    throw std::invalid_argument("geometry '" + text + "' must read WIDTHxHEIGHT");
  }
  validate(g);
  return g;
}

template <typename Parse>
CLI::Validator parsed_as(Parse parse, const std::string& description) {
  return CLI::Validator(
      [parse](std::string& s) -> std::string {
        try {
          (void)parse(s);
          return {};
        } catch (const std::exception& e) {
          return e.what();
        }
      },
      description);
}

const CLI::Validator velocity_arg = parsed_as(parse_velocity, "VX,VY");
const CLI::Validator bounds_arg = parsed_as(parse_bounds, "VXMIN,VXMAX,VYMIN,VYMAX");
const CLI::Validator geometry_arg = parsed_as(parse_geometry, "WxH");

const CLI::Validator writable_path(
    [](std::string& s) -> std::string {
      const auto parent = fs::absolute(fs::path(s)).parent_path();
      if (!fs::is_directory(parent)) return "output directory " + parent.string() + " does not exist";
      return {};
    },
    "PATH");

const std::map<std::string, Kernel> kernel_names{{"nearest", Kernel::nearest},
                                                 {"bilinear", Kernel::bilinear}};

struct InputArgs {
  std::string path;
  std::string geometry = "240x180";

  void add_to(CLI::App& app) {
    app.add_option("events", path, "Event file (binary EVT1 or text t,x,y,p)")
        ->required()
        ->check(CLI::ExistingFile);
    app.add_option("--geometry", geometry, "Sensor size for text input")->check(geometry_arg);
  }

  [[nodiscard]] EventStream load() const {
    const auto text_geometry = parse_geometry(geometry);
    std::ifstream in(path, std::ios::binary);
    char magic[4] = {};
    in.read(magic, 4);
    const bool binary = in.gcount() == 4 && std::string_view(magic, 4) == binary_magic;
    return read_events_file(path, binary ? std::nullopt : std::optional{text_geometry});
  }
};

struct ObjectiveArgs {
  bool corrected = false;
  Kernel kernel = Kernel::nearest;
  double eta = 0.02;
  std::optional<double> clamp;

  void add_to(CLI::App& app) {
    app.add_flag("--corrected", corrected, "Apply the noise-density correction");
    app.add_option("--kernel", kernel, "Accumulation kernel")
        ->transform(CLI::CheckedTransformer(kernel_names, CLI::ignore_case));
    app.add_option("--eta", eta, "Exposure threshold of the corrected image")
        ->check(CLI::Range(0.0, 0.999999));
    app.add_option("--clamp", clamp, "Ceiling on the correction factor")
        ->check(CLI::PositiveNumber);
  }

  [[nodiscard]] ObjectiveOptions options() const {
    ObjectiveOptions o;
    o.kernel = kernel;
    o.corrected = corrected;
    o.eta = eta;
    o.clamp = clamp;
    return o;
  }
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string landscape_text(const LossLandscape& land) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "# corrected=" << (land.corrected ? 1 : 0) << " vx_min=" << land.grid.bounds.vx_min
     << " vx_max=" << land.grid.bounds.vx_max << " vy_min=" << land.grid.bounds.vy_min
     << " vy_max=" << land.grid.bounds.vy_max << " step=" << land.grid.step
     << " nx=" << land.grid.nx << " ny=" << land.grid.ny << "\n";
  for (std::size_t iy = 0; iy < land.grid.ny; ++iy) {
    for (std::size_t ix = 0; ix < land.grid.nx; ++ix) {
      if (ix > 0) os << ' ';
      os << land.at(ix, iy);
    }
    os << '\n';
  }
  return os.str();
}

EventFormat format_for(const fs::path& path, const std::string& requested) {
  if (requested == "text") return EventFormat::text;
  if (requested == "binary") return EventFormat::binary;
  const auto ext = path.extension();
  return ext == ".txt" || ext == ".csv" ? EventFormat::text : EventFormat::binary;
}

// ---- oracle ---------------------------------------------------------------

struct Check {
  std::string name;
  bool pass;
  std::string detail;
};

std::vector<Check> oracle_checks(double events, std::uint64_t seed, int size) {
  std::vector<Check> checks;
  auto detail = [](auto... parts) {
    std::ostringstream os;
    os << std::setprecision(6);
    (os << ... << parts);
    return os.str();
  };

  // Closed forms.
  {
    double best = -1.0;
    double arg = -1.0;
    for (int k = 0; k <= 1000; ++k) {
      const double s = k / 1000.0;
      if (analytic::variance_1d(s, 1.0) > best) {
        best = analytic::variance_1d(s, 1.0);
        arg = s;
      }
    }
    const bool ok = arg == 0.5 && std::abs(best - 1.0 / 9.0) <= 1e-12;
    checks.push_back({"variance_1d_maximum", ok, detail("argmax=", arg, " value=", best)});
  }
  {
    double worst = 0.0;
    for (int k = 1; k <= 10; ++k) {
      const double s = 0.1 * k;
      worst = std::max(worst, std::abs(analytic::variance_2d(s, 0.0, 1.0) -
                                       analytic::variance_1d(s, 1.0)));
    }
    checks.push_back({"reduction_2d_to_1d", worst <= 1e-12, detail("max_abs_diff=", worst)});
  }
  {
    double worst = 0.0;
    for (int i = 0; i <= 12; ++i) {
      for (int j = 0; j <= 12; ++j) {
        const double sx = 0.25 * i - 1.5;
        const double sy = 0.25 * j - 1.5;
        for (int k = 1; k < 20; ++k) {
          const double px = (1.0 + std::abs(sx)) * k / 20.0;
          const double py = (1.0 + std::abs(sy)) * (20 - k) / 20.0;
          if (const auto a = analytic::alpha_2d(px, py, sx, sy)) {
            worst = std::max(worst, std::abs(*a * analytic::height_2d(px, py, sx, sy, 1.0).value - 1.0));
          }
        }
      }
    }
    checks.push_back({"flattening_identity", worst <= 1e-12, detail("max_abs_diff=", worst)});
  }

  // Discrete 1D sweep: a one-row sensor.
  {
    const SensorGeometry line{size * 2, 1};
    const auto stream = gen_uniform_noise({events / 4.0, 1.0, line, seed + 1, true});
    const double delta = time_extent(stream).delta;
    const ContrastObjective raw(stream, {});
    double best = -1.0;
    double arg = -1.0;
    for (int k = 0; k <= 20; ++k) {
      const double s = 0.05 * k;
      const double v = raw.evaluate({s * line.width / delta, 0.0}).value;
      if (v > best) {
        best = v;
        arg = s;
      }
    }
    checks.push_back({"discrete_1d_maximum", std::abs(arg - 0.5) <= 0.05 + 1e-12,
                      detail("argmax=", arg, " grid_step=0.05")});
  }

  // Discrete 2D sweep against the analytic surface.
  {
    const SensorGeometry g{size, size};
    const auto stream = gen_uniform_noise({events, 1.0, g, seed, true});
    const double delta = time_extent(stream).delta;
    const ContrastObjective raw(stream, {});
    ObjectiveOptions copt;
    copt.corrected = true;
    const ContrastObjective corrected(stream, copt);
    struct Cell {
      double discrete;
      double model;
    };
    std::vector<Cell> cells;
    double num = 0.0;
    double den = 0.0;
    double raw_max = 0.0;
    double corrected_max = 0.0;
    double model_max = 0.0;
    for (int i = 0; i <= 6; ++i) {
      for (int j = 0; j <= 6; ++j) {
        const double sx = 0.25 * i;
        const double sy = 0.25 * j;
        const Velocity theta{sx * g.width / delta, sy * g.height / delta};
        const double d = raw.evaluate(theta).value;
        const double m = analytic::variance_2d(sx, sy, 1.0);
        cells.push_back({d, m});
        num += d * m;
        den += m * m;
        raw_max = std::max(raw_max, d);
        model_max = std::max(model_max, m);
        corrected_max = std::max(corrected_max, corrected.evaluate(theta).value);
      }
    }
    const double k = num / den;
    double worst = 0.0;
    bool ok = true;
    for (const auto& c : cells) {
      if (c.model > 0.0) {
        const double rel = std::abs(c.discrete - k * c.model) / (k * c.model);
        worst = std::max(worst, rel);
        ok = ok && rel <= 0.05;
      } else {
        ok = ok && c.discrete <= 0.05 * k * model_max;
      }
    }
    checks.push_back({"surface_match", ok, detail("worst_rel=", worst, " scale=", k)});
    const double ratio = corrected_max / raw_max;
    checks.push_back({"corrected_flat", ratio <= 0.02, detail("corrected_max/raw_max=", ratio)});
  }
  return checks;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Contrast maximization with noise-density correction for event cameras",
               "event_warp"};
  app.require_subcommand(1);

  // estimate
  auto* estimate = app.add_subcommand("estimate", "Estimate the velocity by contrast maximization");
  InputArgs estimate_in;
  ObjectiveArgs estimate_obj;
  std::string start = "0,0";
  estimate_in.add_to(*estimate);
  estimate_obj.add_to(*estimate);
  estimate->add_option("--start", start, "Initial velocity")->check(velocity_arg);

  // landscape
  auto* land = app.add_subcommand("landscape", "Evaluate the contrast over a velocity grid");
  InputArgs land_in;
  ObjectiveArgs land_obj;
  std::string land_bounds = "-30,30,-30,30";
  double land_res = 1.0;
  std::string land_out;
  std::string land_values;
  land_in.add_to(*land);
  land_obj.add_to(*land);
  land->add_option("--bounds", land_bounds, "Velocity bounds")->check(bounds_arg);
  land->add_option("--res", land_res, "Grid step (px/s)")->check(CLI::PositiveNumber);
  land->add_option("-o,--output", land_out, "Image (.png or .pgm)")->required()->check(writable_path);
  land->add_option("--values", land_values, "Value matrix (default: image path with .txt)")
      ->check(writable_path);

  // map
  auto* map = app.add_subcommand("map", "Render the motion-compensated event map");
  InputArgs map_in;
  ObjectiveArgs map_obj;
  std::string map_theta;
  std::string map_out;
  map_in.add_to(*map);
  map_obj.add_to(*map);
  map->add_option("--theta", map_theta, "Velocity")->required()->check(velocity_arg);
  map->add_option("-o,--output", map_out, "Image (.png or .pgm)")->required()->check(writable_path);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Generate synthetic event streams");
  simulate->require_subcommand(1);
  std::string sim_geometry = "240x180";
  std::uint64_t sim_seed = 0;
  std::string sim_out;
  std::string sim_format = "auto";
  const auto add_common = [&](CLI::App& sub) {
    sub.add_option("--geometry", sim_geometry, "Sensor size")->check(geometry_arg);
    sub.add_option("--seed", sim_seed, "Random seed");
    sub.add_option("-o,--output", sim_out, "Output event file")->required()->check(writable_path);
    sub.add_option("--format", sim_format, "Output format")
        ->check(CLI::IsMember({"auto", "text", "binary"}));
  };
  auto* sim_noise = simulate->add_subcommand("noise", "Uniform noise");
  double noise_rate = 0.0;
  double noise_duration = 1.0;
  bool noise_exact = false;
  sim_noise->add_option("--rate", noise_rate, "Events per second")->required()->check(CLI::NonNegativeNumber);
  sim_noise->add_option("--duration", noise_duration, "Seconds")->check(CLI::NonNegativeNumber);
  sim_noise->add_flag("--exact", noise_exact, "Exact event count instead of Poisson");
  add_common(*sim_noise);

  auto* sim_scene = simulate->add_subcommand("scene", "Translating point features plus noise");
  std::string scene_theta;
  std::size_t scene_features = 20;
  double scene_rate = 50.0;
  double scene_ratio = 10.0;
  double scene_duration = 60.0;
  sim_scene->add_option("--theta", scene_theta, "True velocity")->required()->check(velocity_arg);
  sim_scene->add_option("--features", scene_features, "Number of point features");
  sim_scene->add_option("--feature-rate", scene_rate, "Events per second per feature")
      ->check(CLI::NonNegativeNumber);
  sim_scene->add_option("--noise-ratio", scene_ratio, "Noise events per signal event")
      ->check(CLI::NonNegativeNumber);
  sim_scene->add_option("--duration", scene_duration, "Seconds")->check(CLI::NonNegativeNumber);
  add_common(*sim_scene);

  // roc
  auto* roc = app.add_subcommand("roc", "Rate of convergence over a grid of starts");
  InputArgs roc_in;
  ObjectiveArgs roc_obj;
  std::string roc_gt;
  std::string roc_bounds = "-30,30,-30,30";
  double roc_step = 1.0;
  double roc_tol = 1.0;
  std::string roc_out;
  roc_in.add_to(*roc);
  roc_obj.add_to(*roc);
  roc->add_option("--gt", roc_gt, "Ground-truth velocity")->required()->check(velocity_arg);
  roc->add_option("--bounds", roc_bounds, "Start grid bounds")->check(bounds_arg);
  roc->add_option("--step", roc_step, "Start grid step")->check(CLI::PositiveNumber);
  roc->add_option("--tol", roc_tol, "Success radius (px/s)")->check(CLI::PositiveNumber);
  roc->add_option("-o,--output", roc_out, "Also write the report to this file")->check(writable_path);

  // oracle
  auto* oracle = app.add_subcommand("oracle", "Analytic versus discrete verification sweep");
  double oracle_events = 1.2e7;
  std::uint64_t oracle_seed = 7;
  int oracle_size = 50;
  oracle->add_option("--events", oracle_events, "Noise events of the 2D sweep")
      ->check(CLI::PositiveNumber);
  oracle->add_option("--seed", oracle_seed, "Random seed");
  oracle->add_option("--size", oracle_size, "Sensor side length")->check(CLI::Range(4, 4096));

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  out << std::setprecision(10);
  try {
    if (estimate->parsed()) {
      const auto stream = estimate_in.load();
      const ContrastObjective objective(stream, estimate_obj.options());
      const auto r = maximize_contrast(objective, parse_velocity(start));
      out << "theta_hat: " << r.theta_hat.vx << ' ' << r.theta_hat.vy << '\n'
          << "objective: " << r.objective_value << '\n'
          << "iterations: " << r.iterations << '\n'
          << "evaluations: " << r.evaluations << '\n'
          << "converged: " << (r.converged ? "true" : "false") << '\n';
      return 0;
    }

    if (land->parsed()) {
      const auto stream = land_in.load();
      const auto result = landscape(stream, parse_bounds(land_bounds), land_res, land_obj.options());
      const fs::path image_path = land_out;
      const fs::path values_path =
          land_values.empty() ? fs::path(image_path).replace_extension(".txt") : fs::path(land_values);
      write_image(image_path, render_grayscale({result.values, result.grid.nx, result.grid.ny}));
      write_text(values_path, landscape_text(result));
      const auto best = result.argmax();
      out << "argmax: " << best.vx << ' ' << best.vy << '\n'
          << "max: " << *std::max_element(result.values.begin(), result.values.end()) << '\n'
          << "image: " << image_path.string() << '\n'
          << "values: " << values_path.string() << '\n';
      return 0;
    }

    if (map->parsed()) {
      const auto stream = map_in.load();
      const auto theta = parse_velocity(map_theta);
      const auto options = map_obj.options();
      const auto image = warp_accumulate(stream, theta, options.kernel);
      const auto field = build_correction_field(stream.geometry(), theta, image.delta,
                                                image.layout, options.correction());
      auto shown = apply_correction(image, field);
      if (!options.corrected) shown.values = image.values;
      const auto contrast = contrast_variance(shown.values, shown.mask);
      const auto width = static_cast<std::size_t>(image.layout.width);
      const auto height = static_cast<std::size_t>(image.layout.height);
      write_image(map_out, render_grayscale({shown.values, width, height},
                                            RenderOptions::for_event_map()));
      out << "contrast: " << contrast.value << '\n'
          << "canvas: " << width << 'x' << height << '\n'
          << "image: " << map_out << '\n';
      return 0;
    }

    if (simulate->parsed()) {
      const auto geometry = parse_geometry(sim_geometry);
      EventStream stream;
      if (sim_noise->parsed()) {
        stream = gen_uniform_noise({noise_rate, noise_duration, geometry, sim_seed, noise_exact});
      } else {
        const auto theta = parse_velocity(scene_theta);
        SceneSpec spec;
        spec.theta_true = theta;
        spec.features = scatter_features(scene_features, theta, geometry, scene_duration,
                                         scene_rate, sim_seed);
        double signal = 0.0;
        for (const auto& f : spec.features) {
          signal += expected_visible_events(f, theta, geometry, scene_duration);
        }
        const double noise_rate_scene = scene_duration > 0.0 ? scene_ratio * signal / scene_duration : 0.0;
        spec.noise = {noise_rate_scene, scene_duration, geometry, sim_seed + 2};
        spec.seed = sim_seed + 1;
        stream = gen_translating_scene(spec);
        out << "expected_signal_events: " << signal << '\n';
      }
      write_events_file(sim_out, stream, format_for(sim_out, sim_format));
      out << "events: " << stream.size() << '\n' << "output: " << sim_out << '\n';
      return 0;
    }

    if (roc->parsed()) {
      const auto stream = roc_in.load();
      const auto gt = parse_velocity(roc_gt);
      const auto report =
          evaluate_roc(stream, gt, parse_bounds(roc_bounds), roc_step, roc_tol, roc_obj.options());
      const auto grid = VelocityGrid::make(parse_bounds(roc_bounds), roc_step);
      nlohmann::json j;
      j["roc_percent"] = report.roc_percent;
      j["rms"] = report.rms;
      j["runs"] = report.runs;
      j["successes"] = report.successes;
      j["tolerance"] = report.tolerance;
      j["theta_gt"] = {gt.vx, gt.vy};
      j["corrected"] = roc_obj.corrected;
      j["results"] = nlohmann::json::array();
      for (std::size_t k = 0; k < report.results.size(); ++k) {
        const auto& r = report.results[k];
        const auto s = grid.at(k % grid.nx, k / grid.nx);
        j["results"].push_back({{"start", {s.vx, s.vy}},
                                {"theta_hat", {r.theta_hat.vx, r.theta_hat.vy}},
                                {"error", std::hypot(r.theta_hat.vx - gt.vx, r.theta_hat.vy - gt.vy)},
                                {"contrast", r.objective_value},
                                {"iterations", r.iterations},
                                {"evaluations", r.evaluations},
                                {"converged", r.converged}});
      }
      const auto text = j.dump(2) + "\n";
      if (!roc_out.empty()) write_text(roc_out, text);
      out << text;
      return 0;
    }

    if (oracle->parsed()) {
      bool all = true;
      for (const auto& c : oracle_checks(oracle_events, oracle_seed, oracle_size)) {
        out << (c.pass ? "PASS " : "FAIL ") << c.name << ' ' << c.detail << '\n';
        all = all && c.pass;
      }
      return all ? 0 : 1;
    }
  } catch (const std::exception& e) {
    err << "event_warp: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace event_warp::cli
