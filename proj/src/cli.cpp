#include "dembed/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dembed/analysis.hpp"
#include "dembed/config.hpp"
#include "dembed/error.hpp"
#include "dembed/kernels.hpp"
#include "dembed/models.hpp"

#ifndef DEMBED_VERSION
#define DEMBED_VERSION "0.0.0"
#endif

namespace dembed::cli {
namespace fs = std::filesystem;

namespace {

bool is_config_error(ErrorKind k) {
  return k == ErrorKind::ConfigError || k == ErrorKind::InvalidArgument || k == ErrorKind::LayoutMismatch;
}

int report_error(const Error& e, std::ostream& log) {
  log << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
  return is_config_error(e.kind()) ? kExitConfig : kExitFailure;
}

template <typename F>
int guarded(std::ostream& log, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    return report_error(e, log);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

std::string checkpoint_name(std::size_t depth) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "covering_d%03zu.txt", depth);
  return buf;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream os(path);
  os << text;
  if (!os) throw Error(ErrorKind::IoError, "cannot write " + path.string());
}

std::vector<double> bounds(const BoxRegion& b, double sign) {
  std::vector<double> v(b.dim());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = b.center[i] + sign * b.radius[i];
  return v;
}

std::string format_list(const std::vector<double>& v) {
  std::ostringstream os;
  char buf[32];
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", v[i]);
    os << (i ? " " : "") << buf;
  }
  return os.str();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create " + dir + ": " + ec.message());
}

// Rounds a duration to a whole number of integrator steps.
double round_to_steps(double duration, double step, const char* what, std::ostream& log) {
  const double n = std::round(duration / step);
  const double rounded = n * step;
  if (std::abs(rounded - duration) > 1e-12 * std::max(1.0, std::abs(duration))) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "note: %s rounded from %.17g to %.17g (%.0f steps)\n", what, duration, rounded, n);
    log << buf;
  }
  return rounded;
}

}  // namespace

const char* version() { return DEMBED_VERSION; }

int cmd_run(const RunOptions& opt, std::ostream& log) {
  return guarded(log, [&]() -> int {
    RunSetup setup = load_config(opt.config);
    if (opt.out) setup.output_dir = *opt.out;
    if (opt.seed) setup.run.seed = *opt.seed;
    if (opt.threads) setup.run.threads = *opt.threads;
    if (opt.checkpoint_every) {
      setup.checkpoint_every = *opt.checkpoint_every;
      setup.checkpoint_from = std::min(setup.checkpoint_from, *opt.checkpoint_every);
    }
    setup.run.validate();
    if (setup.embedding) setup.embedding->validate();
    if (setup.embedding) {
      if (const auto warn = setup.embedding->dimension_warning()) log << "warning: " << *warn << '\n';
    }

    ensure_dir(setup.output_dir);
    const fs::path dir(setup.output_dir);
    {
      std::ostringstream m;
      m << "version = " << version() << '\n'
        << "command = run\n"
        << "config = " << opt.config << '\n'
        << "system = " << setup.system_label << '\n'
        << "seed = " << setup.run.seed << '\n'
        << "steps = " << setup.run.steps << '\n'
        << "points_per_box = " << setup.run.points_per_box << '\n'
        << "max_payloads_per_box = " << setup.run.max_payloads_per_box << '\n'
        << "checkpoint_every = " << setup.checkpoint_every << '\n'
        << "checkpoint_from = " << setup.checkpoint_from << '\n'
        << "domain_lower = " << format_list(bounds(setup.domain, -1.0)) << '\n'
        << "domain_upper = " << format_list(bounds(setup.domain, 1.0)) << '\n'
        << "excluded_regions = " << setup.excluded.size() << '\n'
        << "# config echo\n"
        << setup.source;
      if (!setup.source.empty() && setup.source.back() != '\n') m << '\n';
      write_file(dir / "manifest.txt", m.str());
    }

    StepCallback on_step = [&](const BoxCollection& c, const StepRecord& rec) {
      log << "depth " << rec.depth << ": " << rec.boxes_after << " boxes (" << rec.points_evaluated << " points, "
          << rec.seconds << " s)\n";
      if (setup.write_checkpoints && setup.checkpoint_every > 0 && rec.depth >= setup.checkpoint_from &&
          rec.depth % setup.checkpoint_every == 0) {
        write_covering((dir / checkpoint_name(rec.depth)).string(), c);
      }
    };

    SubdivisionResult result = [&] {
      if (setup.synthetic) {
        return test_hook_synthetic(*setup.synthetic, setup.domain, setup.run, setup.excluded, on_step);
      }
      return run_subdivision(*setup.system, *setup.embedding, setup.domain, setup.run, setup.excluded, on_step,
                             setup.steps_per_delay);
    }();

    write_covering((dir / "covering.txt").string(), result.covering);
    {
      std::ofstream t(dir / "report.txt");
      result.report.write_table(t);
      std::ofstream kv(dir / "report.kv");
      result.report.write_kv(kv);
      std::ofstream tm(dir / "timing.kv");
      result.report.write_timing(tm);
      if (!t || !kv || !tm) throw Error(ErrorKind::IoError, "cannot write reports in " + setup.output_dir);
    }
    if (result.covering.empty()) {
      log << "selection emptied the covering at depth " << result.covering.depth() << '\n';
      return kExitEmpty;
    }
    log << "final covering: depth " << result.covering.depth() << ", " << result.covering.size() << " boxes\n";
    return kExitOk;
  });
}

int cmd_simulate(const SimulateOptions& opt, std::ostream& log) {
  return guarded(log, [&]() -> int {
    RunSetup setup = load_config(opt.config);
    if (!setup.system) throw Error(ErrorKind::ConfigError, "simulate needs a delay equation, not a synthetic map");
    if (opt.out) setup.output_dir = *opt.out;
    SimulateSettings s = setup.simulate;
    if (opt.transient) s.transient = *opt.transient;
    if (opt.samples) s.samples = *opt.samples;
    if (opt.spacing) s.spacing = *opt.spacing;
    if (s.transient < 0.0 || s.spacing < 0.0) throw Error(ErrorKind::ConfigError, "durations must be >= 0");
    if (s.samples == 0) throw Error(ErrorKind::ConfigError, "samples must be >= 1");

    const DdeSystem& sys = *setup.system;
    const ObservableLayout& layout = setup.embedding->layout;
    const EmbeddedMap probe(sys, *setup.embedding, setup.steps_per_delay);
    const double step = probe.step();
    const double transient = round_to_steps(s.transient, step, "transient", log);
    double spacing = s.spacing > 0.0 ? s.spacing : layout.omega();
    spacing = round_to_steps(spacing, step, "spacing", log);
    if (s.samples > 1 && !(spacing > 0.0)) throw Error(ErrorKind::ConfigError, "spacing rounds to zero steps");

    std::vector<double> init = s.initial;
    if (init.empty()) {
      init.assign(sys.n, 0.5);
      log << "note: no [simulate] initial given, using the constant history 0.5\n";
    }
    const HistorySegment h0 = HistorySegment::constant(init, sys.tau);

    HistorySegment start = h0;
    if (transient > 0.0) start = integrate(sys, h0, transient, step).final_state;
    const PointSet orbit = simulate_embedded_orbit(sys, layout, start, 0.0, s.samples, spacing, step);

    ensure_dir(setup.output_dir);
    const fs::path dir(setup.output_dir);
    std::vector<double> labels(orbit.size());
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = transient + static_cast<double>(i) * spacing;
    write_points((dir / "orbit.txt").string(), orbit, labels);
    {
      std::ofstream os(dir / "trajectory.txt");
      const double window = static_cast<double>(s.samples - 1) * spacing;
      integrate(sys, start, window, step).dense.write_text(os, transient);
      if (!os) throw Error(ErrorKind::IoError, "cannot write trajectory.txt");
    }
    std::ostringstream m;
    char buf[64];
    m << "version = " << version() << '\n' << "command = simulate\n" << "config = " << opt.config << '\n';
    std::snprintf(buf, sizeof buf, "%.17g", transient);
    m << "transient = " << buf << '\n' << "samples = " << s.samples << '\n';
    std::snprintf(buf, sizeof buf, "%.17g", spacing);
    m << "spacing = " << buf << '\n' << "initial = " << format_list(init) << '\n';
    std::snprintf(buf, sizeof buf, "%.17g", step);
    m << "step = " << buf << '\n' << "# config echo\n" << setup.source;
    write_file(dir / "manifest.txt", m.str());
    log << "wrote " << orbit.size() << " embedded samples to " << (dir / "orbit.txt").string() << '\n';
    return kExitOk;
  });
}

int cmd_analyze(const AnalyzeOptions& opt, std::ostream& out, std::ostream& log) {
  return guarded(log, [&]() -> int {
    const BoxCollection covering = read_covering(opt.covering);
    std::ostringstream r;
    char buf[64];
    auto num = [&](double v) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      return std::string(buf);
    };
    r << "covering = " << opt.covering << '\n'
      << "k = " << covering.k() << '\n'
      << "depth = " << covering.depth() << '\n'
      << "boxes = " << covering.size() << '\n'
      << "leaf_diameter = " << num(covering.leaf_diameter()) << '\n';

    if (opt.points) {
      const PointSet pts = read_points(*opt.points);
      if (pts.dim != covering.k()) throw Error(ErrorKind::ConfigError, "points file dimension differs from k");
      r << "points = " << pts.size() << '\n' << "containment = " << num(containment(covering, pts)) << '\n';
      if (!covering.empty() && !pts.empty()) {
        const PointSet centers = box_centers(covering);
        r << "orbit_to_centers = " << num(directed_distance(pts, centers)) << '\n'
          << "centers_to_orbit = " << num(directed_distance(centers, pts)) << '\n';
      }
    }
    if (opt.other) {
      const BoxCollection other = read_covering(*opt.other);
      if (other.k() != covering.k()) throw Error(ErrorKind::ConfigError, "second covering has a different k");
      if (!covering.empty() && !other.empty()) {
        r << "hausdorff_centers = " << num(hausdorff(box_centers(covering), box_centers(other))) << '\n';
      }
    }
    if (!opt.series.empty()) {
      std::vector<CoveringSize> sizes{covering_size(covering)};
      for (const std::string& path : opt.series) {
        const BoxCollection c = read_covering(path);
        if (c.k() != covering.k()) throw Error(ErrorKind::ConfigError, path + " has a different k");
        sizes.push_back(covering_size(c));
      }
      std::sort(sizes.begin(), sizes.end(), [](const CoveringSize& a, const CoveringSize& b) { return a.depth < b.depth; });
      for (const CoveringSize& s : sizes) r << "series_depth_" << s.depth << " = " << s.boxes << '\n';
      try {
        r << "dimension_estimate = " << num(estimate_box_dimension(sizes)) << '\n';
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::InsufficientData) throw;
        r << "dimension_estimate = unavailable (" << e.what() << ")\n";
      }
    }
    if (opt.slice_coord) {
      const std::size_t c = *opt.slice_coord;
      if (c == 0 || c > covering.k()) throw Error(ErrorKind::ConfigError, "slice coordinate must be in 1..k");
      const BoxCollection slice = poincare_slice(covering, c - 1, opt.slice_value, opt.slice_thickness);
      r << "slice_coordinate = " << c << '\n'
        << "slice_value = " << num(opt.slice_value) << '\n'
        << "slice_boxes = " << slice.size() << '\n';
    }
    out << r.str();
    return kExitOk;
  });
}

int cmd_presets(std::ostream& out) {
  for (const std::string& name : preset_names()) {
    const ModelPreset p = *find_preset(name);
    out << name << ": n=" << p.system.n << " tau=" << p.system.tau << " k=" << p.embedding.layout.k()
        << " m=" << p.embedding.m << "  " << p.note << '\n';
  }
  return kExitOk;
}

int main(int argc, char** argv) {
  CLI::App app{"Invariant sets of delay differential equations by embedding and subdivision"};
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "subdivision run from a config file");
  run_cmd->add_option("config", run.config, "config file")->required();
  run_cmd->add_option("--out", run.out, "output directory");
  run_cmd->add_option("--seed", run.seed, "random seed (overrides config)");
  run_cmd->add_option("--threads", run.threads, "worker threads, 0 = all");
  run_cmd->add_option("--checkpoint-every", run.checkpoint_every, "write a covering every D depths");

  SimulateOptions sim;
  auto* sim_cmd = app.add_subcommand("simulate", "direct simulation and embedded orbit");
  sim_cmd->add_option("config", sim.config, "config file")->required();
  sim_cmd->add_option("--out", sim.out, "output directory");
  sim_cmd->add_option("--transient", sim.transient, "time discarded before sampling");
  sim_cmd->add_option("--samples", sim.samples, "number of embedded samples");
  sim_cmd->add_option("--spacing", sim.spacing, "time between samples (default omega)");

  AnalyzeOptions an;
  std::vector<double> slice;
  auto* an_cmd = app.add_subcommand("analyze", "containment, distances, dimension and slices");
  an_cmd->add_option("covering", an.covering, "covering file")->required();
  an_cmd->add_option("--points", an.points, "points file (label column then coordinates)");
  an_cmd->add_option("--against", an.other, "second covering for a Hausdorff comparison");
  an_cmd->add_option("--series", an.series, "further coverings for the dimension estimate");
  an_cmd->add_option("--slice", slice, "coordinate (1-based), value, thickness")->expected(2, 3);
  an_cmd->add_option("--out", an.out, "report file (default stdout)");

  app.add_subcommand("presets", "list built-in models");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (run_cmd->parsed()) return cmd_run(run, std::cerr);
  if (sim_cmd->parsed()) return cmd_simulate(sim, std::cerr);
  if (an_cmd->parsed()) {
    if (!slice.empty()) {
      if (slice[0] < 1 || slice[0] != std::floor(slice[0])) {
        std::cerr << "error: --slice coordinate must be a positive integer\n";
        return kExitConfig;
      }
      an.slice_coord = static_cast<std::size_t>(slice[0]);
      an.slice_value = slice[1];
      an.slice_thickness = slice.size() > 2 ? slice[2] : 0.0;
    }
    if (an.out) {
      std::ofstream os(*an.out);
      if (!os) {
        std::cerr << "error: cannot write " << *an.out << '\n';
        return kExitFailure;
      }
      return cmd_analyze(an, os, std::cerr);
    }
    return cmd_analyze(an, std::cout, std::cerr);
  }
  return cmd_presets(std::cout);
}

}  // namespace dembed::cli
