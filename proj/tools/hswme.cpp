#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hswme/harness.hpp"

namespace fs = std::filesystem;
using namespace hswme;

namespace {

struct ConfigFlags {
  std::string preset;
  std::string config;
  std::optional<std::string> solver, test_case, bc, basis;
  std::optional<std::size_t> nx, nmoments, rank, stride;
  std::optional<double> nu, lambda, cfl, t_final, g, steepness;
  std::vector<double> training_nu;

  void attach(CLI::App* app, bool with_solver = true) {
    app->add_option("--preset", preset, "named preset (paper-dam-break, paper-smooth-wave)");
    app->add_option("--config", config, "JSON config file, applied after the preset")->check(CLI::ExistingFile);
    if (with_solver) app->add_option("--solver", solver, "fom, swe, pod or dlra");
    app->add_option("--case", test_case, "dam-break or smooth-wave");
    app->add_option("--nx", nx, "number of cells");
    app->add_option("--nmoments", nmoments, "number of moments N");
    app->add_option("--nu", nu, "viscosity");
    app->add_option("--lambda", lambda, "slip length");
    app->add_option("--g", g, "gravity");
    app->add_option("--cfl", cfl, "CFL number");
    app->add_option("--t-final", t_final, "final time");
    app->add_option("--bc", bc, "periodic or outflow");
    app->add_option("--rank", rank, "reduced rank");
    app->add_option("--stride", stride, "record every k-th step");
    app->add_option("--training-nu", training_nu, "POD training viscosities")->delimiter(',');
    app->add_option("--basis", basis, "POD basis file to use instead of training");
    app->add_option("--steepness", steepness, "dam-break profile steepness");
  }

  RunConfig resolve() const {
    RunConfig c = preset.empty() ? RunConfig{} : hswme::preset(preset);
    if (!config.empty()) c = load_run_config(config, c);
    if (solver) c.solver = solver_from_string(*solver);
    if (test_case) c.test_case = test_case_from_string(*test_case);
    if (bc) c.grid.bc = boundary_from_string(*bc);
    if (basis) c.basis_path = *basis;
    if (nx) c.grid.n_cells = *nx;
    if (nmoments) c.params.n_moments = *nmoments;
    if (rank) c.rank = *rank;
    if (stride) c.snapshot_stride = *stride;
    if (nu) c.params.nu = *nu;
    if (lambda) c.params.lambda = *lambda;
    if (g) c.params.g = *g;
    if (cfl) c.params.cfl = *cfl;
    if (t_final) c.t_final = *t_final;
    if (steepness) c.case_options.dam_break_steepness = *steepness;
    if (!training_nu.empty()) c.training_nu = training_nu;
    return c;
  }
};

std::ofstream open_csv(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return os;
}

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

int cmd_run(const ConfigFlags& flags, const std::string& out_dir, std::string name) {
  RunConfig c = flags.resolve();
  if (!out_dir.empty()) c.output_dir = out_dir;
  c.validate();
  if (name.empty()) name = std::string(to_string(c.test_case)) + "_" + std::string(to_string(c.solver));
  const fs::path dir = c.output_dir;
  fs::create_directories(dir);

  Trajectory meta;
  meta.params = c.params;
  meta.grid = c.grid;
  meta.test_case = c.test_case;
  meta.case_options = c.case_options;
  meta.snapshot_stride = c.snapshot_stride;
  meta.solver = std::string(to_string(c.solver));
  if (c.solver == SolverKind::Swe) meta.params.n_moments = 0;

  TrajectoryWriter writer(dir / (name + ".traj"), meta);
  const SolverRun run = run_solver(c, writer.observer(), false);
  writer.finish();

  const RunResult& r = run.result;
  {
    std::ofstream os = open_csv(dir / (name + "_conservation.csv"));
    write_conservation_csv(os, r.trajectory.times, r.report, meta.params.n_moments);
  }
  {
    std::ofstream os = open_csv(dir / (name + "_report.csv"));
    write_phase_times_csv(os, r.report);
    os << "offline," << format_double(run.offline_seconds) << '\n';
  }
  {
    std::ofstream os(dir / (name + "_config.json"));
    os << to_json(c).dump(2) << '\n';
  }
  std::cout << meta.solver << ": " << r.report.steps << " steps, " << r.report.wall_seconds.total
            << " s, output in " << dir.string() << '\n';
  return 0;
}

int cmd_pod_train(const ConfigFlags& flags, std::string out) {
  RunConfig c = flags.resolve();
  c.solver = SolverKind::Pod;
  c.basis_path.clear();
  c.validate();
  if (out.empty()) out = (fs::path(c.output_dir) / "pod.basis").string();
  const ReducedBasis b = train_pod_basis(c, c.rank);
  save_basis(out, b);
  std::cout << "basis rank " << b.rank() << " written to " << out << '\n';
  return 0;
}

int cmd_sweep(const ConfigFlags& flags, const std::vector<std::size_t>& ranks, const std::string& out) {
  const RunConfig c = flags.resolve();
  const std::vector<SweepRow> rows = rank_sweep(c, ranks);
  write_sweep_csv(std::cout, rows);
  if (!out.empty()) {
    std::ofstream os = open_csv(out);
    write_sweep_csv(os, rows);
  }
  return 0;
}

int cmd_bench(const ConfigFlags& flags, std::size_t reps, const std::string& out) {
  const RunConfig c = flags.resolve();
  const std::vector<BenchRow> rows = bench(c, reps);
  write_bench_csv(std::cout, rows);
  if (!out.empty()) {
    std::ofstream os = open_csv(out);
    write_bench_csv(os, rows);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shallow water moment simulations with POD and low-rank reduction"};
  app.require_subcommand(1);

  ConfigFlags run_flags, train_flags, sweep_flags, bench_flags;
  std::string out_dir, run_name, train_out, sweep_out, bench_out, profiles_out, conservation_out;
  std::vector<std::size_t> ranks{2, 3, 5, 10};
  std::size_t reps = 3;
  std::string traj_a, traj_b, profiles_traj, conservation_traj;
  std::vector<double> positions, zetas;
  std::size_t n_zeta = 21;

  CLI::App* run = app.add_subcommand("run", "run one solver and write trajectory and report CSVs");
  run_flags.attach(run);
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--name", run_name, "file name stem");

  CLI::App* train = app.add_subcommand("pod-train", "build a POD basis from training runs");
  train_flags.attach(train, false);
  train->add_option("--out", train_out, "basis file");

  CLI::App* sweep = app.add_subcommand("sweep", "error and wall time over a list of ranks");
  sweep_flags.attach(sweep);
  sweep->add_option("--ranks", ranks, "comma-separated ranks")->delimiter(',');
  sweep->add_option("--out", sweep_out, "CSV file (also printed)");

  CLI::App* compare = app.add_subcommand("compare", "relative L2 error of (h, hu) at the final frame");
  compare->add_option("a", traj_a, "trajectory")->required()->check(CLI::ExistingFile);
  compare->add_option("reference", traj_b, "reference trajectory")->required()->check(CLI::ExistingFile);

  CLI::App* bench_cmd = app.add_subcommand("bench", "time FOM, DLRA, SWE and POD at one configuration");
  bench_flags.attach(bench_cmd, false);
  bench_cmd->add_option("--reps", reps, "repetitions per solver");
  bench_cmd->add_option("--out", bench_out, "CSV file (also printed)");

  CLI::App* profiles = app.add_subcommand("export-profiles", "vertical velocity profiles of the final frame");
  profiles->add_option("trajectory", profiles_traj, "trajectory file")->required()->check(CLI::ExistingFile);
  profiles->add_option("--x", positions, "comma-separated positions")->required()->delimiter(',');
  profiles->add_option("--zeta", zetas, "comma-separated zeta values")->delimiter(',');
  profiles->add_option("--nzeta", n_zeta, "uniform zeta samples in [0,1] when --zeta is absent");
  profiles->add_option("--out", profiles_out, "CSV file (default stdout)");

  CLI::App* conservation = app.add_subcommand("conservation", "conservation series of a trajectory file");
  conservation->add_option("trajectory", conservation_traj, "trajectory file")->required()->check(CLI::ExistingFile);
  conservation->add_option("--out", conservation_out, "CSV file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_flags, out_dir, run_name);
    if (*train) return cmd_pod_train(train_flags, train_out);
    if (*sweep) return cmd_sweep(sweep_flags, ranks, sweep_out);
    if (*bench_cmd) return cmd_bench(bench_flags, reps, bench_out);
    if (*compare) {
      const double e = relative_l2_error(load_trajectory(traj_a), load_trajectory(traj_b));
      std::cout << format_double(e) << '\n';
      return 0;
    }
    if (*profiles) {
      if (zetas.empty()) zetas = linspace(0.0, 1.0, n_zeta);
      const Trajectory t = load_trajectory(profiles_traj);
      if (profiles_out.empty()) {
        export_profiles(std::cout, t, positions, zetas);
      } else {
        std::ofstream os = open_csv(profiles_out);
        export_profiles(os, t, positions, zetas);
      }
      return 0;
    }
    if (*conservation) {
      const Trajectory t = load_trajectory(conservation_traj);
      if (conservation_out.empty()) {
        conservation_report(std::cout, t);
      } else {
        std::ofstream os = open_csv(conservation_out);
        conservation_report(os, t);
      }
      return 0;
    }
  } catch (const SolverError& e) {
    std::cerr << "hswme: solver aborted: " << e.what() << '\n';
    return 3;
  } catch (const FileFormatError& e) {
    std::cerr << "hswme: bad file: " << e.what() << '\n';
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "hswme: configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "hswme: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
