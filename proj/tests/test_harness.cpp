#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>

#include "hswme/harness.hpp"
#include "oracles.hpp"

using namespace hswme;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("hswme_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void spit(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string f; std::getline(in, f, ',');) out.push_back(f);
  return out;
}

Trajectory small_run(TestCase tc, std::size_t nx, std::size_t n) {
  SimulationConfig c;
  c.test_case = tc;
  c.grid.n_cells = nx;
  c.params.n_moments = n;
  c.t_final = 0.02;
  if (tc == TestCase::SmoothWave) c.grid.bc = BoundaryCondition::Periodic;
  return run_hswme(c).trajectory;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("presets") {
  const RunConfig d = preset("paper-dam-break");
  CHECK(d.test_case == TestCase::DamBreak);
  CHECK(d.params.nu == 1.0);
  CHECK(d.params.lambda == 0.5);
  CHECK(d.grid.bc == BoundaryCondition::Outflow);
  CHECK(d.training_nu == std::vector<double>{0.1, 10.0});
  const RunConfig s = preset("paper-smooth-wave");
  CHECK(s.test_case == TestCase::SmoothWave);
  CHECK(s.params.nu == 0.1);
  CHECK(s.params.lambda == 0.1);
  CHECK(s.grid.bc == BoundaryCondition::Periodic);
  CHECK(s.training_nu == std::vector<double>{0.01, 1.0});
  for (const RunConfig& c : {d, s}) {
    CHECK(c.grid.n_cells == 2000);
    CHECK(c.params.n_moments == 100);
    CHECK(c.params.cfl == 0.25);
    CHECK(c.params.g == 9.81);
    CHECK(c.t_final == 0.2);
    CHECK(c.rank == 5);
  }
  CHECK(preset_names().size() == 2);
  CHECK_THROWS_AS(preset("nope"), std::invalid_argument);
}

TEST_CASE("config JSON round trip and overrides") {
  RunConfig c = preset("paper-smooth-wave");
  c.solver = SolverKind::Dlra;
  c.rank = 7;
  c.grid.n_cells = 123;
  c.params.nu = 0.3;
  c.snapshot_stride = 4;
  const RunConfig back = apply_json(RunConfig{}, to_json(c));
  CHECK(to_json(back) == to_json(c));

  const RunConfig o = apply_json(c, nlohmann::json{{"rank", 3}});
  CHECK(o.rank == 3);
  CHECK(o.grid.n_cells == 123);
  CHECK_THROWS_AS(apply_json(c, nlohmann::json{{"bogus", 1}}), std::invalid_argument);

  TempDir tmp;
  spit(tmp.path / "c.json", R"({"preset": "paper-dam-break", "n_cells": 64})");
  const RunConfig l = load_run_config(tmp.path / "c.json", RunConfig{});
  CHECK(l.test_case == TestCase::DamBreak);
  CHECK(l.params.lambda == 0.5);
  CHECK(l.grid.n_cells == 64);
}

TEST_CASE("solver names") {
  for (SolverKind s : {SolverKind::Fom, SolverKind::Swe, SolverKind::Pod, SolverKind::Dlra}) {
    CHECK(solver_from_string(to_string(s)) == s);
  }
  CHECK_THROWS_AS(solver_from_string("rk4"), std::invalid_argument);
}

TEST_CASE("format_double round trips") {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> d(-1e6, 1e6);
  for (int i = 0; i < 200; ++i) {
    const double v = d(rng) * std::pow(10.0, i % 20 - 10);
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("basis file round trip") {
  TempDir tmp;
  std::mt19937_64 rng(62);
  ReducedBasis b;
  b.W = oracle::from_eigen(oracle::random_orthonormal(rng, 9, 3));
  b.singular_values = {5.0, 2.0, 1.0, 0.5, 0.1, 0.0, 0.0, 0.0, 0.0};
  b.training_cases = {"dam-break"};
  b.training_nu = {0.1, 10.0};
  save_basis(tmp.path / "a.bas", b);
  const ReducedBasis l = load_basis(tmp.path / "a.bas");
  CHECK(l.W == b.W);
  CHECK(l.singular_values == b.singular_values);
  CHECK(l.training_nu == b.training_nu);
  CHECK(l.training_cases == b.training_cases);
  save_basis(tmp.path / "b.bas", l);
  CHECK(slurp(tmp.path / "a.bas") == slurp(tmp.path / "b.bas"));

  std::string bytes = slurp(tmp.path / "a.bas");
  spit(tmp.path / "long.bas", bytes + "x");
  CHECK_THROWS_AS(load_basis(tmp.path / "long.bas"), FileFormatError);
  spit(tmp.path / "short.bas", bytes.substr(0, bytes.size() - 8));
  CHECK_THROWS_AS(load_basis(tmp.path / "short.bas"), FileFormatError);
  bytes[0] = 'X';
  spit(tmp.path / "magic.bas", bytes);
  CHECK_THROWS_AS(load_basis(tmp.path / "magic.bas"), FileFormatError);
  CHECK_THROWS(load_basis(tmp.path / "missing.bas"));
}

TEST_CASE("trajectory file round trip and streaming writer") {
  TempDir tmp;
  const Trajectory t = small_run(TestCase::DamBreak, 40, 5);
  save_trajectory(tmp.path / "a.traj", t);
  const Trajectory l = load_trajectory(tmp.path / "a.traj");
  CHECK(l.times == t.times);
  CHECK(l.macro == t.macro);
  CHECK(l.micro == t.micro);
  CHECK(l.grid.n_cells == 40);
  CHECK(l.params.n_moments == 5);
  save_trajectory(tmp.path / "b.traj", l);
  CHECK(slurp(tmp.path / "a.traj") == slurp(tmp.path / "b.traj"));

  const TrajectoryFileInfo info = read_trajectory_info(tmp.path / "a.traj");
  CHECK(info.n_frames == t.n_frames());
  const std::size_t mid = t.n_frames() / 2;
  const State s = read_trajectory_frame(tmp.path / "a.traj", info, mid);
  CHECK(s.U == t.macro[mid]);
  CHECK(s.V == t.micro[mid]);
  CHECK_THROWS_AS(read_trajectory_frame(tmp.path / "a.traj", info, t.n_frames()), std::out_of_range);

  Trajectory meta = t;
  meta.times.clear();
  meta.macro.clear();
  meta.micro.clear();
  {
    TrajectoryWriter w(tmp.path / "c.traj", meta);
    for (std::size_t k = 0; k < t.n_frames(); ++k) w.append(t.times[k], t.macro[k], t.micro[k]);
    w.finish();
  }
  CHECK(slurp(tmp.path / "c.traj") == slurp(tmp.path / "a.traj"));
  CHECK(!fs::exists(tmp.path / "c.traj.part"));

  std::string bytes = slurp(tmp.path / "a.traj");
  spit(tmp.path / "cut.traj", bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(load_trajectory(tmp.path / "cut.traj"), FileFormatError);
  CHECK_THROWS_AS(load_basis(tmp.path / "a.traj"), FileFormatError);
}

TEST_CASE("conservation CSV") {
  const Trajectory t = small_run(TestCase::SmoothWave, 50, 6);
  std::ostringstream os;
  conservation_report(os, t);
  const auto rows = lines(os.str());
  REQUIRE(rows.size() == t.n_frames() + 1);
  CHECK(rows[0] == "t,mass,momentum,moment4,mass_rel_dev,momentum_rel_dev,moment4_rel_dev");
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const auto f = split(rows[k]);
    REQUIRE(f.size() == 7);
    CHECK(std::stod(f[0]) == t.times[k - 1]);
    CHECK(std::abs(std::stod(f[4])) <= 1e-12);
  }

  std::ostringstream small;
  conservation_report(small, small_run(TestCase::DamBreak, 20, 2));
  CHECK(lines(small.str())[0] == "t,mass,momentum,mass_rel_dev,momentum_rel_dev");
  // zero initial momentum: deviation is absolute
  const auto f = split(lines(small.str()).back());
  CHECK(std::stod(f[4]) == std::stod(f[2]));
}

TEST_CASE("velocity profile export") {
  const std::vector<double> zetas = {0.0, 0.25, 0.5, 1.0};
  SUBCASE("no moments gives a constant profile") {
    const Trajectory t = small_run(TestCase::DamBreak, 40, 0);
    std::ostringstream os;
    export_profiles(os, t, {-0.5, 0.1}, zetas);
    const auto rows = lines(os.str());
    REQUIRE(rows.size() == zetas.size() + 1);
    CHECK(rows[0].rfind("zeta,u(x=", 0) == 0);
    for (std::size_t k = 2; k < rows.size(); ++k) {
      CHECK(split(rows[k])[1] == split(rows[1])[1]);
      CHECK(split(rows[k])[2] == split(rows[1])[2]);
    }
  }
  SUBCASE("profile is the moment expansion at the containing cell") {
    const Trajectory t = small_run(TestCase::SmoothWave, 40, 6);
    const double x = 0.3;
    std::ostringstream os;
    export_profiles(os, t, {x}, zetas);
    const auto rows = lines(os.str());
    const std::size_t j = static_cast<std::size_t>(std::floor((x - t.grid.x_min) / t.grid.dx()));
    const MacroState& U = t.macro.back();
    const MicroState& V = t.micro.back();
    for (std::size_t i = 0; i < zetas.size(); ++i) {
      double u = U.velocity(j);
      for (int k = 0; k < 6; ++k) u += V(j, k) / U.h(j) * oracle::phi(k + 1, zetas[i]);
      CHECK(std::stod(split(rows[i + 1])[1]) == doctest::Approx(u).epsilon(1e-13));
    }
  }
  SUBCASE("dam break develops a sheared profile") {
    SimulationConfig c;
    c.grid.n_cells = 200;
    c.params.n_moments = 8;
    const Trajectory t = run_hswme(c).trajectory;
    std::ostringstream os;
    export_profiles(os, t, {0.65}, {0.0, 0.5, 1.0});
    const auto rows = lines(os.str());
    const double a = std::stod(split(rows[1])[1]), b = std::stod(split(rows[3])[1]);
    CHECK(std::abs(a - b) > 1e-3);
    CHECK_THROWS_AS(export_profiles(os, t, {2.0}, zetas), std::invalid_argument);
  }
}

TEST_CASE("run_solver dispatches every backend") {
  RunConfig c = preset("paper-dam-break");
  c.grid.n_cells = 100;
  c.params.n_moments = 10;
  c.t_final = 0.05;
  const SolverRun fom = run_solver(c);
  for (SolverKind s : {SolverKind::Swe, SolverKind::Pod, SolverKind::Dlra}) {
    c.solver = s;
    const SolverRun r = run_solver(c);
    CHECK(r.result.trajectory.solver == std::string(to_string(s)));
    CHECK(r.result.trajectory.n_frames() > 1);
    if (s == SolverKind::Pod) CHECK(r.offline_seconds > 0.0);
    if (s != SolverKind::Swe) CHECK(relative_l2_error(r.result.trajectory, fom.result.trajectory) <= 2e-2);
  }
  const SolverRun lean = run_solver(c, {}, false);
  CHECK(lean.result.trajectory.macro.empty());
}

TEST_CASE("rank sweep error falls with rank") {
  RunConfig c = preset("paper-dam-break");
  c.grid.n_cells = 200;
  c.params.n_moments = 20;
  for (SolverKind s : {SolverKind::Pod, SolverKind::Dlra}) {
    c.solver = s;
    const auto rows = rank_sweep(c, {2, 5, 10}, 2);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].rank == 2);
    CHECK(rows[2].error <= rows[0].error);
    for (const SweepRow& r : rows) CHECK(r.wall_seconds > 0.0);
    std::ostringstream os;
    write_sweep_csv(os, rows);
    CHECK(lines(os.str()).size() == 4);
    CHECK(lines(os.str())[0] == "rank,rel_l2_error,wall_seconds,speedup_vs_fom");
  }
  c.solver = SolverKind::Fom;
  CHECK_THROWS_AS(rank_sweep(c, {2}), std::invalid_argument);
}

TEST_CASE("median") {
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
  CHECK_THROWS(median({}));
}

}  // TEST_SUITE
