#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hswme/dlra.hpp"
#include "hswme/fom.hpp"
#include "hswme/pod.hpp"

namespace hswme {

enum class SolverKind { Fom, Swe, Pod, Dlra };

std::string_view to_string(SolverKind s);
SolverKind solver_from_string(std::string_view name);

struct RunConfig {
  TestCase test_case = TestCase::DamBreak;
  SolverKind solver = SolverKind::Fom;
  ModelParams params;
  Grid grid;
  CaseOptions case_options;
  double t_final = 0.2;
  std::size_t rank = 5;
  std::size_t snapshot_stride = 1;
  std::vector<double> training_nu;
  std::string output_dir = ".";
  std::string basis_path;  // pod: load instead of training when set

  SimulationConfig simulation() const;
  void validate() const;
};

/// "paper-dam-break" or "paper-smooth-wave".
RunConfig preset(std::string_view name);
std::vector<std::string> preset_names();

nlohmann::json to_json(const RunConfig& c);
/// Overlays the keys present in `j` onto `base`; unknown keys are rejected.
RunConfig apply_json(RunConfig base, const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path, RunConfig base);

// ---- binary files: 8-byte magic, u64 LE header length, JSON header, LE f64 payload

class FileFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void save_basis(const std::filesystem::path& path, const ReducedBasis& basis);
ReducedBasis load_basis(const std::filesystem::path& path);

/// Header of a trajectory file; frame k starts at
/// payload_offset + k * frame_doubles * 8 bytes.
struct TrajectoryFileInfo {
  nlohmann::json header;
  Trajectory meta;  // everything except frames
  std::size_t n_frames = 0;
  std::size_t n_cells = 0;
  std::size_t n_moments = 0;
  std::uint64_t payload_offset = 0;

  std::size_t frame_doubles() const { return n_cells * (2 + n_moments); }
};

void save_trajectory(const std::filesystem::path& path, const Trajectory& traj);
Trajectory load_trajectory(const std::filesystem::path& path);
TrajectoryFileInfo read_trajectory_info(const std::filesystem::path& path);
State read_trajectory_frame(const std::filesystem::path& path, const TrajectoryFileInfo& info, std::size_t frame);

/// Streams frames to disk so long runs need not keep them in memory. The
/// payload goes to a side file and is prepended with the header on finish().
class TrajectoryWriter {
 public:
  TrajectoryWriter(std::filesystem::path path, Trajectory meta);
  ~TrajectoryWriter();
  TrajectoryWriter(const TrajectoryWriter&) = delete;
  TrajectoryWriter& operator=(const TrajectoryWriter&) = delete;

  void append(double t, const MacroState& U, const MicroState& V);
  FrameObserver observer();
  void finish();

 private:
  std::filesystem::path path_;
  std::filesystem::path part_;
  Trajectory meta_;
  std::ofstream payload_;
  bool finished_ = false;
};

// ---- CSV reports (17 significant digits)

std::string format_double(double v);

/// t, totals of h, hu (and h alpha_4 when N >= 4), each with its deviation
/// from t = 0 relative to |initial| (absolute when the initial total is 0).
void write_conservation_csv(std::ostream& os, const std::vector<double>& times, const RunReport& report,
                            std::size_t n_moments);
void conservation_report(std::ostream& os, const Trajectory& traj);

/// Velocity profiles u(zeta) of the final frame at the cells containing
/// each position: one row per zeta, one column per position.
void export_profiles(std::ostream& os, const Trajectory& traj, const std::vector<double>& positions,
                     const std::vector<double>& zetas);

void write_phase_times_csv(std::ostream& os, const RunReport& report);

// ---- orchestration

/// Runs the configured solver; POD trains on `training_nu` unless a basis
/// file is given. `observer` sees every recorded frame; with keep_frames off
/// the returned trajectory holds times only.
struct SolverRun {
  RunResult result;
  double offline_seconds = 0.0;  // POD training (0 for other solvers)
};
SolverRun run_solver(const RunConfig& config, const FrameObserver& observer = {}, bool keep_frames = true);

/// Wall time of the stepping loop without frame output.
double stepping_seconds(const RunReport& report);

/// POD basis of rank r from full-order runs at each training viscosity,
/// streaming frames into the Gram matrix.
ReducedBasis train_pod_basis(const RunConfig& config, std::size_t r);

/// Leading r columns of a basis trained at a higher rank.
ReducedBasis truncate_basis(const ReducedBasis& basis, std::size_t r);

struct SweepRow {
  std::size_t rank = 0;
  double error = 0.0;
  double wall_seconds = 0.0;
  double speedup = 0.0;  // reference FOM time / wall_seconds
};

/// Error vs the full-order reference and wall time per rank. Runs fan out
/// over at most `threads` workers (0: HSWME_THREADS or hardware count).
std::vector<SweepRow> rank_sweep(const RunConfig& config, const std::vector<std::size_t>& ranks,
                                 std::size_t threads = 0);
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

struct BenchRow {
  std::string solver;
  std::vector<double> seconds;  // one per repetition
  double median = 0.0;
  double speedup = 0.0;  // FOM median / median
};

/// Times FOM, DLRA, SWE and POD-online over `reps` repetitions (median), and
/// POD-offline once. Timers cover the stepping loop only.
std::vector<BenchRow> bench(const RunConfig& config, std::size_t reps = 3);
void write_bench_csv(std::ostream& os, const std::vector<BenchRow>& rows);

std::size_t worker_threads();
double median(std::vector<double> v);

}  // namespace hswme
