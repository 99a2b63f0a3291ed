#include "hswme/harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

namespace hswme {

using nlohmann::json;

std::string_view to_string(SolverKind s) {
  switch (s) {
    case SolverKind::Fom: return "fom";
    case SolverKind::Swe: return "swe";
    case SolverKind::Pod: return "pod";
    case SolverKind::Dlra: return "dlra";
  }
  throw std::invalid_argument("unknown solver kind");
}

SolverKind solver_from_string(std::string_view name) {
  if (name == "fom") return SolverKind::Fom;
  if (name == "swe") return SolverKind::Swe;
  if (name == "pod") return SolverKind::Pod;
  if (name == "dlra") return SolverKind::Dlra;
  throw std::invalid_argument("unknown solver '" + std::string(name) + "' (expected fom, swe, pod or dlra)");
}

SimulationConfig RunConfig::simulation() const {
  SimulationConfig s;
  s.test_case = test_case;
  s.params = params;
  s.grid = grid;
  s.case_options = case_options;
  s.t_final = t_final;
  s.snapshot_stride = snapshot_stride;
  return s;
}

void RunConfig::validate() const {
  simulation().validate();
  if (solver == SolverKind::Pod || solver == SolverKind::Dlra) {
    if (params.n_moments == 0) throw std::invalid_argument("RunConfig: reduced solvers need n_moments >= 1");
    if (rank == 0 || rank > params.n_moments) throw std::invalid_argument("RunConfig: rank must lie in [1, n_moments]");
    if (solver == SolverKind::Dlra && rank > grid.n_cells) throw std::invalid_argument("RunConfig: rank exceeds n_cells");
    if (solver == SolverKind::Pod && basis_path.empty() && training_nu.empty()) {
      throw std::invalid_argument("RunConfig: pod needs training_nu or a basis file");
    }
  }
}

RunConfig preset(std::string_view name) {
  RunConfig c;
  c.params.g = 9.81;
  c.params.cfl = 0.25;
  c.params.n_moments = 100;
  c.grid.n_cells = 2000;
  c.grid.x_min = -1.0;
  c.grid.x_max = 1.0;
  c.t_final = 0.2;
  c.rank = 5;
  if (name == "paper-dam-break") {
    c.test_case = TestCase::DamBreak;
    c.params.nu = 1.0;
    c.params.lambda = 0.5;
    c.grid.bc = BoundaryCondition::Outflow;
    c.training_nu = {0.1, 10.0};
    return c;
  }
  if (name == "paper-smooth-wave") {
    c.test_case = TestCase::SmoothWave;
    c.params.nu = 0.1;
    c.params.lambda = 0.1;
    c.grid.bc = BoundaryCondition::Periodic;
    c.training_nu = {0.01, 1.0};
    return c;
  }
  throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
}

std::vector<std::string> preset_names() { return {"paper-dam-break", "paper-smooth-wave"}; }

json to_json(const RunConfig& c) {
  return json{{"case", to_string(c.test_case)},
              {"solver", to_string(c.solver)},
              {"g", c.params.g},
              {"nu", c.params.nu},
              {"lambda", c.params.lambda},
              {"n_moments", c.params.n_moments},
              {"cfl", c.params.cfl},
              {"n_cells", c.grid.n_cells},
              {"x_min", c.grid.x_min},
              {"x_max", c.grid.x_max},
              {"bc", to_string(c.grid.bc)},
              {"dam_break_steepness", c.case_options.dam_break_steepness},
              {"t_final", c.t_final},
              {"rank", c.rank},
              {"snapshot_stride", c.snapshot_stride},
              {"training_nu", c.training_nu},
              {"output_dir", c.output_dir},
              {"basis", c.basis_path}};
}

RunConfig apply_json(RunConfig c, const json& j) {
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "preset") continue;
    if (key == "case") c.test_case = test_case_from_string(v.get<std::string>());
    else if (key == "solver") c.solver = solver_from_string(v.get<std::string>());
    else if (key == "g") c.params.g = v.get<double>();
    else if (key == "nu") c.params.nu = v.get<double>();
    else if (key == "lambda") c.params.lambda = v.get<double>();
    else if (key == "n_moments") c.params.n_moments = v.get<std::size_t>();
    else if (key == "cfl") c.params.cfl = v.get<double>();
    else if (key == "n_cells") c.grid.n_cells = v.get<std::size_t>();
    else if (key == "x_min") c.grid.x_min = v.get<double>();
    else if (key == "x_max") c.grid.x_max = v.get<double>();
    else if (key == "bc") c.grid.bc = boundary_from_string(v.get<std::string>());
    else if (key == "dam_break_steepness") c.case_options.dam_break_steepness = v.get<double>();
    else if (key == "t_final") c.t_final = v.get<double>();
    else if (key == "rank") c.rank = v.get<std::size_t>();
    else if (key == "snapshot_stride") c.snapshot_stride = v.get<std::size_t>();
    else if (key == "training_nu") c.training_nu = v.get<std::vector<double>>();
    else if (key == "output_dir") c.output_dir = v.get<std::string>();
    else if (key == "basis") c.basis_path = v.get<std::string>();
    else throw std::invalid_argument("config: unknown key '" + key + "'");
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config " + path.string() + ": " + e.what());
  }
  if (j.contains("preset")) base = preset(j.at("preset").get<std::string>());
  return apply_json(std::move(base), j);
}

// ---- binary files

namespace {

constexpr char kBasisMagic[8] = {'H', 'S', 'W', 'M', 'E', 'B', 'A', 'S'};
constexpr char kTrajMagic[8] = {'H', 'S', 'W', 'M', 'E', 'T', 'R', 'J'};

std::uint64_t to_little(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  std::uint64_t r = 0;
  for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
  return r;
}

void write_u64(std::ostream& os, std::uint64_t v) {
  const std::uint64_t le = to_little(v);
  os.write(reinterpret_cast<const char*>(&le), sizeof le);
}

void write_doubles(std::ostream& os, std::span<const double> values) {
  if constexpr (std::endian::native == std::endian::little) {
    os.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
  } else {
    for (double v : values) write_u64(os, std::bit_cast<std::uint64_t>(v));
  }
}

void read_doubles(std::istream& is, std::span<double> out) {
  is.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(out.size() * sizeof(double)));
  if (!is) throw FileFormatError("truncated payload");
  if constexpr (std::endian::native != std::endian::little) {
    for (double& v : out) v = std::bit_cast<double>(to_little(std::bit_cast<std::uint64_t>(v)));
  }
}

void write_header(std::ostream& os, const char (&magic)[8], const json& header) {
  const std::string text = header.dump();
  os.write(magic, 8);
  write_u64(os, text.size());
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
}

json read_header(std::istream& is, const char (&magic)[8], const std::filesystem::path& path) {
  char m[8];
  is.read(m, 8);
  if (!is || std::memcmp(m, magic, 8) != 0) throw FileFormatError(path.string() + ": bad magic");
  std::uint64_t len = 0;
  is.read(reinterpret_cast<char*>(&len), sizeof len);
  if (!is) throw FileFormatError(path.string() + ": truncated header");
  len = to_little(len);
  if (len > (std::uint64_t{1} << 34)) throw FileFormatError(path.string() + ": implausible header length");
  std::string text(len, '\0');
  is.read(text.data(), static_cast<std::streamsize>(len));
  if (!is) throw FileFormatError(path.string() + ": truncated header");
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FileFormatError(path.string() + ": malformed header: " + e.what());
  }
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  return is;
}

json trajectory_header(const Trajectory& t, std::size_t n_cells, std::size_t n_moments) {
  return json{{"format", "hswme-trajectory"},
              {"version", 1},
              {"test_case", to_string(t.test_case)},
              {"solver", t.solver},
              {"case_options", {{"dam_break_steepness", t.case_options.dam_break_steepness}}},
              {"grid",
               {{"n_cells", t.grid.n_cells}, {"x_min", t.grid.x_min}, {"x_max", t.grid.x_max}, {"bc", to_string(t.grid.bc)}}},
              {"params",
               {{"g", t.params.g},
                {"nu", t.params.nu},
                {"lambda", t.params.lambda},
                {"n_moments", t.params.n_moments},
                {"cfl", t.params.cfl}}},
              {"snapshot_stride", t.snapshot_stride},
              {"times", t.times},
              {"layout",
               {{"n_frames", t.times.size()},
                {"n_cells", n_cells},
                {"n_moments", n_moments},
                {"frame_doubles", n_cells * (2 + n_moments)},
                {"frame", "U (n_cells x 2) then V (n_cells x n_moments), row-major"},
                {"scalar", "f64-le"}}}};
}

Trajectory trajectory_meta(const json& h) {
  Trajectory t;
  t.test_case = test_case_from_string(h.at("test_case").get<std::string>());
  t.solver = h.at("solver").get<std::string>();
  t.case_options.dam_break_steepness = h.at("case_options").at("dam_break_steepness").get<double>();
  const json& g = h.at("grid");
  t.grid.n_cells = g.at("n_cells").get<std::size_t>();
  t.grid.x_min = g.at("x_min").get<double>();
  t.grid.x_max = g.at("x_max").get<double>();
  t.grid.bc = boundary_from_string(g.at("bc").get<std::string>());
  const json& p = h.at("params");
  t.params.g = p.at("g").get<double>();
  t.params.nu = p.at("nu").get<double>();
  t.params.lambda = p.at("lambda").get<double>();
  t.params.n_moments = p.at("n_moments").get<std::size_t>();
  t.params.cfl = p.at("cfl").get<double>();
  t.snapshot_stride = h.at("snapshot_stride").get<std::size_t>();
  t.times = h.at("times").get<std::vector<double>>();
  return t;
}

void write_frame(std::ostream& os, const MacroState& U, const MicroState& V) {
  write_doubles(os, U.matrix().data());
  write_doubles(os, V.matrix().data());
}

}  // namespace

void save_basis(const std::filesystem::path& path, const ReducedBasis& basis) {
  json header{{"format", "hswme-basis"},
              {"version", 1},
              {"n_moments", basis.n_moments()},
              {"rank", basis.rank()},
              {"singular_values", basis.singular_values},
              {"provenance", {{"training_cases", basis.training_cases}, {"training_nu", basis.training_nu}}},
              {"layout", {{"payload", "W (n_moments x rank), row-major"}, {"scalar", "f64-le"}}}};
  std::ofstream os = open_out(path);
  write_header(os, kBasisMagic, header);
  write_doubles(os, basis.W.data());
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

ReducedBasis load_basis(const std::filesystem::path& path) {
  std::ifstream is = open_in(path);
  const json h = read_header(is, kBasisMagic, path);
  ReducedBasis b;
  try {
    const auto n = h.at("n_moments").get<std::size_t>();
    const auto r = h.at("rank").get<std::size_t>();
    b.W = Matrix(n, r);
    b.singular_values = h.at("singular_values").get<std::vector<double>>();
    b.training_cases = h.at("provenance").at("training_cases").get<std::vector<std::string>>();
    b.training_nu = h.at("provenance").at("training_nu").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw FileFormatError(path.string() + ": " + e.what());
  }
  read_doubles(is, b.W.data());
  if (is.peek() != std::char_traits<char>::eof()) throw FileFormatError(path.string() + ": trailing bytes after payload");
  return b;
}

void save_trajectory(const std::filesystem::path& path, const Trajectory& traj) {
  if (traj.macro.size() != traj.times.size() || traj.micro.size() != traj.times.size()) {
    throw std::invalid_argument("save_trajectory: trajectory holds no frames (keep_frames was off?)");
  }
  const std::size_t nx = traj.grid.n_cells;
  const std::size_t nm = traj.micro.empty() ? traj.params.n_moments : traj.micro.front().n_moments();
  std::ofstream os = open_out(path);
  write_header(os, kTrajMagic, trajectory_header(traj, nx, nm));
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    if (traj.macro[k].n_cells() != nx || traj.micro[k].n_cells() != nx || traj.micro[k].n_moments() != nm) {
      throw std::invalid_argument("save_trajectory: frame shape changes within the trajectory");
    }
    write_frame(os, traj.macro[k], traj.micro[k]);
  }
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

TrajectoryFileInfo read_trajectory_info(const std::filesystem::path& path) {
  std::ifstream is = open_in(path);
  TrajectoryFileInfo info;
  info.header = read_header(is, kTrajMagic, path);
  info.payload_offset = static_cast<std::uint64_t>(is.tellg());
  try {
    info.meta = trajectory_meta(info.header);
    const json& l = info.header.at("layout");
    info.n_frames = l.at("n_frames").get<std::size_t>();
    info.n_cells = l.at("n_cells").get<std::size_t>();
    info.n_moments = l.at("n_moments").get<std::size_t>();
  } catch (const std::exception& e) {
    throw FileFormatError(path.string() + ": " + e.what());
  }
  if (info.n_frames != info.meta.times.size() || info.n_cells != info.meta.grid.n_cells) {
    throw FileFormatError(path.string() + ": inconsistent layout");
  }
  const std::uint64_t expected = info.payload_offset + info.n_frames * info.frame_doubles() * sizeof(double);
  if (std::filesystem::file_size(path) != expected) throw FileFormatError(path.string() + ": payload size mismatch");
  return info;
}

State read_trajectory_frame(const std::filesystem::path& path, const TrajectoryFileInfo& info, std::size_t frame) {
  if (frame >= info.n_frames) throw std::out_of_range("read_trajectory_frame: frame index out of range");
  std::ifstream is = open_in(path);
  is.seekg(static_cast<std::streamoff>(info.payload_offset + frame * info.frame_doubles() * sizeof(double)));
  State s{MacroState(info.n_cells), MicroState(info.n_cells, info.n_moments)};
  read_doubles(is, s.U.matrix().data());
  read_doubles(is, s.V.matrix().data());
  return s;
}

Trajectory load_trajectory(const std::filesystem::path& path) {
  const TrajectoryFileInfo info = read_trajectory_info(path);
  Trajectory t = info.meta;
  std::ifstream is = open_in(path);
  is.seekg(static_cast<std::streamoff>(info.payload_offset));
  for (std::size_t k = 0; k < info.n_frames; ++k) {
    MacroState U(info.n_cells);
    MicroState V(info.n_cells, info.n_moments);
    read_doubles(is, U.matrix().data());
    read_doubles(is, V.matrix().data());
    t.macro.push_back(std::move(U));
    t.micro.push_back(std::move(V));
  }
  return t;
}

TrajectoryWriter::TrajectoryWriter(std::filesystem::path path, Trajectory meta)
    : path_(std::move(path)), part_(path_.string() + ".part"), meta_(std::move(meta)) {
  meta_.times.clear();
  meta_.macro.clear();
  meta_.micro.clear();
  payload_ = open_out(part_);
}

TrajectoryWriter::~TrajectoryWriter() {
  if (!finished_) {
    payload_.close();
    std::error_code ec;
    std::filesystem::remove(part_, ec);
  }
}

void TrajectoryWriter::append(double t, const MacroState& U, const MicroState& V) {
  if (U.n_cells() != meta_.grid.n_cells || V.n_cells() != meta_.grid.n_cells || V.n_moments() != meta_.params.n_moments) {
    throw std::invalid_argument("TrajectoryWriter: frame shape mismatch");
  }
  meta_.times.push_back(t);
  write_frame(payload_, U, V);
  if (!payload_) throw std::runtime_error("write failed: " + part_.string());
}

FrameObserver TrajectoryWriter::observer() {
  return [this](double t, const MacroState& U, const MicroState& V) { append(t, U, V); };
}

void TrajectoryWriter::finish() {
  if (finished_) return;
  payload_.close();
  {
    std::ofstream os = open_out(path_);
    write_header(os, kTrajMagic, trajectory_header(meta_, meta_.grid.n_cells, meta_.params.n_moments));
    std::ifstream part(part_, std::ios::binary);
    os << part.rdbuf();
    if (!os) throw std::runtime_error("write failed: " + path_.string());
  }
  std::filesystem::remove(part_);
  finished_ = true;
}

// ---- CSV

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

double deviation(double x, double x0) { return x0 != 0.0 ? (x - x0) / std::abs(x0) : x - x0; }

}  // namespace

void write_conservation_csv(std::ostream& os, const std::vector<double>& times, const RunReport& report,
                            std::size_t n_moments) {
  const bool with4 = n_moments >= 4;
  os << "t,mass,momentum";
  if (with4) os << ",moment4";
  os << ",mass_rel_dev,momentum_rel_dev";
  if (with4) os << ",moment4_rel_dev";
  os << '\n';
  for (std::size_t k = 0; k < times.size(); ++k) {
    os << format_double(times[k]) << ',' << format_double(report.mass[k]) << ',' << format_double(report.momentum[k]);
    if (with4) os << ',' << format_double(report.moment4[k]);
    os << ',' << format_double(deviation(report.mass[k], report.mass[0])) << ','
       << format_double(deviation(report.momentum[k], report.momentum[0]));
    if (with4) os << ',' << format_double(deviation(report.moment4[k], report.moment4[0]));
    os << '\n';
  }
}

void conservation_report(std::ostream& os, const Trajectory& traj) {
  RunReport r;
  const std::size_t nm = traj.micro.empty() ? 0 : traj.micro.front().n_moments();
  for (std::size_t k = 0; k < traj.macro.size(); ++k) {
    r.mass.push_back(total_mass(traj.macro[k], traj.grid));
    r.momentum.push_back(total_momentum(traj.macro[k], traj.grid));
    r.moment4.push_back(nm >= 4 ? total_moment(traj.micro[k], 3, traj.grid) : 0.0);
  }
  write_conservation_csv(os, traj.times, r, nm);
}

void export_profiles(std::ostream& os, const Trajectory& traj, const std::vector<double>& positions,
                     const std::vector<double>& zetas) {
  if (traj.macro.empty()) throw std::invalid_argument("export_profiles: trajectory holds no frames");
  const MacroState& U = traj.macro.back();
  const MicroState& V = traj.micro.back();
  const Grid& g = traj.grid;
  std::vector<std::size_t> cells;
  for (double x : positions) {
    if (!(x >= g.x_min && x <= g.x_max)) throw std::invalid_argument("export_profiles: position " + format_double(x) + " outside the domain");
    const auto j = static_cast<std::size_t>(std::floor((x - g.x_min) / g.dx()));
    cells.push_back(std::min(j, g.n_cells - 1));
  }
  os << "zeta";
  for (double x : positions) os << ",u(x=" << format_double(x) << ')';
  os << '\n';
  Vector alphas(V.n_moments());
  for (double z : zetas) {
    os << format_double(z);
    for (std::size_t j : cells) {
      const double h = U.h(j);
      for (std::size_t k = 0; k < alphas.size(); ++k) alphas[k] = V(j, k) / h;
      os << ',' << format_double(reconstruct_velocity(U.velocity(j), alphas, z));
    }
    os << '\n';
  }
}

void write_phase_times_csv(std::ostream& os, const RunReport& report) {
  const PhaseTimes& p = report.wall_seconds;
  os << "phase,seconds\n";
  os << "time_step," << format_double(p.time_step) << '\n';
  os << "macro_transport," << format_double(p.macro_transport) << '\n';
  os << "micro_transport," << format_double(p.micro_transport) << '\n';
  os << "macro_friction," << format_double(p.macro_friction) << '\n';
  os << "micro_friction," << format_double(p.micro_friction) << '\n';
  os << "output," << format_double(p.output) << '\n';
  os << "total," << format_double(p.total) << '\n';
  os << "steps," << report.steps << '\n';
}

// ---- orchestration

std::size_t worker_threads() {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("HSWME_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) n = std::min(n, static_cast<std::size_t>(v));
  }
  return n;
}

double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median: empty sample");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

ReducedBasis train_pod_basis(const RunConfig& config, std::size_t r) {
  if (config.training_nu.empty()) throw std::invalid_argument("train_pod_basis: no training viscosities");
  SnapshotGram gram(config.params.n_moments);
  for (double nu : config.training_nu) {
    SimulationConfig sim = config.simulation();
    sim.params.nu = nu;
    sim.keep_frames = false;
    run_hswme(sim, [&](double, const MacroState&, const MicroState& V) { gram.add(V); });
  }
  ReducedBasis basis = pod_basis(gram, r);
  for (double nu : config.training_nu) {
    basis.training_cases.emplace_back(to_string(config.test_case));
    basis.training_nu.push_back(nu);
  }
  return basis;
}

ReducedBasis truncate_basis(const ReducedBasis& basis, std::size_t r) {
  if (r == 0 || r > basis.rank()) throw std::invalid_argument("truncate_basis: rank out of range");
  ReducedBasis out = basis;
  out.W = Matrix(basis.n_moments(), r);
  for (std::size_t i = 0; i < basis.n_moments(); ++i)
    for (std::size_t k = 0; k < r; ++k) out.W(i, k) = basis.W(i, k);
  return out;
}

double stepping_seconds(const RunReport& report) { return report.wall_seconds.total - report.wall_seconds.output; }

SolverRun run_solver(const RunConfig& config, const FrameObserver& observer, bool keep_frames) {
  config.validate();
  SimulationConfig sim = config.simulation();
  sim.keep_frames = keep_frames;
  SolverRun out;
  switch (config.solver) {
    case SolverKind::Fom: out.result = run_hswme(sim, observer); break;
    case SolverKind::Swe: out.result = run_swe(sim, observer); break;
    case SolverKind::Dlra: out.result = dlra_run(sim, config.rank, observer); break;
    case SolverKind::Pod: {
      const auto t0 = std::chrono::steady_clock::now();
      ReducedBasis basis;
      if (!config.basis_path.empty()) {
        basis = load_basis(config.basis_path);
        if (basis.rank() > config.rank) basis = truncate_basis(basis, config.rank);
        if (basis.rank() != config.rank) throw std::invalid_argument("run_solver: basis rank below requested rank");
      } else {
        basis = train_pod_basis(config, config.rank);
      }
      const ReducedOperators ops = build_reduced_operators(basis.W, config.params);
      out.offline_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      out.result = pod_rom_run(sim, basis, ops, observer);
      break;
    }
  }
  return out;
}

std::vector<SweepRow> rank_sweep(const RunConfig& config, const std::vector<std::size_t>& ranks, std::size_t threads) {
  if (ranks.empty()) throw std::invalid_argument("rank_sweep: empty rank list");
  if (config.solver != SolverKind::Pod && config.solver != SolverKind::Dlra) {
    throw std::invalid_argument("rank_sweep: solver must be pod or dlra");
  }
  for (std::size_t r : ranks) {
    RunConfig c = config;
    c.rank = r;
    c.validate();
  }
  SimulationConfig sim = config.simulation();
  sim.snapshot_stride = std::numeric_limits<std::size_t>::max();  // first and last frame only
  const RunResult reference = run_hswme(sim);
  const double fom_seconds = stepping_seconds(reference.report);

  ReducedBasis full;
  if (config.solver == SolverKind::Pod) {
    const std::size_t rmax = *std::max_element(ranks.begin(), ranks.end());
    full = config.basis_path.empty() ? train_pod_basis(config, rmax) : load_basis(config.basis_path);
    if (full.rank() < rmax) throw std::invalid_argument("rank_sweep: basis rank below the largest requested rank");
  }

  std::vector<SweepRow> rows(ranks.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  const auto worker = [&] {
    for (std::size_t i = next++; i < ranks.size(); i = next++) {
      try {
        const std::size_t r = ranks[i];
        RunResult res;
        if (config.solver == SolverKind::Pod) {
          const ReducedBasis b = truncate_basis(full, r);
          res = pod_rom_run(sim, b, build_reduced_operators(b.W, config.params));
        } else {
          res = dlra_run(sim, r);
        }
        const double secs = stepping_seconds(res.report);
        rows[i] = {r, relative_l2_error(res.trajectory, reference.trajectory), secs, fom_seconds / secs};
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::min(threads == 0 ? worker_threads() : threads, ranks.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return rows;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "rank,rel_l2_error,wall_seconds,speedup_vs_fom\n";
  for (const SweepRow& r : rows) os << r.rank << ',' << format_double(r.error) << ',' << format_double(r.wall_seconds) << ','
                                 << format_double(r.speedup) << '\n';
}

std::vector<BenchRow> bench(const RunConfig& config, std::size_t reps) {
  if (reps == 0) throw std::invalid_argument("bench: need at least one repetition");
  RunConfig c = config;
  c.solver = SolverKind::Pod;
  c.validate();
  SimulationConfig sim = c.simulation();
  sim.snapshot_stride = std::numeric_limits<std::size_t>::max();
  sim.keep_frames = false;

  BenchRow offline{"pod-offline", {}, 0.0, 0.0};
  const auto t0 = std::chrono::steady_clock::now();
  const ReducedBasis basis = c.basis_path.empty() ? train_pod_basis(c, c.rank) : truncate_basis(load_basis(c.basis_path), c.rank);
  const ReducedOperators ops = build_reduced_operators(basis.W, c.params);
  offline.seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());

  std::vector<BenchRow> rows{{"fom", {}, 0, 0}, {"dlra", {}, 0, 0}, {"swe", {}, 0, 0}, {"pod-online", {}, 0, 0}};
  for (std::size_t rep = 0; rep < reps; ++rep) {
    rows[0].seconds.push_back(stepping_seconds(run_hswme(sim).report));
    rows[1].seconds.push_back(stepping_seconds(dlra_run(sim, c.rank).report));
    rows[2].seconds.push_back(stepping_seconds(run_swe(sim).report));
    rows[3].seconds.push_back(stepping_seconds(pod_rom_run(sim, basis, ops).report));
  }
  rows.push_back(offline);
  for (BenchRow& r : rows) r.median = median(r.seconds);
  for (BenchRow& r : rows) r.speedup = rows[0].median / r.median;
  return rows;
}

void write_bench_csv(std::ostream& os, const std::vector<BenchRow>& rows) {
  os << "solver,median_seconds,speedup_vs_fom,repetitions\n";
  for (const BenchRow& r : rows) {
    os << r.solver << ',' << format_double(r.median) << ',' << format_double(r.speedup) << ',' << r.seconds.size() << '\n';
  }
}

}  // namespace hswme
