// Command line front end: eigenvalue solves, direct simulation, energy
// ascent, and the scripted experiments, each writing its outputs plus a run
// manifest into a target directory.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "CLI11.hpp"
#include "json.hpp"
#include "vorstab/bessel.hpp"
#include "vorstab/experiments.hpp"
#include "vorstab/rearrange.hpp"
#include "vorstab/spectra.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace vorstab;

namespace {

constexpr const char* kVersion = "vorstab 1.0.0";

// Exit codes shared with the scripted experiments: 0 success, 1 bad flags or
// config, 2 experiment failure, 3 invalidated experiment, 4 solver failure,
// 5 simulation aborted on non-finite values.
enum ExitCode : int {
  kOk = 0,
  kBadInput = 1,
  kExperimentFail = 2,
  kExperimentInvalid = 3,
  kSolverFailure = 4,
  kNanAbort = 5,
};

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)v);
  return buf;
}

std::string slurp_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Manifest {
  std::string command;
  std::string config_hash;
  json grid = json::object();
  json tolerances = json::object();
  std::vector<std::string> outputs;
};

// The manifest lands last, through a rename, so a manifest.json in a run
// directory certifies that every listed output was fully written.
void write_manifest(const std::string& dir, const Manifest& m,
                    double wall_seconds) {
  json j;
  j["command"] = m.command;
  j["config_hash"] = m.config_hash;
  j["grid"] = m.grid;
  j["tolerances"] = m.tolerances;
  j["outputs"] = m.outputs;
  j["wall_time_s"] = wall_seconds;
  const fs::path final_path = fs::path(dir) / "manifest.json";
  const fs::path tmp_path = fs::path(dir) / "manifest.json.tmp";
  {
    std::ofstream out(tmp_path);
    if (!out) throw std::runtime_error("cannot write " + tmp_path.string());
    out << j.dump(2) << "\n";
  }
  fs::rename(tmp_path, final_path);
}

std::string joined_command(int argc, char** argv) {
  std::string out;
  for (int i = 0; i < argc; ++i) {
    if (i) out += ' ';
    out += argv[i];
  }
  return out;
}

struct Timer {
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
        .count();
  }
};

// ---------------------------------------------------------------------------
// eig

struct EigArgs {
  std::string domain = "disk";
  Real a = Real(0.5);
  Index nr = 0;
  Index ntheta = 0;
  int count = 4;
  std::string which = "dirichlet";
  std::string out;
};

int cmd_eig(const EigArgs& args, const std::string& command) {
  Timer timer;
  std::optional<Grid> grid;
  try {
    const Real a = args.domain == "disk" ? Real(0) : args.a;
    grid.emplace(a, args.nr, args.ntheta);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "eig: %s\n", e.what());
    return kBadInput;
  }
  const Grid& g = *grid;

  fs::create_directories(args.out);
  Manifest manifest;
  manifest.command = command;
  std::ostringstream canon;
  canon << args.domain << ' ' << g.a() << ' ' << args.nr << ' ' << args.ntheta
        << ' ' << args.count << ' ' << args.which;
  manifest.config_hash = hex64(fnv1a64(canon.str()));
  manifest.grid = {{"a", g.a()}, {"nr", args.nr}, {"ntheta", args.ntheta}};

  json result;
  result["domain"] = args.domain;
  result["a"] = g.a();
  result["nr"] = args.nr;
  result["ntheta"] = args.ntheta;
  result["which"] = args.which;
  result["groups"] = json::array();
  std::vector<Real> flat;

  try {
    EllipticContext ctx(g);
    auto save_field = [&](const ScalarField& f, int index) {
      char name[32];
      std::snprintf(name, sizeof name, "mode_%d.csv", index);
      const std::string path = (fs::path(args.out) / name).string();
      write_field_csv(path, g, f);
      manifest.outputs.push_back(path);
      return std::string(name);
    };
    if (args.which == "cap") {
      const CapResult cap = lambda_cap1(ctx);
      flat.push_back(cap.value);
      result["groups"].push_back(
          {{"value", cap.value},
           {"multiplicity", 1},
           {"sector", cap.sector},
           {"one_signed", cap.one_signed},
           {"fields", {save_field(cap.minimizer, 0)}}});
    } else {
      const EigenResult spec = args.which == "constrained"
                                   ? constrained_spectrum(ctx, args.count)
                                   : dirichlet_spectrum(ctx, args.count);
      int index = 0;
      for (const EigenGroup& grp : spec.groups) {
        json fields = json::array();
        for (const ScalarField& f : grp.fields) {
          fields.push_back(save_field(f, index++));
          flat.push_back(grp.value);
        }
        result["groups"].push_back({{"value", grp.value},
                                    {"spread", grp.spread},
                                    {"multiplicity", grp.multiplicity},
                                    {"fields", fields}});
      }
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "eig: solve failed: %s\n", e.what());
    return kSolverFailure;
  }

  result["eigenvalues"] = flat;
  const std::string rpath = (fs::path(args.out) / "eigen.json").string();
  {
    std::ofstream out(rpath);
    out << result.dump(2) << "\n";
  }
  manifest.outputs.push_back(rpath);
  write_manifest(args.out, manifest, timer.seconds());
  for (const Real v : flat) std::printf("%.12g\n", v);
  return kOk;
}

// ---------------------------------------------------------------------------
// simulate

ScalarField build_field(const Grid& g, const json& j, const char* role) {
  const std::string kind = j.value("kind", "");
  if (kind == "csv") {
    if (!j.contains("path"))
      throw std::invalid_argument(std::string(role) + ": csv needs a path");
    return read_field_csv(j["path"].get<std::string>(), g);
  }
  if (kind == "rotating-wave")
    return rotating_wave(g, j.value("n", 4), j.value("t", Real(0)));
  if (kind == "radial-ground")
    return sample_with(g,
                       [](Real r, Real) { return bessel_j(0, j0_zero1 * r); });
  if (kind == "harmonic")
    return sample_with(g, [](Real r, Real th) {
      return bessel_j(1, j1_zero1 * r) * std::cos(th);
    });
  throw std::invalid_argument(std::string(role) +
                              ": unknown field kind '" + kind + "'");
}

int cmd_simulate(const std::string& config_path, const std::string& out_arg,
                 const std::string& command) {
  Timer timer;
  std::string config_bytes;
  json cfg_json;
  std::string out_dir = out_arg;
  std::optional<Grid> grid;
  SimConfig cfg;
  ScalarField w0, reference;
  bool has_reference = false;
  Real ref_p = 2;
  bool write_snapshots = false;
  try {
    config_bytes = slurp_file(config_path);
    cfg_json = json::parse(config_bytes);

    grid.emplace(cfg_json.value("a", Real(0)), cfg_json.value("nr", Index(48)),
                 cfg_json.value("ntheta", Index(96)));
    const Grid& g = *grid;

    const std::vector<Real> gv =
        cfg_json.value("gamma", std::vector<Real>(g.n_boundaries() - 1, 0));
    if (Index(gv.size()) != g.n_boundaries() - 1)
      throw std::invalid_argument("simulate: gamma needs " +
                                  std::to_string(g.n_boundaries() - 1) +
                                  " entries for this domain");
    cfg.gamma = CirculationVector(gv.size());
    for (size_t i = 0; i < gv.size(); ++i) cfg.gamma[i] = gv[i];
    cfg.t_end = cfg_json.value("t_end", Real(1));
    cfg.dt = cfg_json.value("dt", Real(0));
    cfg.cfl = cfg_json.value("cfl", Real(0.5));
    cfg.snapshot_stride = cfg_json.value("snapshot_stride", Index(0));
    cfg.hyperdiffusion = cfg_json.value("hyperdiffusion", Real(0));
    ref_p = cfg_json.value("p", Real(2));
    write_snapshots = cfg_json.value("write_snapshots", false);
    if (out_dir.empty()) out_dir = cfg_json.value("out_dir", "");
    if (out_dir.empty())
      throw std::invalid_argument("simulate: no output directory given");

    if (!cfg_json.contains("initial"))
      throw std::invalid_argument("simulate: config needs an initial field");
    w0 = build_field(g, cfg_json["initial"], "initial");
    if (cfg_json.contains("reference")) {
      reference = build_field(g, cfg_json["reference"], "reference");
      has_reference = true;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "simulate: %s\n", e.what());
    return kBadInput;
  }
  const Grid& g = *grid;

  fs::create_directories(out_dir);
  Manifest manifest;
  manifest.command = command;
  manifest.config_hash = hex64(fnv1a64(config_bytes));
  manifest.grid = {{"a", g.a()}, {"nr", g.nr()}, {"ntheta", g.ntheta()}};
  manifest.tolerances = {{"cfl", cfg.cfl}, {"dt", cfg.dt}};

  try {
    EllipticContext ctx(g);
    int snap_index = 0;
    const RunResult rr = run(
        ctx, cfg, w0, has_reference ? &reference : nullptr, ref_p,
        [&](const SimState& s, const SimRecord&) {
          if (!write_snapshots) return;
          char name[32];
          std::snprintf(name, sizeof name, "snap_%06d.csv", snap_index++);
          const std::string path = (fs::path(out_dir) / name).string();
          write_field_csv(path, g, s.omega);
          manifest.outputs.push_back(path);
        });

    const std::string series = (fs::path(out_dir) / "series.csv").string();
    write_time_series(series, rr.series);
    manifest.outputs.push_back(series);
    const std::string final_path = (fs::path(out_dir) / "final.csv").string();
    write_field_csv(final_path, g, rr.state.omega);
    manifest.outputs.push_back(final_path);

    json summary;
    summary["steps"] = rr.steps;
    summary["dt_used"] = rr.dt_used;
    summary["t_final"] = rr.state.t;
    summary["records"] = rr.series.records.size();
    const std::string spath = (fs::path(out_dir) / "summary.json").string();
    {
      std::ofstream out(spath);
      out << summary.dump(2) << "\n";
    }
    manifest.outputs.push_back(spath);
  } catch (const std::runtime_error& e) {
    // Blowups surface here; the partial outputs stay, the manifest does not.
    std::fprintf(stderr, "simulate: %s\n", e.what());
    return kNanAbort;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "simulate: %s\n", e.what());
    return kBadInput;
  }
  write_manifest(out_dir, manifest, timer.seconds());
  return kOk;
}

// ---------------------------------------------------------------------------
// ascend

int cmd_ascend(const std::string& seed_path, std::vector<Real> gamma_arg,
               const std::string& out_dir, int max_iters,
               const std::string& command) {
  Timer timer;
  std::optional<Grid> grid;
  ScalarField seed;
  CirculationVector gamma;
  try {
    auto loaded = read_field_csv(seed_path);
    grid.emplace(loaded.first);
    seed = std::move(loaded.second);
    const Grid& g = *grid;
    // A single 0 on a disk is the natural spelling of "no circulation".
    if (g.is_disk() && gamma_arg.size() == 1 && gamma_arg[0] == 0)
      gamma_arg.clear();
    if (Index(gamma_arg.size()) != g.n_boundaries() - 1)
      throw std::invalid_argument("ascend: gamma needs " +
                                  std::to_string(g.n_boundaries() - 1) +
                                  " entries for this domain");
    gamma = CirculationVector(gamma_arg.size());
    for (size_t i = 0; i < gamma_arg.size(); ++i) gamma[i] = gamma_arg[i];
  } catch (const std::exception& e) {
    std::fprintf(stderr, "ascend: %s\n", e.what());
    return kBadInput;
  }
  const Grid& g = *grid;

  fs::create_directories(out_dir);
  Manifest manifest;
  manifest.command = command;
  manifest.config_hash = hex64(fnv1a64(slurp_file(seed_path)));
  manifest.grid = {{"a", g.a()}, {"nr", g.nr()}, {"ntheta", g.ntheta()}};

  try {
    EllipticContext ctx(g);
    const AscentReport report = burton_ascent(ctx, seed, gamma, max_iters);

    const std::string fpath = (fs::path(out_dir) / "final.csv").string();
    write_field_csv(fpath, g, report.final_field);
    manifest.outputs.push_back(fpath);

    json j;
    j["iterations"] = report.iterations;
    j["termination"] = report.termination;
    j["residual"] = report.residual;
    j["energies"] = report.energies;
    j["final_field"] = "final.csv";
    const std::string rpath = (fs::path(out_dir) / "ascent.json").string();
    {
      std::ofstream out(rpath);
      out << j.dump(2) << "\n";
    }
    manifest.outputs.push_back(rpath);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "ascend: %s\n", e.what());
    return kSolverFailure;
  }
  write_manifest(out_dir, manifest, timer.seconds());
  return kOk;
}

// ---------------------------------------------------------------------------
// experiment

int cmd_experiment(const std::string& config_path, const std::string& out_arg,
                   const std::string& command) {
  Timer timer;
  ExperimentSpec spec;
  std::string config_bytes;
  try {
    config_bytes = slurp_file(config_path);
    spec = spec_from_json(config_path);
    if (!out_arg.empty()) spec.out_dir = out_arg;
    validate(spec);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "experiment: %s\n", e.what());
    return kBadInput;
  }

  fs::create_directories(spec.out_dir);
  Manifest manifest;
  manifest.command = command;
  manifest.config_hash = hex64(fnv1a64(config_bytes));
  manifest.grid = {{"a", spec.a}, {"nr", spec.nr}, {"ntheta", spec.ntheta}};
  manifest.tolerances = {{"response_factor", spec.response_factor},
                         {"drift_tol", spec.drift_tol},
                         {"mean_tol", spec.mean_tol}};

  ExperimentReport report;
  try {
    report = run_experiment(spec);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "experiment: %s\n", e.what());
    return kSolverFailure;
  }
  const std::string rpath = (fs::path(spec.out_dir) / "report.json").string();
  write_report_json(rpath, report);
  manifest.outputs = report.outputs;
  manifest.outputs.push_back(rpath);
  write_manifest(spec.out_dir, manifest, timer.seconds());

  for (const auto& c : report.criteria)
    std::printf("%-40s %s\n", c.name.c_str(),
                c.invalid ? "INVALID" : (c.pass ? "PASS" : "FAIL"));
  return report.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* threads = std::getenv("VORSTAB_THREADS")) {
    const int n = std::atoi(threads);
    if (n > 0) Eigen::setNbThreads(n);
  }

  CLI::App app{"Vorticity stability laboratory on disk and annulus domains"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  EigArgs eig;
  CLI::App* cmd_e = app.add_subcommand("eig", "Eigenvalue solves");
  cmd_e->add_option("--domain", eig.domain, "disk or annulus")
      ->check(CLI::IsMember({"disk", "annulus"}));
  cmd_e->add_option("--a", eig.a, "inner radius (annulus only)");
  cmd_e->add_option("--nr", eig.nr, "radial cells")->required();
  cmd_e->add_option("--ntheta", eig.ntheta, "angular cells")->required();
  cmd_e->add_option("--count", eig.count, "eigenvalue clusters to compute");
  cmd_e->add_option("--which", eig.which,
                    "dirichlet, cap, or constrained spectrum")
      ->check(CLI::IsMember({"dirichlet", "cap", "constrained"}));
  cmd_e->add_option("--out", eig.out, "output directory")->required();

  std::string sim_config, sim_out;
  CLI::App* cmd_s = app.add_subcommand("simulate", "Integrate the flow");
  cmd_s->add_option("--config", sim_config, "JSON configuration")->required();
  cmd_s->add_option("--out", sim_out, "output directory (overrides config)");

  std::string asc_seed, asc_out;
  std::vector<Real> asc_gamma;
  int asc_iters = 500;
  CLI::App* cmd_a = app.add_subcommand("ascend", "Energy ascent over a rearrangement class");
  cmd_a->add_option("--seed", asc_seed, "seed field CSV")->required();
  cmd_a->add_option("--gamma", asc_gamma, "wall circulations")
      ->expected(-1)
      ->required();
  cmd_a->add_option("--out", asc_out, "output directory")->required();
  cmd_a->add_option("--max-iters", asc_iters, "iteration cap");

  std::string exp_config, exp_out;
  CLI::App* cmd_x = app.add_subcommand("experiment", "Run a scripted experiment");
  cmd_x->add_option("--config", exp_config, "JSON experiment spec")->required();
  cmd_x->add_option("--out", exp_out, "output directory (overrides config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kBadInput;
  }

  const std::string command = joined_command(argc, argv);
  if (cmd_e->parsed()) return cmd_eig(eig, command);
  if (cmd_s->parsed()) return cmd_simulate(sim_config, sim_out, command);
  if (cmd_a->parsed())
    return cmd_ascend(asc_seed, asc_gamma, asc_out, asc_iters, command);
  return cmd_experiment(exp_config, exp_out, command);
}
