#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "subsketch/experiment.hpp"
#include "subsketch/io.hpp"
#include "subsketch/rng.hpp"

namespace {

using namespace subsketch;

int cmd_simulate(const std::string& config_path, const std::string& out,
                 std::uint64_t seed_override, bool has_seed) {
  ExperimentConfig cfg = load_config(config_path);
  const std::uint64_t seed = has_seed ? seed_override : cfg.seed;
  Rng rng(seed);
  const SamplerKind kind = cfg.sampler.phase_shift && !cfg.sampler.binary
                               ? SamplerKind::PhaseShift
                               : SamplerKind::BinarySelection;
  const SketchBatch batch =
      simulate_batch(cfg.profile, cfg.geometry, cfg.T_list.front(), cfg.m,
                     kind, cfg.sampler.bits, cfg.snr_db.front(), rng);
  save_batch(batch, cfg.geometry.M, out);
  std::printf("wrote %s: m=%d M=%d T=%d sigma=%.6g\n", out.c_str(), batch.m(),
              cfg.geometry.M, batch.T(), batch.noise_sigma);
  return 0;
}

int cmd_estimate(const std::string& batch_path, const std::string& config_path,
                 const std::string& out, const std::string& trace_path,
                 const std::string& weights_path) {
  ExperimentConfig cfg = load_config(config_path);
  int M = 0;
  const SketchBatch batch = load_batch(batch_path, &M);
  if (M != cfg.geometry.M)
    throw ConfigParse("batch antenna count does not match the config");
  const AngularGrid grid = build_grid(cfg.geometry, cfg.G);
  SolverConfig solver = cfg.solver;
  if (!trace_path.empty()) {
    solver.track_objective = true;
    solver.track_kkt = true;
  }
  const SolveResult res = run_fista(batch, grid, solver);
  save_matrix(res.W, out);
  std::printf("solved in %d iterations, kkt residual %.3e\n", res.iters,
              res.kkt);
  if (!trace_path.empty()) {
    CsvWriter trace(trace_path, {"iter", "objective", "kkt_residual"});
    for (std::size_t k = 0; k < res.objective_trace.size(); ++k)
      trace.row({CsvWriter::num(static_cast<int>(k)),
                 CsvWriter::num(res.objective_trace[k]),
                 CsvWriter::num(res.kkt_trace[k])});
  }
  if (!weights_path.empty()) {
    const RVector s = reconstruct_weights(res.W, batch.m());
    CsvWriter w(weights_path, {"index", "angle_deg", "weight"});
    for (int i = 0; i < grid.G; ++i)
      w.row({CsvWriter::num(i),
             CsvWriter::num(grid.angles[static_cast<std::size_t>(i)] * 180.0 /
                            std::numbers::pi),
             CsvWriter::num(s(i))});
  }
  return 0;
}

int cmd_svt(const std::string& batch_path, const std::string& config_path,
            const std::string& out) {
  SvtConfig svt;
  int M_cfg = 0;
  if (!config_path.empty()) {
    const ExperimentConfig cfg = load_config(config_path);
    svt = cfg.svt;
    M_cfg = cfg.geometry.M;
  }
  int M = 0;
  const SketchBatch batch = load_batch(batch_path, &M);
  if (M_cfg && M_cfg != M)
    throw ConfigParse("batch antenna count does not match the config");
  const CMatrix completed = svt_complete(batch.X, batch.operators, M, svt);
  save_matrix(svt_subspace(completed), out);
  std::printf("wrote covariance estimate %s (M=%d)\n", out.c_str(), M);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Subspace estimation and tracking from low-dimensional array sketches"};
  app.require_subcommand(1);

  std::string config_path, batch_path, out, trace_path, weights_path;
  std::uint64_t seed = 0;
  int threads = 0;
  bool full_fidelity = false;

  auto* simulate = app.add_subcommand("simulate", "Generate a sketch batch");
  simulate->add_option("--config", config_path, "JSON config")->required();
  simulate->add_option("--out", out, "Output batch file")->required();
  auto* sim_seed = simulate->add_option("--seed", seed, "Seed override");

  auto* estimate =
      app.add_subcommand("estimate", "Batch subspace estimation (FISTA)");
  estimate->add_option("--batch", batch_path, "Sketch batch file")->required();
  estimate->add_option("--config", config_path, "JSON config")->required();
  estimate->add_option("--out", out, "Output coefficient matrix")->required();
  estimate->add_option("--trace", trace_path, "Objective trace CSV");
  estimate->add_option("--weights", weights_path, "Grid weight CSV");

  auto* track = app.add_subcommand("track", "Sliding-window tracking run");
  track->add_option("config", config_path, "JSON config")->required();
  auto* track_out = track->add_option("--out", out, "Output stem");
  auto* track_seed = track->add_option("--seed", seed, "Seed override");
  track->add_option("--threads", threads, "Worker threads");

  auto* svt = app.add_subcommand("svt", "SVT matrix-completion baseline");
  svt->add_option("--batch", batch_path, "Sketch batch file")->required();
  svt->add_option("--config", config_path, "JSON config (svt section)");
  svt->add_option("--out", out, "Output covariance estimate")->required();

  auto* experiment =
      app.add_subcommand("experiment", "Run a configured experiment");
  experiment->add_option("config", config_path, "JSON config")->required();
  auto* exp_out = experiment->add_option("--out", out, "Output stem override");
  auto* exp_seed = experiment->add_option("--seed", seed, "Seed override");
  experiment->add_option("--threads", threads, "Worker threads");
  experiment->add_flag("--full-fidelity", full_fidelity,
                       "Raise trial count to 100");

  auto* selftest =
      app.add_subcommand("selftest", "Run the module property suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // usage problems are config errors
  }

  try {
    if (simulate->parsed())
      return cmd_simulate(config_path, out, seed, !sim_seed->empty());
    if (estimate->parsed())
      return cmd_estimate(batch_path, config_path, out, trace_path,
                          weights_path);
    if (svt->parsed()) return cmd_svt(batch_path, config_path, out);
    if (track->parsed() || experiment->parsed()) {
      ExperimentConfig cfg = load_config(config_path);
      if (track->parsed()) cfg.kind = ExperimentKind::Tracking;
      if (experiment->parsed() && !exp_seed->empty()) cfg.seed = seed;
      if (track->parsed() && !track_seed->empty()) cfg.seed = seed;
      if (experiment->parsed() && !exp_out->empty()) cfg.out = out;
      if (track->parsed() && !track_out->empty()) cfg.out = out;
      if (threads > 0) cfg.threads = threads;
      if (full_fidelity) cfg.trials = std::max(cfg.trials, 100);
      return run_experiment(cfg);
    }
    if (selftest->parsed())
      return run_property_suite(std::cout) ? 0 : 2;
  } catch (const ConfigParse& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
