#include "subsketch/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "subsketch/errors.hpp"
#include "subsketch/io.hpp"
#include "subsketch/rng.hpp"

namespace subsketch {

namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

// Index-stable parallel loop; results must be written to preallocated slots
// so scheduling never affects output.
void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex err_mtx;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mtx);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

void ensure_parent_dir(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (parent.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(parent, ec);
  if (ec) throw OutputUnwritable("cannot create directory " + parent.string());
}

struct Stats {
  double mean = 0.0;
  double stderr_mean = 0.0;
};

Stats mean_stderr(const std::vector<double>& xs) {
  Stats s;
  const double n = static_cast<double>(xs.size());
  if (xs.empty()) return s;
  for (double x : xs) s.mean += x;
  s.mean /= n;
  if (xs.size() > 1) {
    double var = 0.0;
    for (double x : xs) var += (x - s.mean) * (x - s.mean);
    var /= (n - 1.0);
    s.stderr_mean = std::sqrt(var / n);
  }
  return s;
}

}  // namespace

double sigma_for_snr(const ScatteringProfile& profile, double snr_db) {
  const double snr = std::pow(10.0, snr_db / 10.0);
  return std::sqrt(profile.total_power() / snr);
}

SketchBatch simulate_batch(const ScatteringProfile& profile,
                           const ArrayGeometry& geom, int T, int m,
                           SamplerKind kind, int bits, double snr_db,
                           Rng& rng) {
  if (T < 1) throw InvalidDim("simulate_batch: T must be >= 1");
  const double sigma = sigma_for_snr(profile, snr_db);
  SketchBatch batch;
  batch.noise_sigma = sigma;
  batch.X.resize(m, T);
  batch.operators.reserve(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) {
    SamplingOperator op = kind == SamplerKind::BinarySelection
                              ? draw_selection(m, geom.M, rng)
                              : draw_phase_shift(m, geom.M, bits, rng);
    const CVector h = sample_channel(profile, geom, rng);
    batch.X.col(t) = make_sketch(h, op, sigma, rng);
    batch.operators.push_back(std::move(op));
  }
  return batch;
}

GammaTrial estimation_trial(const ScatteringProfile& profile,
                            const AngularGrid& grid, const CMatrix& S_true,
                            int T, int m, SamplerKind kind, int bits,
                            double snr_db, const SolverConfig& solver,
                            std::uint64_t seed) {
  Rng rng(seed);
  const SketchBatch batch =
      simulate_batch(profile, grid.geometry, T, m, kind, bits, snr_db, rng);
  const auto t0 = Clock::now();
  const SolveResult res = run_fista(batch, grid, solver);
  GammaTrial out;
  out.runtime_ms = ms_since(t0);
  out.iters = res.iters;
  out.gamma =
      gamma_of_weights(S_true, grid, reconstruct_weights(res.W, m));
  return out;
}

TrackingTrace tracking_trial(const ScatteringProfile& before,
                             const ScatteringProfile& after,
                             const AngularGrid& grid, int window, int m,
                             SamplerKind kind, int bits, double snr_db,
                             int t_transition, int horizon, int k_inner,
                             int support_q, bool log_kkt, bool log_strengths,
                             std::uint64_t seed) {
  Rng rng(seed);
  const ArrayGeometry& geom = grid.geometry;
  const CMatrix S_before = true_covariance(before, geom);
  const CMatrix S_after = true_covariance(after, geom);
  const double sigma_before = sigma_for_snr(before, snr_db);
  const double sigma_after = sigma_for_snr(after, snr_db);

  TrackerConfig tc;
  tc.window = window;
  tc.k_inner = k_inner;
  Tracker tracker(grid, tc);

  TrackingTrace trace;
  trace.gamma.reserve(static_cast<std::size_t>(horizon));
  if (log_strengths) trace.strengths.resize(horizon, grid.G);
  for (int t = 1; t <= horizon; ++t) {
    const bool switched = t >= t_transition;
    const ScatteringProfile& profile = switched ? after : before;
    const CMatrix& S_true = switched ? S_after : S_before;
    const double sigma = switched ? sigma_after : sigma_before;
    SamplingOperator op = kind == SamplerKind::BinarySelection
                              ? draw_selection(m, geom.M, rng)
                              : draw_phase_shift(m, geom.M, bits, rng);
    const CVector h = sample_channel(profile, geom, rng);
    const CVector x = make_sketch(h, op, sigma, rng);
    const RVector s = tracker.push(x, op);
    trace.gamma.push_back(gamma_of_weights(S_true, grid, s));
    if (log_kkt) trace.kkt.push_back(tracker.kkt());
    auto [idx, strength] = dominant_support(tracker.W(), support_q);
    trace.support.push_back(std::move(idx));
    if (log_strengths) trace.strengths.row(t - 1) = strength.transpose();
  }
  return trace;
}

SvtTrial svt_trial(const ScatteringProfile& profile, const ArrayGeometry& geom,
                   const CMatrix& S_true, int T, int m, double snr_db,
                   const SvtConfig& config, std::uint64_t seed) {
  Rng rng(seed);
  const SketchBatch batch = simulate_batch(
      profile, geom, T, m, SamplerKind::BinarySelection, 0, snr_db, rng);
  const auto t0 = Clock::now();
  const CMatrix completed =
      svt_complete(batch.X, batch.operators, geom.M, config);
  const CMatrix S_hat = svt_subspace(completed);
  SvtTrial out;
  out.runtime_ms = ms_since(t0);
  out.gamma = gamma_of_estimate(S_true, S_hat);
  return out;
}

// --- Config parsing ---------------------------------------------------------

namespace {

ScatteringProfile parse_profile(const json& j) {
  if (j.contains("band_deg")) {
    const auto band = j.at("band_deg");
    if (!band.is_array() || band.size() != 2)
      throw ConfigParse("profile.band_deg must be [lo, hi]");
    return ScatteringProfile::band(deg2rad(band[0].get<double>()),
                                   deg2rad(band[1].get<double>()),
                                   j.value("power", 1.0),
                                   j.value("points", 100));
  }
  if (j.contains("components")) {
    std::vector<Scatterer> comps;
    for (const auto& c : j.at("components"))
      comps.push_back(
          {deg2rad(c.at("angle_deg").get<double>()),
           c.at("power").get<double>()});
    return ScatteringProfile::points(std::move(comps));
  }
  throw ConfigParse("profile needs band_deg or components");
}

ExperimentKind parse_kind(const std::string& name) {
  if (name == "gamma_vs_snr") return ExperimentKind::GammaVsSnr;
  if (name == "svt_compare") return ExperimentKind::SvtCompare;
  if (name == "tracking") return ExperimentKind::Tracking;
  if (name == "support_image") return ExperimentKind::SupportImage;
  if (name == "property_suite") return ExperimentKind::PropertySuite;
  throw ConfigParse("unknown experiment \"" + name + "\"");
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  try {
    const json j = json::parse(json_text);
    ExperimentConfig cfg;
    cfg.kind = parse_kind(j.at("experiment").get<std::string>());
    cfg.seed = j.value("seed", cfg.seed);
    cfg.trials = j.value("trials", cfg.trials);
    cfg.threads = j.value("threads", cfg.threads);
    cfg.out = j.value("out", cfg.out);
    if (cfg.trials < 1) throw ConfigParse("trials must be >= 1");

    if (j.contains("geometry")) {
      const auto& g = j.at("geometry");
      const std::string kind = g.value("kind", std::string("ula"));
      if (kind != "ula")
        throw ConfigParse("experiment configs support ULA geometries");
      cfg.geometry = ArrayGeometry::ula(
          g.at("M").get<int>(), deg2rad(g.at("theta_max_deg").get<double>()));
    }
    if (j.contains("grid")) cfg.G = j.at("grid").value("G", cfg.G);
    if (j.contains("profile")) cfg.profile = parse_profile(j.at("profile"));
    if (j.contains("snr_db"))
      cfg.snr_db = j.at("snr_db").get<std::vector<double>>();
    if (j.contains("T")) cfg.T_list = j.at("T").get<std::vector<int>>();
    cfg.m = j.value("m", cfg.m);
    if (j.contains("sampler")) {
      const auto& s = j.at("sampler");
      const std::string kind = s.value("kind", std::string("binary"));
      if (kind == "binary") {
        cfg.sampler.binary = true;
        cfg.sampler.phase_shift = false;
      } else if (kind == "phase_shift") {
        cfg.sampler.binary = false;
        cfg.sampler.phase_shift = true;
      } else if (kind == "both") {
        cfg.sampler.binary = true;
        cfg.sampler.phase_shift = true;
      } else {
        throw ConfigParse("sampler.kind must be binary, phase_shift or both");
      }
      cfg.sampler.bits = s.value("bits", cfg.sampler.bits);
    }
    if (j.contains("solver")) {
      const auto& s = j.at("solver");
      cfg.solver.max_iters = s.value("max_iters", cfg.solver.max_iters);
      cfg.solver.rel_tol = s.value("rel_tol", cfg.solver.rel_tol);
      cfg.solver.relaxation = s.value("relaxation", cfg.solver.relaxation);
      cfg.solver.alpha_scale = s.value("alpha_scale", cfg.solver.alpha_scale);
    }
    if (j.contains("tracking")) {
      const auto& t = j.at("tracking");
      cfg.t_transition = t.value("t_transition", cfg.t_transition);
      cfg.horizon = t.value("horizon", cfg.horizon);
      cfg.k_inner = t.value("k_inner", cfg.k_inner);
      cfg.support_q = t.value("support_q", cfg.support_q);
      cfg.log_kkt = t.value("log_kkt", cfg.log_kkt);
      if (t.contains("profile_after"))
        cfg.profile_after = parse_profile(t.at("profile_after"));
    }
    if (j.contains("svt")) {
      const auto& s = j.at("svt");
      if (s.contains("T")) cfg.svt_T_list = s.at("T").get<std::vector<int>>();
      cfg.svt_m = s.value("m", cfg.svt_m);
      cfg.svt.tau = s.value("tau", cfg.svt.tau);
      cfg.svt.delta = s.value("delta", cfg.svt.delta);
      cfg.svt.max_iters = s.value("max_iters", cfg.svt.max_iters);
      cfg.svt.tol = s.value("tol", cfg.svt.tol);
      if (s.contains("solver_T"))
        cfg.solver_T_list = s.at("solver_T").get<std::vector<int>>();
    }
    return cfg;
  } catch (const ConfigParse&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigParse(std::string("config: ") + e.what());
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigParse("cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

// --- Experiment drivers ------------------------------------------------------

namespace {

std::string sampler_name(SamplerKind kind) {
  return kind == SamplerKind::BinarySelection ? "bin" : "ps";
}

int run_gamma_vs_snr(const ExperimentConfig& cfg) {
  const AngularGrid grid = build_grid(cfg.geometry, cfg.G);
  const CMatrix S_true = true_covariance(cfg.profile, cfg.geometry);
  std::vector<SamplerKind> kinds;
  if (cfg.sampler.binary) kinds.push_back(SamplerKind::BinarySelection);
  if (cfg.sampler.phase_shift) kinds.push_back(SamplerKind::PhaseShift);

  struct Cell {
    SamplerKind kind;
    int T;
    double snr;
  };
  std::vector<Cell> cells;
  for (auto kind : kinds)
    for (int T : cfg.T_list)
      for (double snr : cfg.snr_db) cells.push_back({kind, T, snr});

  const int n = static_cast<int>(cells.size()) * cfg.trials;
  std::vector<GammaTrial> results(static_cast<std::size_t>(n));
  parallel_for(n, resolve_threads(cfg.threads), [&](int i) {
    const int cell = i / cfg.trials;
    const int trial = i % cfg.trials;
    const Cell& c = cells[static_cast<std::size_t>(cell)];
    results[static_cast<std::size_t>(i)] = estimation_trial(
        cfg.profile, grid, S_true, c.T, cfg.m, c.kind, cfg.sampler.bits,
        c.snr, cfg.solver,
        derive_seed(cfg.seed, static_cast<std::uint64_t>(cell),
                    static_cast<std::uint64_t>(trial)));
  });

  ensure_parent_dir(cfg.out);
  CsvWriter csv(cfg.out + ".csv",
                {"sampler", "T", "snr_db", "trial", "gamma", "iters",
                 "runtime_ms"});
  CsvWriter summary(cfg.out + "_summary.csv",
                    {"sampler", "T", "snr_db", "trials", "mean_gamma",
                     "stderr_gamma"});
  for (std::size_t cell = 0; cell < cells.size(); ++cell) {
    const Cell& c = cells[cell];
    std::vector<double> gammas;
    for (int trial = 0; trial < cfg.trials; ++trial) {
      const auto& r = results[cell * static_cast<std::size_t>(cfg.trials) +
                              static_cast<std::size_t>(trial)];
      csv.row({sampler_name(c.kind), CsvWriter::num(c.T),
               CsvWriter::num(c.snr), CsvWriter::num(trial),
               CsvWriter::num(r.gamma), CsvWriter::num(r.iters),
               CsvWriter::num(r.runtime_ms)});
      gammas.push_back(r.gamma);
    }
    const Stats s = mean_stderr(gammas);
    summary.row({sampler_name(c.kind), CsvWriter::num(c.T),
                 CsvWriter::num(c.snr), CsvWriter::num(cfg.trials),
                 CsvWriter::num(s.mean), CsvWriter::num(s.stderr_mean)});
  }
  return 0;
}

int run_svt_compare(const ExperimentConfig& cfg) {
  const AngularGrid grid = build_grid(cfg.geometry, cfg.G);
  const CMatrix S_true = true_covariance(cfg.profile, cfg.geometry);

  struct Variant {
    bool svt;
    int T;
    int m;
  };
  std::vector<Variant> variants;
  for (int T : cfg.solver_T_list) variants.push_back({false, T, cfg.m});
  for (int T : cfg.svt_T_list) variants.push_back({true, T, cfg.svt_m});

  struct Cell {
    Variant v;
    double snr;
  };
  std::vector<Cell> cells;
  for (const auto& v : variants)
    for (double snr : cfg.snr_db) cells.push_back({v, snr});

  const int n = static_cast<int>(cells.size()) * cfg.trials;
  std::vector<double> gamma(static_cast<std::size_t>(n), 0.0);
  std::vector<double> runtime(static_cast<std::size_t>(n), 0.0);
  parallel_for(n, resolve_threads(cfg.threads), [&](int i) {
    const int cell = i / cfg.trials;
    const int trial = i % cfg.trials;
    const Cell& c = cells[static_cast<std::size_t>(cell)];
    const std::uint64_t seed =
        derive_seed(cfg.seed, static_cast<std::uint64_t>(cell),
                    static_cast<std::uint64_t>(trial));
    if (c.v.svt) {
      const SvtTrial r = svt_trial(cfg.profile, cfg.geometry, S_true, c.v.T,
                                   c.v.m, c.snr, cfg.svt, seed);
      gamma[static_cast<std::size_t>(i)] = r.gamma;
      runtime[static_cast<std::size_t>(i)] = r.runtime_ms;
    } else {
      const GammaTrial r = estimation_trial(
          cfg.profile, grid, S_true, c.v.T, c.v.m,
          SamplerKind::BinarySelection, 0, c.snr, cfg.solver, seed);
      gamma[static_cast<std::size_t>(i)] = r.gamma;
      runtime[static_cast<std::size_t>(i)] = r.runtime_ms;
    }
  });

  ensure_parent_dir(cfg.out);
  CsvWriter csv(cfg.out + ".csv",
                {"algo", "T", "rho", "snr_db", "trial", "gamma",
                 "runtime_ms"});
  CsvWriter summary(cfg.out + "_summary.csv",
                    {"algo", "T", "rho", "snr_db", "trials", "mean_gamma",
                     "stderr_gamma"});
  const double M = static_cast<double>(cfg.geometry.M);
  for (std::size_t cell = 0; cell < cells.size(); ++cell) {
    const Cell& c = cells[cell];
    const std::string algo = c.v.svt ? "svt" : "fista";
    std::vector<double> gs;
    for (int trial = 0; trial < cfg.trials; ++trial) {
      const std::size_t i =
          cell * static_cast<std::size_t>(cfg.trials) +
          static_cast<std::size_t>(trial);
      csv.row({algo, CsvWriter::num(c.v.T), CsvWriter::num(c.v.m / M),
               CsvWriter::num(c.snr), CsvWriter::num(trial),
               CsvWriter::num(gamma[i]), CsvWriter::num(runtime[i])});
      gs.push_back(gamma[i]);
    }
    const Stats s = mean_stderr(gs);
    summary.row({algo, CsvWriter::num(c.v.T), CsvWriter::num(c.v.m / M),
                 CsvWriter::num(c.snr), CsvWriter::num(cfg.trials),
                 CsvWriter::num(s.mean), CsvWriter::num(s.stderr_mean)});
  }
  return 0;
}

int run_tracking(const ExperimentConfig& cfg, bool support_image) {
  const AngularGrid grid = build_grid(cfg.geometry, cfg.G);
  const std::vector<int> T_list =
      support_image ? std::vector<int>{cfg.T_list.front()} : cfg.T_list;
  const std::vector<double> snr_list =
      support_image ? std::vector<double>{cfg.snr_db.front()} : cfg.snr_db;
  const int trials = support_image ? 1 : cfg.trials;

  struct Cell {
    int T;
    double snr;
  };
  std::vector<Cell> cells;
  for (int T : T_list)
    for (double snr : snr_list) cells.push_back({T, snr});

  const int n = static_cast<int>(cells.size()) * trials;
  std::vector<TrackingTrace> traces(static_cast<std::size_t>(n));
  parallel_for(n, resolve_threads(cfg.threads), [&](int i) {
    const int cell = i / trials;
    const int trial = i % trials;
    const Cell& c = cells[static_cast<std::size_t>(cell)];
    traces[static_cast<std::size_t>(i)] = tracking_trial(
        cfg.profile, cfg.profile_after, grid, c.T, cfg.m,
        SamplerKind::BinarySelection, cfg.sampler.bits, c.snr,
        cfg.t_transition, cfg.horizon, cfg.k_inner, cfg.support_q,
        cfg.log_kkt, support_image,
        derive_seed(cfg.seed, static_cast<std::uint64_t>(cell),
                    static_cast<std::uint64_t>(trial)));
  });

  ensure_parent_dir(cfg.out);
  std::vector<std::string> header = {"T",     "snr_db", "trial",
                                     "t",     "gamma",  "kkt_residual"};
  for (int k = 0; k < cfg.support_q; ++k)
    header.push_back("support_" + std::to_string(k + 1));
  CsvWriter csv(cfg.out + ".csv", header);
  for (std::size_t cell = 0; cell < cells.size(); ++cell) {
    const Cell& c = cells[cell];
    for (int trial = 0; trial < trials; ++trial) {
      const auto& trace = traces[cell * static_cast<std::size_t>(trials) +
                                 static_cast<std::size_t>(trial)];
      for (std::size_t step = 0; step < trace.gamma.size(); ++step) {
        std::vector<std::string> row = {
            CsvWriter::num(c.T), CsvWriter::num(c.snr), CsvWriter::num(trial),
            CsvWriter::num(static_cast<int>(step) + 1),
            CsvWriter::num(trace.gamma[step]),
            CsvWriter::num(trace.kkt.empty() ? 0.0 : trace.kkt[step])};
        for (int k = 0; k < cfg.support_q; ++k)
          row.push_back(CsvWriter::num(trace.support[step][
              static_cast<std::size_t>(k)]));
        csv.row(row);
      }
    }
  }

  if (support_image) {
    std::vector<std::string> wide = {"t"};
    for (int g = 0; g < grid.G; ++g)
      wide.push_back("strength_" + std::to_string(g));
    CsvWriter image(cfg.out + "_strengths.csv", wide);
    const auto& trace = traces.front();
    for (int step = 0; step < trace.strengths.rows(); ++step) {
      std::vector<std::string> row = {CsvWriter::num(step + 1)};
      for (int g = 0; g < grid.G; ++g)
        row.push_back(CsvWriter::num(trace.strengths(step, g)));
      image.row(row);
    }
  }
  return 0;
}

}  // namespace

int run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.kind) {
    case ExperimentKind::GammaVsSnr:
      return run_gamma_vs_snr(cfg);
    case ExperimentKind::SvtCompare:
      return run_svt_compare(cfg);
    case ExperimentKind::Tracking:
      return run_tracking(cfg, false);
    case ExperimentKind::SupportImage:
      return run_tracking(cfg, true);
    case ExperimentKind::PropertySuite: {
      std::ostringstream log;
      const bool ok = run_property_suite(log);
      std::fputs(log.str().c_str(), stdout);
      return ok ? 0 : 2;
    }
  }
  return 1;
}

}  // namespace subsketch
