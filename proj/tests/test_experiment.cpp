#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "subsketch/errors.hpp"
#include "subsketch/experiment.hpp"
#include "test_helpers.hpp"

using namespace subsketch;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Drop the final column of every row (the wall-clock runtime, the one field
// that legitimately differs between reruns).
std::string without_last_column(const std::string& csv) {
  std::string out;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    const auto cut = line.rfind(',');
    out += line.substr(0, cut);
    out += '\n';
  }
  return out;
}

}  // namespace

TEST_CASE("config documents parse with overrides and defaults") {
  const std::string text = R"({
    "experiment": "gamma_vs_snr",
    "seed": 7,
    "trials": 3,
    "out": "/tmp/subsketch_exp/run",
    "geometry": {"kind": "ula", "M": 16, "theta_max_deg": 60},
    "grid": {"G": 32},
    "profile": {"band_deg": [10, 30], "power": 2.0, "points": 8},
    "snr_db": [0, 10],
    "T": [8],
    "m": 4,
    "sampler": {"kind": "both", "bits": 4},
    "solver": {"max_iters": 64, "rel_tol": 1e-3}
  })";
  const ExperimentConfig cfg = parse_config(text);
  CHECK(cfg.kind == ExperimentKind::GammaVsSnr);
  CHECK(cfg.seed == 7);
  CHECK(cfg.trials == 3);
  CHECK(cfg.geometry.M == 16);
  CHECK(cfg.G == 32);
  CHECK(cfg.profile.total_power() == doctest::Approx(2.0));
  CHECK(cfg.profile.components().size() == 8);
  CHECK(cfg.snr_db == std::vector<double>{0, 10});
  CHECK(cfg.T_list == std::vector<int>{8});
  CHECK(cfg.m == 4);
  CHECK(cfg.sampler.binary);
  CHECK(cfg.sampler.phase_shift);
  CHECK(cfg.sampler.bits == 4);
  CHECK(cfg.solver.max_iters == 64);
  CHECK(cfg.solver.rel_tol == doctest::Approx(1e-3));

  CHECK_THROWS_AS(parse_config("{"), ConfigParse);
  CHECK_THROWS_AS(parse_config(R"({"experiment": "bogus"})"), ConfigParse);
  CHECK_THROWS_AS(parse_config(R"({"experiment": "tracking", "trials": 0})"),
                  ConfigParse);
  CHECK_THROWS_AS(
      parse_config(R"({"experiment": "tracking", "profile": {}})"),
      ConfigParse);
  // Defaults mirror the reference simulation setup.
  const ExperimentConfig defaults =
      parse_config(R"({"experiment": "tracking"})");
  CHECK(defaults.geometry.M == 64);
  CHECK(defaults.G == 128);
  CHECK(defaults.m == 16);
  CHECK(defaults.t_transition == 200);
  CHECK(defaults.horizon == 400);
  CHECK(defaults.k_inner == 1);
}

TEST_CASE("noise level reproduces the requested SNR") {
  const auto profile = ScatteringProfile::band(deg2rad(10), deg2rad(30), 1.0);
  CHECK(sigma_for_snr(profile, 0.0) == doctest::Approx(1.0));
  CHECK(sigma_for_snr(profile, 20.0) == doctest::Approx(0.1));
  const auto strong = ScatteringProfile::points({{0.1, 4.0}});
  CHECK(sigma_for_snr(strong, 10.0) ==
        doctest::Approx(std::sqrt(4.0 / 10.0)));
}

TEST_CASE("experiment outputs are byte-identical across reruns") {
  const std::string text = R"({
    "experiment": "gamma_vs_snr",
    "seed": 11,
    "trials": 2,
    "threads": 2,
    "out": "/tmp/subsketch_exp/det",
    "geometry": {"kind": "ula", "M": 16, "theta_max_deg": 60},
    "grid": {"G": 32},
    "profile": {"band_deg": [10, 30], "power": 1.0, "points": 10},
    "snr_db": [10],
    "T": [8],
    "m": 4,
    "sampler": {"kind": "both"},
    "solver": {"max_iters": 60}
  })";
  ExperimentConfig cfg = parse_config(text);
  REQUIRE(run_experiment(cfg) == 0);
  const std::string first = slurp("/tmp/subsketch_exp/det.csv");
  const std::string first_summary = slurp("/tmp/subsketch_exp/det_summary.csv");
  cfg.threads = 1;  // scheduling must not leak into the report
  REQUIRE(run_experiment(cfg) == 0);
  CHECK(without_last_column(slurp("/tmp/subsketch_exp/det.csv")) ==
        without_last_column(first));
  CHECK(slurp("/tmp/subsketch_exp/det_summary.csv") == first_summary);
  CHECK(first.rfind("sampler,T,snr_db,trial,gamma,iters,runtime_ms\n", 0) ==
        0);
  // 2 samplers x 1 T x 1 snr x 2 trials rows plus the header.
  CHECK(std::count(first.begin(), first.end(), '\n') == 5);
}

TEST_CASE("tracking experiment emits one row per push") {
  const std::string text = R"({
    "experiment": "tracking",
    "seed": 3,
    "trials": 1,
    "out": "/tmp/subsketch_exp/track",
    "geometry": {"kind": "ula", "M": 16, "theta_max_deg": 60},
    "grid": {"G": 32},
    "profile": {"band_deg": [10, 30], "points": 10},
    "snr_db": [10],
    "T": [6],
    "m": 4,
    "tracking": {"t_transition": 10, "horizon": 20, "support_q": 2,
                 "profile_after": {"band_deg": [-30, -10], "points": 10}}
  })";
  REQUIRE(run_experiment(parse_config(text)) == 0);
  const std::string csv = slurp("/tmp/subsketch_exp/track.csv");
  CHECK(csv.rfind(
            "T,snr_db,trial,t,gamma,kkt_residual,support_1,support_2\n", 0) ==
        0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 21);
}

TEST_CASE("support-image experiment writes the wide strength matrix") {
  const std::string text = R"({
    "experiment": "support_image",
    "seed": 3,
    "out": "/tmp/subsketch_exp/image",
    "geometry": {"kind": "ula", "M": 16, "theta_max_deg": 60},
    "grid": {"G": 32},
    "profile": {"band_deg": [10, 30], "points": 10},
    "snr_db": [10],
    "T": [6],
    "m": 4,
    "tracking": {"t_transition": 8, "horizon": 12,
                 "profile_after": {"band_deg": [-30, -10], "points": 10}}
  })";
  REQUIRE(run_experiment(parse_config(text)) == 0);
  const std::string wide = slurp("/tmp/subsketch_exp/image_strengths.csv");
  CHECK(wide.rfind("t,strength_0,", 0) == 0);
  CHECK(std::count(wide.begin(), wide.end(), '\n') == 13);
}

TEST_CASE("simulated batches have the declared shapes and normalization") {
  const auto geom = ArrayGeometry::ula(16, deg2rad(60));
  const auto profile = ScatteringProfile::band(deg2rad(10), deg2rad(30), 1.0);
  Rng rng(5);
  const SketchBatch batch = simulate_batch(
      profile, geom, 12, 4, SamplerKind::PhaseShift, 5, 10.0, rng);
  CHECK(batch.T() == 12);
  CHECK(batch.m() == 4);
  CHECK(batch.noise_sigma == doctest::Approx(sigma_for_snr(profile, 10.0)));
  batch.validate();
}
