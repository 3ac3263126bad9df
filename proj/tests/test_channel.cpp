#include <doctest.h>

#include <cmath>
#include <numbers>

#include "subsketch/channel.hpp"
#include "subsketch/errors.hpp"
#include "test_helpers.hpp"

using namespace subsketch;
using subsketch::testing::random_cvector;

namespace {
const ArrayGeometry kGeom = ArrayGeometry::ula(16, deg2rad(60));
}

TEST_CASE("single-component covariance is rank one with trace M") {
  const auto profile = ScatteringProfile::points({{deg2rad(12), 1.0}});
  const CMatrix S = true_covariance(profile, kGeom);
  CHECK(std::abs(std::real(S.trace()) - 16.0) <= 1e-10);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(S);
  CHECK(std::abs(es.eigenvalues()(15) - 16.0) <= 1e-10);
  CHECK(std::abs(es.eigenvalues()(14)) <= 1e-10);
  CHECK((S - S.adjoint()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("orthogonal-response components give separated eigenvalues") {
  // Canonical-lattice AoAs differing by u = 2/M have orthogonal responses.
  const double s_max = std::sin(kGeom.theta_max);
  const double th1 = 0.0;
  const double th2 = std::asin((2.0 / 16.0) * s_max);
  const auto profile =
      ScatteringProfile::points({{th1, 2.0}, {th2, 0.5}});
  CHECK(std::abs(ula_response(kGeom, th1).dot(ula_response(kGeom, th2))) <=
        1e-10);
  const CMatrix S = true_covariance(profile, kGeom);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(S);
  CHECK(std::abs(es.eigenvalues()(15) - 32.0) <= 1e-9);
  CHECK(std::abs(es.eigenvalues()(14) - 8.0) <= 1e-9);
  CHECK(std::abs(es.eigenvalues()(13)) <= 1e-9);
}

TEST_CASE("ULA covariance is Toeplitz and matches the entrywise formula") {
  const auto profile = ScatteringProfile::points(
      {{deg2rad(-20), 0.7}, {deg2rad(5), 1.3}, {deg2rad(41), 0.25}});
  const CMatrix S = true_covariance(profile, kGeom);
  const double s_max = std::sin(kGeom.theta_max);
  for (int k = 0; k < 16; ++k)
    for (int l = 0; l < 16; ++l) {
      Complex expect(0, 0);
      for (const auto& c : profile.components())
        expect += c.power * std::polar(1.0, (k - l) * std::numbers::pi *
                                                std::sin(c.theta) / s_max);
      CHECK(std::abs(S(k, l) - expect) <= 1e-10);
      if (k > 0 && l > 0)
        CHECK(std::abs(S(k, l) - S(k - 1, l - 1)) <= 1e-10);
    }
  // PSD within tolerance.
  Eigen::SelfAdjointEigenSolver<CMatrix> es(S);
  CHECK(es.eigenvalues()(0) >= -1e-9 * std::real(S.trace()));
}

TEST_CASE("band profiles discretize to equispaced midpoints") {
  const auto band = ScatteringProfile::band(deg2rad(10), deg2rad(30), 2.0, 4);
  REQUIRE(band.components().size() == 4);
  CHECK(band.total_power() == doctest::Approx(2.0));
  const double step = deg2rad(20) / 4;
  for (int l = 0; l < 4; ++l) {
    CHECK(band.components()[static_cast<std::size_t>(l)].theta ==
          doctest::Approx(deg2rad(10) + (l + 0.5) * step));
    CHECK(band.components()[static_cast<std::size_t>(l)].power ==
          doctest::Approx(0.5));
  }
  CHECK_THROWS_AS(ScatteringProfile::band(1.0, 0.5, 1.0), EmptyProfile);
  CHECK_THROWS_AS(ScatteringProfile::points({}), EmptyProfile);
  CHECK_THROWS_AS(ScatteringProfile::points({{0.0, -1.0}}), EmptyProfile);
}

TEST_CASE("zero-power profile samples the zero channel") {
  const auto zero = ScatteringProfile::points({{0.2, 0.0}});
  Rng rng(5);
  CHECK(sample_channel(zero, kGeom, rng).norm() == 0.0);
}

TEST_CASE("channel sampling is deterministic per seed") {
  const auto profile = ScatteringProfile::band(deg2rad(10), deg2rad(30), 1.0);
  Rng a(42), b(42);
  const CVector ha = sample_channel(profile, kGeom, a);
  const CVector hb = sample_channel(profile, kGeom, b);
  CHECK((ha - hb).norm() == 0.0);
}

TEST_CASE("sample covariance converges to the true covariance") {
  const auto geom = ArrayGeometry::ula(8, deg2rad(60));
  const auto profile =
      ScatteringProfile::points({{deg2rad(-15), 0.8}, {deg2rad(25), 1.2}});
  const CMatrix S = true_covariance(profile, geom);
  Rng rng(123);
  CMatrix acc = CMatrix::Zero(8, 8);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const CVector h = sample_channel(profile, geom, rng);
    acc.noalias() += h * h.adjoint();
  }
  acc /= static_cast<double>(n);
  CHECK((acc - S).norm() <= 0.05 * S.norm());
}

TEST_CASE("full selection is the identity mask") {
  Rng rng(9);
  const auto op = draw_selection(6, 6, rng);
  for (int i = 0; i < 6; ++i)
    CHECK(op.indices()[static_cast<std::size_t>(i)] == i);
}

TEST_CASE("selection draws are sorted, distinct, and orthonormal") {
  Rng rng(10);
  const auto op = draw_selection(16, 64, rng);
  CHECK(op.m() == 16);
  for (std::size_t i = 1; i < op.indices().size(); ++i)
    CHECK(op.indices()[i] > op.indices()[i - 1]);
  const CMatrix B = op.matrix();
  CHECK((B * B.adjoint() - CMatrix::Identity(16, 16)).norm() == 0.0);
  CHECK_THROWS_AS(draw_selection(65, 64, rng), InvalidDim);
}

TEST_CASE("selection frequencies are uniform across antennas") {
  Rng rng(2024);
  const int draws = 10000, m = 16, M = 64;
  std::vector<int> counts(M, 0);
  for (int d = 0; d < draws; ++d) {
    const auto op = draw_selection(m, M, rng);
    for (int idx : op.indices()) counts[idx]++;
  }
  const double expect = draws * static_cast<double>(m) / M;
  const double sigma =
      std::sqrt(draws * (m / 64.0) * (1.0 - m / 64.0));
  for (int i = 0; i < M; ++i)
    CHECK(std::abs(counts[i] - expect) <= 3.0 * sigma);
}

TEST_CASE("one-bit phase shifts are plus or minus 1/sqrt(M)") {
  Rng rng(11);
  const auto op = draw_phase_shift(4, 8, 1, rng);
  const CMatrix B = op.matrix();
  const double mag = 1.0 / std::sqrt(8.0);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 8; ++c) {
      CHECK(std::abs(std::abs(B(r, c)) - mag) <= 1e-15);
      CHECK(std::abs(B(r, c).imag()) <= 1e-15);
    }
}

TEST_CASE("phase-shift entries live on the quantized lattice") {
  Rng rng(12);
  const auto op = draw_phase_shift(16, 64, 5, rng);
  CHECK(op.bits() == 5);
  const auto& lat = op.phase_lattice();
  CHECK((lat.array() >= 0).all());
  CHECK((lat.array() < 32).all());
  const CMatrix B = op.matrix();
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 8; ++c) {
      const Complex expect =
          std::polar(1.0 / 8.0, 2.0 * std::numbers::pi * lat(r, c) / 32.0);
      CHECK(std::abs(B(r, c) - expect) <= 1e-15);
    }
  CHECK_THROWS_AS(draw_phase_shift(4, 8, 0, rng), InvalidDim);
}

TEST_CASE("noiseless sketches select and rescale the channel") {
  const auto op = SamplingOperator::selection({0, 2}, 4);
  CVector h(4);
  h << Complex(1, 1), Complex(2, 0), Complex(0, -3), Complex(4, 4);
  Rng rng(1);
  const CVector x = make_sketch(h, op, 0.5, rng, /*noiseless=*/true);
  CHECK(std::abs(x(0) - h(0) / 0.5) <= 1e-15);
  CHECK(std::abs(x(1) - h(2) / 0.5) <= 1e-15);
  CHECK_THROWS_AS(make_sketch(h.head(3), op, 0.5, rng), DimMismatch);
}

TEST_CASE("normalized noise power is m for the zero channel") {
  Rng rng(31);
  const CVector zero = CVector::Zero(16);
  double acc = 0.0;
  const int n = 4000;
  for (int i = 0; i < n; ++i) {
    const auto op = draw_selection(4, 16, rng);
    acc += make_sketch(zero, op, 0.7, rng).squaredNorm();
  }
  CHECK(acc / n == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("training SNR matches the configured noise level") {
  const auto profile = ScatteringProfile::band(deg2rad(10), deg2rad(30), 1.0);
  const double snr_db = 10.0;
  const double sigma = std::sqrt(profile.total_power() /
                                 std::pow(10.0, snr_db / 10.0));
  Rng rng(32);
  double h2 = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i)
    h2 += sample_channel(profile, kGeom, rng).squaredNorm();
  h2 /= n;
  const double noise2 = kGeom.M * sigma * sigma;  // E ||n||^2 at the array
  CHECK(h2 / noise2 == doctest::Approx(10.0).epsilon(0.05));
}

TEST_CASE("sketches at different slots are uncorrelated") {
  const auto geom = ArrayGeometry::ula(8, deg2rad(60));
  const auto profile = ScatteringProfile::band(deg2rad(-20), deg2rad(20), 1.0,
                                               20);
  Rng rng(33);
  const int n = 20000, m = 4;
  CMatrix cross = CMatrix::Zero(m, m);
  CMatrix autocov = CMatrix::Zero(m, m);
  for (int i = 0; i < n; ++i) {
    const auto op1 = draw_selection(m, 8, rng);
    const auto op2 = draw_selection(m, 8, rng);
    const CVector x1 =
        make_sketch(sample_channel(profile, geom, rng), op1, 1.0, rng);
    const CVector x2 =
        make_sketch(sample_channel(profile, geom, rng), op2, 1.0, rng);
    cross.noalias() += x1 * x2.adjoint();
    autocov.noalias() += x1 * x1.adjoint();
  }
  CHECK(cross.norm() <= 0.05 * autocov.norm());
}

TEST_CASE("batch validation catches inconsistent slots") {
  Rng rng(34);
  SketchBatch batch;
  batch.X = testing::random_cmatrix(4, 3, rng);
  batch.operators.push_back(draw_selection(4, 8, rng));
  batch.operators.push_back(draw_selection(4, 8, rng));
  CHECK_THROWS_AS(batch.validate(), DimMismatch);  // operator count != T
  batch.operators.push_back(draw_phase_shift(4, 8, 5, rng));
  CHECK_THROWS_AS(batch.validate(), DimMismatch);  // mixed kinds
}
