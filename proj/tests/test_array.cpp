#include <doctest.h>

#include <cmath>
#include <numbers>

#include "subsketch/array.hpp"
#include "subsketch/errors.hpp"
#include "subsketch/rng.hpp"
#include "test_helpers.hpp"

using namespace subsketch;
constexpr double kPi = std::numbers::pi;

TEST_CASE("ULA geometry follows the spacing rule") {
  const auto geom = ArrayGeometry::ula(16, deg2rad(60));
  CHECK(std::abs(geom.spacing * std::sin(geom.theta_max) - 1.0) <= 1e-12);
  CHECK(geom.M == 16);
  CHECK_THROWS_AS(ArrayGeometry::ula(0, 1.0), WrongGeometry);
  CHECK_THROWS_AS(ArrayGeometry::ula(4, 0.0), WrongGeometry);
  CHECK_THROWS_AS(ArrayGeometry::ula(4, 2.0), WrongGeometry);
}

TEST_CASE("ULA response at zero angle is all ones") {
  const auto geom = ArrayGeometry::ula(4, deg2rad(60));
  const CVector a = ula_response(geom, 0.0);
  for (int k = 0; k < 4; ++k) CHECK(std::abs(a(k) - 1.0) <= 1e-15);
}

TEST_CASE("ULA response at the endpoint angle alternates sign") {
  const auto geom = ArrayGeometry::ula(2, deg2rad(45));
  const CVector a = ula_response(geom, geom.theta_max);
  CHECK(std::abs(a(0) - Complex(1, 0)) <= 1e-12);
  CHECK(std::abs(a(1) - Complex(-1, 0)) <= 1e-12);
}

TEST_CASE("ULA response matches the per-entry formula") {
  const auto geom = ArrayGeometry::ula(8, deg2rad(60));
  const double theta = geom.theta_max / 3.0;
  const CVector a = ula_response(geom, theta);
  for (int k = 0; k < 8; ++k) {
    const Complex expect =
        std::polar(1.0, k * kPi * std::sin(theta) / std::sin(geom.theta_max));
    CHECK(std::abs(a(k) - expect) <= 1e-12);
  }
}

TEST_CASE("ULA response rejects bad inputs") {
  const auto geom = ArrayGeometry::ula(8, deg2rad(50));
  CHECK_THROWS_AS(ula_response(geom, deg2rad(51)), AngleOutOfRange);
  const auto rect = ArrayGeometry::rect(2, 2, 1.0, 1.0);
  CHECK_THROWS_AS(ula_response(rect, 0.0), WrongGeometry);
}

TEST_CASE("rect response at broadside is all ones") {
  const auto geom = ArrayGeometry::rect(3, 2, 1.5, 1.5);
  const CVector a = rect_response(geom, Eigen::Vector3d(0, 0, 1));
  for (int i = 0; i < geom.M; ++i) CHECK(std::abs(a(i) - 1.0) <= 1e-15);
}

TEST_CASE("rect response matches the half-integer offset example") {
  const auto geom = ArrayGeometry::rect(2, 2, 1.0, 1.0);
  const CVector a = rect_response(geom, Eigen::Vector3d(1, 0, 0));
  // (x, y) order with y fastest: phases -pi/2, -pi/2, +pi/2, +pi/2.
  CHECK(std::abs(a(0) - std::polar(1.0, -kPi / 2)) <= 1e-12);
  CHECK(std::abs(a(1) - std::polar(1.0, -kPi / 2)) <= 1e-12);
  CHECK(std::abs(a(2) - std::polar(1.0, kPi / 2)) <= 1e-12);
  CHECK(std::abs(a(3) - std::polar(1.0, kPi / 2)) <= 1e-12);
}

TEST_CASE("rect response matches the entrywise formula") {
  const auto geom = ArrayGeometry::rect(3, 4, std::sqrt(2.0), std::sqrt(2.0));
  Eigen::Vector3d xi(0.35, -0.52, 0.0);
  xi.z() = std::sqrt(1.0 - xi.x() * xi.x() - xi.y() * xi.y());
  const CVector a = rect_response(geom, xi);
  for (int x = 0; x < geom.Mx; ++x)
    for (int y = 0; y < geom.My; ++y) {
      const double phase =
          kPi * ((x - (geom.Mx - 1) / 2.0) * geom.dx * xi.x() +
                 (y - (geom.My - 1) / 2.0) * geom.dy * xi.y());
      CHECK(std::abs(a(x * geom.My + y) - std::polar(1.0, phase)) <= 1e-12);
    }
  CHECK_THROWS_AS(rect_response(geom, Eigen::Vector3d(1, 1, 1)),
                  NotUnitVector);
  const auto ula = ArrayGeometry::ula(4, 1.0);
  CHECK_THROWS_AS(rect_response(ula, Eigen::Vector3d(0, 0, 1)),
                  WrongGeometry);
}

TEST_CASE("canonical grid angles follow the arcsine lattice") {
  const auto geom = ArrayGeometry::ula(2, kPi / 2);
  const AngularGrid grid = build_grid(geom, 4);
  const double expect_sin[] = {-1.0, -0.5, 0.0, 0.5};
  for (int i = 0; i < 4; ++i)
    CHECK(std::abs(std::sin(grid.angles[static_cast<std::size_t>(i)]) -
                   expect_sin[i]) <= 1e-12);
  CHECK(std::abs(grid.angles[0] + kPi / 2) <= 1e-12);
  CHECK(std::abs(grid.angles[1] + kPi / 6) <= 1e-12);
}

TEST_CASE("standard simulation grid: G = 2M covers the angular range") {
  const auto geom = ArrayGeometry::ula(64, deg2rad(60));
  const AngularGrid grid = build_grid(geom, 128);
  CHECK(grid.G == 128);
  CHECK(grid.canonical);
  CHECK(grid.angles.size() == 128);
  CHECK(std::abs(grid.angles.front() + geom.theta_max) <= 1e-12);
  CHECK_THROWS_AS(build_grid(geom, 32), GridTooCoarse);
}

TEST_CASE("canonical completeness: G Gh equals G times identity") {
  const auto geom = ArrayGeometry::ula(16, deg2rad(60));
  const AngularGrid grid = build_grid(geom, 32);
  const CMatrix& Gm = grid.response_matrix();
  const CMatrix lhs = Gm * Gm.adjoint();
  const CMatrix rhs = 32.0 * CMatrix::Identity(16, 16);
  CHECK((lhs - rhs).norm() <= 1e-9 * rhs.norm());
}

TEST_CASE("square canonical grid is unitary up to scaling") {
  const auto geom = ArrayGeometry::ula(8, deg2rad(45));
  const AngularGrid grid = build_grid(geom, 8);
  const CMatrix& Gm = grid.response_matrix();
  CHECK((Gm.adjoint() * Gm - 8.0 * CMatrix::Identity(8, 8)).norm() <=
        1e-9 * 8.0 * std::sqrt(8.0));
  for (int i = 0; i < grid.G; ++i)
    CHECK(std::abs(Gm.col(i).norm() - std::sqrt(8.0)) <= 1e-12);
}

TEST_CASE("grid column at broadside is the all-ones steering vector") {
  const auto geom = ArrayGeometry::ula(16, deg2rad(60));
  const AngularGrid grid = build_grid(geom, 32);
  const int broadside = grid.G / 2;  // u = 0 at i0 = G/2
  CHECK(std::abs(grid.angles[static_cast<std::size_t>(broadside)]) <= 1e-12);
  const CVector col = grid.response_matrix().col(broadside);
  for (int k = 0; k < 16; ++k) CHECK(std::abs(col(k) - 1.0) <= 1e-12);
}

TEST_CASE("non-power-of-two or explicit grids take the dense route") {
  const auto geom = ArrayGeometry::ula(6, deg2rad(60));
  const AngularGrid grid = build_grid(geom, 12);
  CHECK_FALSE(grid.canonical);  // formula grid, but no FFT eligibility
  const AngularGrid listed = make_grid(geom, {-0.5, -0.2, 0.0, 0.1, 0.3, 0.5});
  CHECK_FALSE(listed.canonical);
  CHECK(listed.G == 6);
  CHECK_THROWS_AS(make_grid(geom, {0.0, 0.1}), GridTooCoarse);
}

TEST_CASE("rect canonical grid lives on the unit sphere lattice") {
  const auto geom = ArrayGeometry::rect(4, 4, std::sqrt(2.0), std::sqrt(2.0));
  const AngularGrid grid = build_rect_grid(geom, 8, 8);
  CHECK(grid.G == 64);
  CHECK(grid.canonical);
  const double xi_max = 1.0 / geom.dx;
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) {
      const auto& xi = grid.points[static_cast<std::size_t>(i * 8 + j)];
      CHECK(std::abs(xi.norm() - 1.0) <= 1e-12);
      CHECK(std::abs(xi.x() - (-1.0 + 2.0 * i / 8) * xi_max) <= 1e-12);
      CHECK(std::abs(xi.y() - (-1.0 + 2.0 * j / 8) * xi_max) <= 1e-12);
    }
  CHECK_THROWS_AS(build_rect_grid(geom, 2, 8), GridTooCoarse);
  const auto tight = ArrayGeometry::rect(4, 4, 1.0, 1.0);
  CHECK_THROWS_AS(build_rect_grid(tight, 8, 8), WrongGeometry);
}

TEST_CASE("steering vectors keep unit modulus everywhere") {
  Rng rng(77);
  const auto geom = ArrayGeometry::ula(32, deg2rad(55));
  for (int rep = 0; rep < 25; ++rep) {
    const double theta = (2.0 * rng.uniform() - 1.0) * geom.theta_max;
    const CVector a = ula_response(geom, theta);
    CHECK((a.cwiseAbs().array() - 1.0).abs().maxCoeff() <= 1e-12);
  }
}
