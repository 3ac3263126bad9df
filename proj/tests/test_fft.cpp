#include <doctest.h>

#include <cmath>

#include "subsketch/errors.hpp"
#include "subsketch/fft.hpp"
#include "subsketch/solver.hpp"
#include "test_helpers.hpp"

using namespace subsketch;
using namespace subsketch::testing;

namespace {
const ArrayGeometry kGeom = ArrayGeometry::ula(16, deg2rad(60));
const AngularGrid kGrid = build_grid(kGeom, 32);
const std::vector<int> kMask = {1, 5, 9, 14};
}  // namespace

TEST_CASE("forward on a unit coefficient picks one steering vector") {
  for (int i : {0, 7, 16, 31}) {
    CVector e = CVector::Zero(kGrid.G);
    e(i) = 1.0;
    const CVector y = fft_forward(e, kMask, kGrid);
    const CVector a = kGrid.response_matrix().col(i);
    for (std::size_t r = 0; r < kMask.size(); ++r)
      CHECK(std::abs(y(static_cast<Eigen::Index>(r)) -
                     a(kMask[r]) / 2.0) <= 1e-12);  // 1/sqrt(m) = 1/2
  }
}

TEST_CASE("forward is linear") {
  Rng rng(40);
  const CVector u = random_cvector(kGrid.G, rng);
  const CVector v = random_cvector(kGrid.G, rng);
  const CVector sum = fft_forward(u + v, kMask, kGrid);
  const CVector parts =
      fft_forward(u, kMask, kGrid) + fft_forward(v, kMask, kGrid);
  CHECK((sum - parts).norm() <= 1e-12 * (1.0 + parts.norm()));
}

TEST_CASE("forward and adjoint match the dense dictionary") {
  Rng rng(41);
  const CMatrix& Gm = kGrid.response_matrix();
  CMatrix dense(static_cast<int>(kMask.size()), kGrid.G);
  for (std::size_t r = 0; r < kMask.size(); ++r)
    dense.row(static_cast<int>(r)) = Gm.row(kMask[r]) / 2.0;
  for (int rep = 0; rep < 10; ++rep) {
    const CVector w = random_cvector(kGrid.G, rng);
    CHECK((fft_forward(w, kMask, kGrid) - dense * w).norm() <=
          1e-10 * (1.0 + w.norm()));
    const CVector r = random_cvector(4, rng);
    CHECK((fft_adjoint(r, kMask, kGrid) - dense.adjoint() * r).norm() <=
          1e-10 * (1.0 + r.norm()));
  }
}

TEST_CASE("adjoint of zero is zero and the pairing identity holds") {
  CHECK(fft_adjoint(CVector::Zero(4), kMask, kGrid).norm() == 0.0);
  Rng rng(42);
  for (int rep = 0; rep < 10; ++rep) {
    const CVector u = random_cvector(kGrid.G, rng);
    const CVector r = random_cvector(4, rng);
    const Complex lhs = fft_forward(u, kMask, kGrid).dot(r);
    const Complex rhs = u.dot(fft_adjoint(r, kMask, kGrid));
    CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + std::abs(lhs)));
  }
}

TEST_CASE("non-canonical grids are rejected by the fast path") {
  const auto geom = ArrayGeometry::ula(6, deg2rad(60));
  const AngularGrid grid = build_grid(geom, 12);
  CHECK_THROWS_AS(fft_forward(CVector::Zero(12), {0, 1}, grid),
                  NonCanonicalGrid);
}

TEST_CASE("2D transform matches the dense rect dictionary") {
  Rng rng(43);
  const auto geom = ArrayGeometry::rect(4, 4, std::sqrt(2.0), std::sqrt(2.0));
  const AngularGrid grid = build_rect_grid(geom, 8, 8);
  REQUIRE(grid.canonical);
  const std::vector<int> mask = {0, 3, 6, 9, 12, 15};
  const CMatrix& Gm = grid.response_matrix();
  const double scale = 1.0 / std::sqrt(6.0);
  CMatrix dense(6, grid.G);
  for (std::size_t r = 0; r < mask.size(); ++r)
    dense.row(static_cast<int>(r)) = scale * Gm.row(mask[r]);
  for (int rep = 0; rep < 8; ++rep) {
    const CVector w = random_cvector(grid.G, rng);
    CHECK((fft_forward(w, mask, grid) - dense * w).norm() <=
          1e-10 * (1.0 + w.norm()));
    const CVector r = random_cvector(6, rng);
    CHECK((fft_adjoint(r, mask, grid) - dense.adjoint() * r).norm() <=
          1e-10 * (1.0 + r.norm()));
  }
}

TEST_CASE("asymmetric rect arrays transform correctly") {
  Rng rng(44);
  const auto geom = ArrayGeometry::rect(2, 8, 2.0, std::sqrt(4.0 / 3.0));
  const AngularGrid grid = build_rect_grid(geom, 4, 16);
  REQUIRE(grid.canonical);
  std::vector<int> mask;
  for (int a = 0; a < geom.M; a += 3) mask.push_back(a);
  const CMatrix& Gm = grid.response_matrix();
  const double scale = 1.0 / std::sqrt(static_cast<double>(mask.size()));
  const CVector w = random_cvector(grid.G, rng);
  CVector expect(static_cast<Eigen::Index>(mask.size()));
  for (std::size_t r = 0; r < mask.size(); ++r)
    expect(static_cast<Eigen::Index>(r)) =
        scale * (Gm.row(mask[r]) * w).value();
  CHECK((fft_forward(w, mask, grid) - expect).norm() <=
        1e-10 * (1.0 + expect.norm()));
}
