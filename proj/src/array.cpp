#include "subsketch/array.hpp"

#include <cmath>
#include <numbers>
#include <utility>

#include "subsketch/errors.hpp"

namespace subsketch {

namespace {

constexpr double kPi = std::numbers::pi;

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

ArrayGeometry ArrayGeometry::ula(int M, double theta_max) {
  if (M < 1) throw WrongGeometry("ULA needs at least one antenna");
  if (!(theta_max > 0.0) || theta_max > kPi / 2 + 1e-12)
    throw WrongGeometry("theta_max must lie in (0, pi/2]");
  ArrayGeometry g;
  g.kind = ArrayKind::Ula;
  g.M = M;
  g.theta_max = theta_max;
  g.spacing = 1.0 / std::sin(theta_max);
  return g;
}

ArrayGeometry ArrayGeometry::rect(int Mx, int My, double dx, double dy) {
  if (Mx < 1 || My < 1) throw WrongGeometry("Rect2d needs Mx, My >= 1");
  if (!(dx > 0.0) || !(dy > 0.0))
    throw WrongGeometry("Rect2d spacings must be positive");
  ArrayGeometry g;
  g.kind = ArrayKind::Rect2d;
  g.Mx = Mx;
  g.My = My;
  g.M = Mx * My;
  g.dx = dx;
  g.dy = dy;
  return g;
}

CVector ula_response(const ArrayGeometry& geom, double theta) {
  if (geom.kind != ArrayKind::Ula)
    throw WrongGeometry("ula_response: geometry is not a ULA");
  if (std::abs(theta) > geom.theta_max + 1e-12)
    throw AngleOutOfRange("ula_response: |theta| exceeds theta_max");
  const double u = geom.spacing * std::sin(theta);
  CVector a(geom.M);
  for (int k = 0; k < geom.M; ++k) a(k) = std::polar(1.0, kPi * k * u);
  return a;
}

CVector rect_response(const ArrayGeometry& geom, const Eigen::Vector3d& xi) {
  if (geom.kind != ArrayKind::Rect2d)
    throw WrongGeometry("rect_response: geometry is not Rect2d");
  if (std::abs(xi.norm() - 1.0) > 1e-9)
    throw NotUnitVector("rect_response: xi must be a unit vector");
  const double ox = (geom.Mx - 1) / 2.0;
  const double oy = (geom.My - 1) / 2.0;
  CVector a(geom.M);
  for (int x = 0; x < geom.Mx; ++x) {
    const double px = kPi * (x - ox) * geom.dx * xi.x();
    for (int y = 0; y < geom.My; ++y) {
      const double py = kPi * (y - oy) * geom.dy * xi.y();
      a(x * geom.My + y) = std::polar(1.0, px + py);
    }
  }
  return a;
}

AngularGrid build_grid(const ArrayGeometry& geom, int G) {
  if (geom.kind != ArrayKind::Ula)
    throw WrongGeometry("build_grid: geometry is not a ULA");
  if (G < geom.M) throw GridTooCoarse("build_grid: need G >= M");
  AngularGrid grid;
  grid.geometry = geom;
  grid.G = G;
  grid.canonical = is_pow2(G) && is_pow2(geom.M);
  grid.axes = {GridAxis{geom.M, G, 0.0}};
  grid.angles.resize(static_cast<std::size_t>(G));
  grid.response_.resize(geom.M, G);
  const double s = std::sin(geom.theta_max);
  for (int i = 0; i < G; ++i) {
    const double u = -1.0 + 2.0 * i / G;
    grid.angles[static_cast<std::size_t>(i)] = std::asin(u * s);
    grid.response_.col(i) =
        ula_response(geom, grid.angles[static_cast<std::size_t>(i)]);
  }
  return grid;
}

AngularGrid build_rect_grid(const ArrayGeometry& geom, int Gx, int Gy) {
  if (geom.kind != ArrayKind::Rect2d)
    throw WrongGeometry("build_rect_grid: geometry is not Rect2d");
  if (Gx < geom.Mx || Gy < geom.My)
    throw GridTooCoarse("build_rect_grid: need Gx >= Mx and Gy >= My");
  const double xi_max_x = 1.0 / geom.dx;
  const double xi_max_y = 1.0 / geom.dy;
  if (xi_max_x * xi_max_x + xi_max_y * xi_max_y > 1.0 + 1e-12)
    throw WrongGeometry(
        "build_rect_grid: spacings leave the grid off the unit sphere "
        "(need 1/dx^2 + 1/dy^2 <= 1)");
  AngularGrid grid;
  grid.geometry = geom;
  grid.Gx = Gx;
  grid.Gy = Gy;
  grid.G = Gx * Gy;
  grid.canonical = is_pow2(geom.Mx) && is_pow2(geom.My) && is_pow2(Gx) &&
                   is_pow2(Gy);
  grid.axes = {GridAxis{geom.Mx, Gx, (geom.Mx - 1) / 2.0},
               GridAxis{geom.My, Gy, (geom.My - 1) / 2.0}};
  grid.points.reserve(static_cast<std::size_t>(grid.G));
  grid.response_.resize(geom.M, grid.G);
  for (int i = 0; i < Gx; ++i) {
    const double xix = (-1.0 + 2.0 * i / Gx) * xi_max_x;
    for (int j = 0; j < Gy; ++j) {
      const double xiy = (-1.0 + 2.0 * j / Gy) * xi_max_y;
      const double z2 = 1.0 - xix * xix - xiy * xiy;
      Eigen::Vector3d xi(xix, xiy, std::sqrt(std::max(z2, 0.0)));
      grid.response_.col(i * Gy + j) = rect_response(geom, xi);
      grid.points.push_back(std::move(xi));
    }
  }
  return grid;
}

AngularGrid make_grid(const ArrayGeometry& geom, std::vector<double> thetas) {
  if (geom.kind != ArrayKind::Ula)
    throw WrongGeometry("make_grid: geometry is not a ULA");
  if (static_cast<int>(thetas.size()) < geom.M)
    throw GridTooCoarse("make_grid: need at least M grid angles");
  AngularGrid grid;
  grid.geometry = geom;
  grid.G = static_cast<int>(thetas.size());
  grid.canonical = false;
  grid.angles = std::move(thetas);
  grid.response_.resize(geom.M, grid.G);
  for (int i = 0; i < grid.G; ++i)
    grid.response_.col(i) =
        ula_response(geom, grid.angles[static_cast<std::size_t>(i)]);
  return grid;
}

}  // namespace subsketch
