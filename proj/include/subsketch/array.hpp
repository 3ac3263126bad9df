#pragma once

#include <numbers>
#include <vector>

#include "subsketch/types.hpp"

namespace subsketch {

constexpr double deg2rad(double degrees) {
  return degrees * std::numbers::pi / 180.0;
}

enum class ArrayKind { Ula, Rect2d };

// Physical description of the antenna array. Immutable after construction;
// safe to share across threads.
//
// Spacings are wavelength-normalized: spacing = d / (lambda/2). For a ULA
// covering the angular range [-theta_max, theta_max] the element spacing is
// d = lambda / (2 sin(theta_max)), i.e. spacing * sin(theta_max) = 1.
struct ArrayGeometry {
  ArrayKind kind = ArrayKind::Ula;
  int M = 0;  // total number of antennas (Rect2d: M = Mx * My)

  // ULA
  double theta_max = 0.0;  // radians, in (0, pi/2]
  double spacing = 0.0;    // d / (lambda/2)

  // Rect2d: Mx columns spaced dx along the x axis, My rows spaced dy along y.
  int Mx = 0, My = 0;
  double dx = 0.0, dy = 0.0;  // wavelength-normalized

  static ArrayGeometry ula(int M, double theta_max);
  static ArrayGeometry rect(int Mx, int My, double dx, double dy);
};

// Array response at AoA theta; entry k (zero-based) is
// exp(j k pi spacing sin(theta)), so the first entry is always 1.
CVector ula_response(const ArrayGeometry& geom, double theta);

// Array response of a 2D rectangular array at the unit-sphere direction xi.
// Entry for element (x, y) is exp(j (2 pi / lambda) <xi, r_xy>) with
// r_xy = ((x - (Mx+1)/2) d_x, (y - (My+1)/2) d_y, 0), 1-based (x, y);
// flattened y-fastest: (x, y) -> x0 * My + y0 with zero-based x0, y0.
CVector rect_response(const ArrayGeometry& geom, const Eigen::Vector3d& xi);

// One separable axis of a DFT-structured grid: n_ant antennas against a
// grid of n_grid points with "spatial frequencies" u_i = -1 + 2 i / n_grid
// (i zero-based), and antenna phase centers at (k - offset), k zero-based.
struct GridAxis {
  int n_ant = 0;
  int n_grid = 0;
  double offset = 0.0;
};

// Discretized AoA dictionary of size G over the array's angular coverage.
// Column i of response_matrix() is the steering vector at grid point i.
// Immutable after construction.
struct AngularGrid {
  ArrayGeometry geometry;
  int G = 0;        // total grid size (Rect2d: G = Gx * Gy)
  int Gx = 0, Gy = 0;

  // ULA: grid AoAs in radians. Rect2d: unit-sphere points, grid-major with
  // the y grid index fastest.
  std::vector<double> angles;
  std::vector<Eigen::Vector3d> points;

  // True when the grid follows the DFT-structured construction AND all
  // antenna/grid sizes are powers of two, which is what the FFT fast path
  // requires. Formula grids with non-power-of-two sizes are built with
  // canonical = false and take the dense path.
  bool canonical = false;
  std::vector<GridAxis> axes;  // one entry for ULA, two for Rect2d

  const CMatrix& response_matrix() const { return response_; }

  CMatrix response_;  // M x G, filled by the builders
};

// DFT-structured ULA grid: theta_i = asin((-1 + 2(i-1)/G) sin(theta_max)),
// i in [G]. Requires G >= M (GridTooCoarse otherwise).
AngularGrid build_grid(const ArrayGeometry& geom, int G);

// DFT-structured grid for a 2D rectangular array: the Gx x Gy lattice of
// unit-sphere points whose projections onto the array plane are uniform in
// [-xi_max, xi_max] per axis with xi_max * spacing = 1. Requires Gx >= Mx,
// Gy >= My and spacings with 1/dx^2 + 1/dy^2 <= 1 (so the grid stays on the
// sphere).
AngularGrid build_rect_grid(const ArrayGeometry& geom, int Gx, int Gy);

// Arbitrary ULA angle list; never canonical (dense solver path).
AngularGrid make_grid(const ArrayGeometry& geom, std::vector<double> thetas);

}  // namespace subsketch
