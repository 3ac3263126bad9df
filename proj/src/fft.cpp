#include "subsketch/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

#include "subsketch/errors.hpp"

namespace subsketch {

namespace {

constexpr double kPi = std::numbers::pi;

// Process-wide plan cache. Plan creation is not thread-safe in FFTW, so it
// is serialized here; execution through fftw_execute_dft on per-instance
// buffers is safe. Plans are created FFTW_UNALIGNED so any buffer works.
fftw_plan get_plan(int n0, int n1, int sign) {
  using Key = std::tuple<int, int, int>;
  static std::mutex mtx;
  static std::map<Key, fftw_plan> cache;
  std::lock_guard<std::mutex> lock(mtx);
  const Key key{n0, n1, sign};
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  const std::size_t n = static_cast<std::size_t>(n0) * (n1 > 0 ? n1 : 1);
  std::vector<Complex> a(n), b(n);
  auto* in = reinterpret_cast<fftw_complex*>(a.data());
  auto* out = reinterpret_cast<fftw_complex*>(b.data());
  fftw_plan p = (n1 > 0)
                    ? fftw_plan_dft_2d(n0, n1, in, out, sign,
                                       FFTW_ESTIMATE | FFTW_UNALIGNED)
                    : fftw_plan_dft_1d(n0, in, out, sign,
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
  cache.emplace(key, p);
  return p;
}

void execute(void* plan, std::vector<Complex>& in, std::vector<Complex>& out) {
  fftw_execute_dft(static_cast<fftw_plan>(plan),
                   reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
}

}  // namespace

FourierDictionary::FourierDictionary(const AngularGrid& grid) {
  if (!grid.canonical)
    throw NonCanonicalGrid("FourierDictionary requires a canonical grid");
  G_ = grid.G;
  M_ = grid.geometry.M;
  buf_in_.resize(static_cast<std::size_t>(G_));
  buf_out_.resize(static_cast<std::size_t>(G_));

  const auto& axes = grid.axes;
  if (axes.size() == 1) {
    const GridAxis& ax = axes[0];
    plan_backward_ = get_plan(ax.n_grid, 0, FFTW_BACKWARD);
    plan_forward_ = get_plan(ax.n_grid, 0, FFTW_FORWARD);
    in_mod_.resize(static_cast<std::size_t>(G_));
    for (int i = 0; i < G_; ++i)
      in_mod_[static_cast<std::size_t>(i)] =
          std::polar(1.0, -2.0 * kPi * ax.offset * i / ax.n_grid);
    out_mod_.resize(static_cast<std::size_t>(M_));
    antenna_pos_.resize(static_cast<std::size_t>(M_));
    for (int k = 0; k < M_; ++k) {
      out_mod_[static_cast<std::size_t>(k)] =
          std::polar(1.0, -kPi * (k - ax.offset));
      antenna_pos_[static_cast<std::size_t>(k)] = k;
    }
  } else {
    const GridAxis& axx = axes[0];
    const GridAxis& axy = axes[1];
    plan_backward_ = get_plan(axx.n_grid, axy.n_grid, FFTW_BACKWARD);
    plan_forward_ = get_plan(axx.n_grid, axy.n_grid, FFTW_FORWARD);
    in_mod_.resize(static_cast<std::size_t>(G_));
    for (int i = 0; i < axx.n_grid; ++i) {
      const Complex mx = std::polar(1.0, -2.0 * kPi * axx.offset * i /
                                             axx.n_grid);
      for (int j = 0; j < axy.n_grid; ++j) {
        const Complex my = std::polar(1.0, -2.0 * kPi * axy.offset * j /
                                               axy.n_grid);
        in_mod_[static_cast<std::size_t>(i * axy.n_grid + j)] = mx * my;
      }
    }
    out_mod_.resize(static_cast<std::size_t>(M_));
    antenna_pos_.resize(static_cast<std::size_t>(M_));
    for (int x = 0; x < axx.n_ant; ++x) {
      const Complex vx = std::polar(1.0, -kPi * (x - axx.offset));
      for (int y = 0; y < axy.n_ant; ++y) {
        const Complex vy = std::polar(1.0, -kPi * (y - axy.offset));
        const int a = x * axy.n_ant + y;
        out_mod_[static_cast<std::size_t>(a)] = vx * vy;
        antenna_pos_[static_cast<std::size_t>(a)] = x * axy.n_grid + y;
      }
    }
  }
}

CVector FourierDictionary::forward(const CVector& w,
                                   const std::vector<int>& mask) {
  if (w.size() != G_) throw DimMismatch("FourierDictionary::forward: bad w");
  for (int i = 0; i < G_; ++i)
    buf_in_[static_cast<std::size_t>(i)] =
        w(i) * in_mod_[static_cast<std::size_t>(i)];
  execute(plan_backward_, buf_in_, buf_out_);
  const double scale = 1.0 / std::sqrt(static_cast<double>(mask.size()));
  CVector y(static_cast<Eigen::Index>(mask.size()));
  for (std::size_t r = 0; r < mask.size(); ++r) {
    const int a = mask[r];
    y(static_cast<Eigen::Index>(r)) =
        scale * buf_out_[static_cast<std::size_t>(antenna_pos_[
                    static_cast<std::size_t>(a)])] *
        out_mod_[static_cast<std::size_t>(a)];
  }
  return y;
}

CVector FourierDictionary::adjoint(const CVector& r,
                                   const std::vector<int>& mask) {
  if (r.size() != static_cast<Eigen::Index>(mask.size()))
    throw DimMismatch("FourierDictionary::adjoint: bad residual");
  std::fill(buf_in_.begin(), buf_in_.end(), Complex(0.0, 0.0));
  for (std::size_t i = 0; i < mask.size(); ++i) {
    const int a = mask[i];
    buf_in_[static_cast<std::size_t>(antenna_pos_[static_cast<std::size_t>(
        a)])] = r(static_cast<Eigen::Index>(i)) *
                std::conj(out_mod_[static_cast<std::size_t>(a)]);
  }
  execute(plan_forward_, buf_in_, buf_out_);
  const double scale = 1.0 / std::sqrt(static_cast<double>(mask.size()));
  CVector u(G_);
  for (int g = 0; g < G_; ++g)
    u(g) = scale * buf_out_[static_cast<std::size_t>(g)] *
           std::conj(in_mod_[static_cast<std::size_t>(g)]);
  return u;
}

}  // namespace subsketch
