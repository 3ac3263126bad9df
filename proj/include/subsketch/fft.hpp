#pragma once

#include <vector>

#include "subsketch/array.hpp"
#include "subsketch/types.hpp"

namespace subsketch {

// Fast application of the DFT-structured grid response matrix G_mat (M x G)
// and its adjoint, restricted to an antenna subset, in O(G log G) per call.
//
// The grid columns are separable products of terms exp(j pi (k - o) u_i)
// with u_i = -1 + 2 i / G_ax per axis. Splitting u_i exposes a plain DFT
// plus two diagonal modulations:
//
//   (A w)_k = e^{-j pi (k-o)} * sum_i [w_i e^{-j 2 pi o i / G}] e^{+j 2 pi k i / G}
//
// so a forward application is input-modulation -> unnormalized inverse DFT
// -> output-modulation -> antenna gather; the adjoint mirrors it with
// conjugated modulations and a forward DFT of the zero-embedded residual.
// For the zero-offset ULA axis the output modulation reduces to (-1)^k and
// the input modulation vanishes.
//
// Instances hold scratch buffers: use one instance per solve/stream (not
// thread-safe per instance; distinct instances may run concurrently).
class FourierDictionary {
 public:
  // Requires grid.canonical (throws NonCanonicalGrid otherwise).
  explicit FourierDictionary(const AngularGrid& grid);

  // (1/sqrt(m)) * (G_mat w) restricted to mask; mask holds ascending
  // zero-based antenna indices, m = mask.size().
  CVector forward(const CVector& w, const std::vector<int>& mask);

  // (1/sqrt(m)) * G_mat^H * embed(r at mask).
  CVector adjoint(const CVector& r, const std::vector<int>& mask);

  int grid_size() const { return G_; }
  int antennas() const { return M_; }

 private:
  int G_ = 0;
  int M_ = 0;
  std::vector<Complex> in_mod_;    // per grid point
  std::vector<Complex> out_mod_;   // per antenna
  std::vector<int> antenna_pos_;   // antenna -> position in the G-size buffer
  void* plan_backward_ = nullptr;  // fftw plans, owned by a process-wide cache
  void* plan_forward_ = nullptr;
  std::vector<Complex> buf_in_, buf_out_;
};

}  // namespace subsketch
