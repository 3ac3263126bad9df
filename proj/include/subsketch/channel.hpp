#pragma once

#include <vector>

#include "subsketch/array.hpp"
#include "subsketch/rng.hpp"
#include "subsketch/types.hpp"

namespace subsketch {

// One point scatterer: AoA (radians) and mean power of its gain.
struct Scatterer {
  double theta = 0.0;
  double power = 0.0;
};

// Angular power distribution of the channel. Continuous bands are
// discretized at construction into equispaced point scatterers (midpoints of
// equal sub-intervals), so sampling stays a finite sum.
class ScatteringProfile {
 public:
  static ScatteringProfile points(std::vector<Scatterer> components);
  static ScatteringProfile band(double theta_lo, double theta_hi,
                                double total_power, int n_points = 100);

  const std::vector<Scatterer>& components() const { return components_; }
  double total_power() const { return total_power_; }

 private:
  std::vector<Scatterer> components_;
  double total_power_ = 0.0;
};

enum class SamplerKind { BinarySelection, PhaseShift };

// Per-slot m x M projection applied by the receiver front end.
//
// BinarySelection keeps m antenna outputs (a 0-1 row-selection matrix B with
// B B^H = I_m). PhaseShift is a dense matrix with entries e^{j theta}/sqrt(M)
// where theta lives on the 2^bits-point phase lattice.
//
// The rows of a phase-shift matrix are not orthonormal, so the projected
// array noise B n is not white. effective_matrix() returns the
// row-whitened operator (B B^H)^{-1/2} B; sketches made through it carry
// unit-covariance noise after normalization, which is the model the solver
// assumes. For binary selection the raw operator already has that property.
class SamplingOperator {
 public:
  static SamplingOperator selection(std::vector<int> indices, int M);
  static SamplingOperator phase_shift(Eigen::MatrixXi lattice, int bits,
                                      int M);

  SamplerKind kind() const { return kind_; }
  int m() const { return m_; }
  int M() const { return M_; }
  int bits() const { return bits_; }

  // BinarySelection only: ascending distinct antenna indices, zero-based.
  const std::vector<int>& indices() const;
  // PhaseShift only: per-entry phase lattice indices in [0, 2^bits).
  const Eigen::MatrixXi& phase_lattice() const;

  // The raw m x M operator B (built on demand).
  CMatrix matrix() const;
  // PhaseShift only: cached (B B^H)^{-1/2} B.
  const CMatrix& effective_matrix() const;

 private:
  SamplerKind kind_ = SamplerKind::BinarySelection;
  int m_ = 0, M_ = 0, bits_ = 0;
  std::vector<int> indices_;
  Eigen::MatrixXi lattice_;
  CMatrix whitened_;
};

// Uniformly random m-subset of the M antennas, fresh per call.
SamplingOperator draw_selection(int m, int M, Rng& rng);

// Random phase-shift matrix with bits-bit quantized phases.
SamplingOperator draw_phase_shift(int m, int M, int bits, Rng& rng);

// Channel covariance S = sum_l power_l a(theta_l) a(theta_l)^H.
CMatrix true_covariance(const ScatteringProfile& profile,
                        const ArrayGeometry& geom);

// One i.i.d. snapshot h = sum_l w_l a(theta_l), w_l ~ CN(0, power_l).
// Consumes 2 engine words per component, in component order.
CVector sample_channel(const ScatteringProfile& profile,
                       const ArrayGeometry& geom, Rng& rng);

// Noise-normalized sketch x = (1/sigma) (B_eff h + n), n ~ CN(0, sigma^2 I_m)
// in the whitened coordinates (exactly the law of the projected-then-whitened
// array noise). Consumes 2m engine words unless noiseless.
CVector make_sketch(const CVector& h, const SamplingOperator& op, double sigma,
                    Rng& rng, bool noiseless = false);

// A window of T sketches with their per-slot operators.
struct SketchBatch {
  CMatrix X;  // m x T, noise-normalized
  std::vector<SamplingOperator> operators;
  double noise_sigma = 1.0;

  int m() const { return static_cast<int>(X.rows()); }
  int T() const { return static_cast<int>(X.cols()); }
  void validate() const;  // same kind and m across slots, X column count
};

}  // namespace subsketch
