#pragma once

#include <vector>

#include "subsketch/channel.hpp"
#include "subsketch/types.hpp"

namespace subsketch {

struct SvtConfig {
  double tau = 0.0;    // 0 -> 5 sqrt(M T)
  double delta = 0.0;  // 0 -> 1.2 M T / |Omega|
  int max_iters = 500;
  double tol = 1e-4;  // relative residual on the observed entries
};

// Soft-threshold the singular values of Y at level tau. Computed from the
// smaller Gram side: Y = U S V^H gives shrink(Y) = U diag((s-tau)_+/s) U^H Y
// without forming V.
CMatrix svt_shrink(const CMatrix& Y, double tau);

// Matrix completion by singular value thresholding on the M x T snapshot
// matrix observed through per-column antenna selections:
//   X^k = shrink(Y^{k-1}, tau), Y^k = Y^{k-1} + delta P_Omega(Mobs - X^k).
// Only binary selection masks are supported (UnsupportedOperator otherwise).
CMatrix svt_complete(const CMatrix& observed,
                     const std::vector<SamplingOperator>& masks, int M,
                     const SvtConfig& config);

// Covariance estimate from a completed snapshot matrix: (1/T) C C^H.
CMatrix svt_subspace(const CMatrix& completed);

}  // namespace subsketch
