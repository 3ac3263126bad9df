#pragma once

#include "subsketch/array.hpp"
#include "subsketch/types.hpp"

namespace subsketch {

// Normalized power distribution: nonnegative, sums to one. Ordering is the
// producer's contract: true profiles are sorted non-increasing (eigenvalue
// order), captured profiles follow the estimate's own basis order.
struct PowerProfile {
  RVector p;
  explicit PowerProfile(RVector values);
  int size() const { return static_cast<int>(p.size()); }
};

// Eigenvalues of a Hermitian PSD matrix, sorted non-increasing, normalized
// by the trace.
PowerProfile power_profile(const CMatrix& S);

// Power of S_true captured by each column of the unitary U_hat:
// q_i = u_i^H S_true u_i, normalized. Column order is taken as given.
PowerProfile captured_profile(const CMatrix& S_true, const CMatrix& U_hat);

// Gamma = 1 - max_k (eta_p(k) - eta_phat(k)) / eta_p(k), where eta is the
// prefix sum. Equals 1 iff the cumulative captured power matches the
// optimal one at every dimension.
double gamma_metric(const PowerProfile& p, const PowerProfile& p_hat);

// Gamma of a covariance estimate against the true covariance: the estimate's
// eigenbasis ordered by its own eigenvalues (non-increasing; the zero block
// is tie-broken by captured power, then index) defines the captured profile.
double gamma_of_estimate(const CMatrix& S_true, const CMatrix& S_hat);

// Same, for the factored estimate S_hat = G_mat diag(s) G_mat^H; works from
// the economy factor G_mat diag(sqrt(s)) without forming S_hat.
double gamma_of_weights(const CMatrix& S_true, const AngularGrid& grid,
                        const RVector& s);

}  // namespace subsketch
