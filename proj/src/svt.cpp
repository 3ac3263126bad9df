#include "subsketch/svt.hpp"

#include <cmath>

#include "subsketch/errors.hpp"

namespace subsketch {

CMatrix svt_shrink(const CMatrix& Y, double tau) {
  // Y Y^H = U S^2 U^H shares Y's left singular basis, so the shrink can be
  // applied as U diag((s - tau)_+ / s) U^H Y on the small side.
  Eigen::SelfAdjointEigenSolver<CMatrix> es(Y * Y.adjoint());
  const RVector s = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  RVector ratio = RVector::Zero(s.size());
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > tau) ratio(i) = (s(i) - tau) / s(i);
  if ((ratio.array() == 0.0).all()) return CMatrix::Zero(Y.rows(), Y.cols());
  return es.eigenvectors() * ratio.asDiagonal() *
         (es.eigenvectors().adjoint() * Y);
}

CMatrix svt_complete(const CMatrix& observed,
                     const std::vector<SamplingOperator>& masks, int M,
                     const SvtConfig& config) {
  const int T = static_cast<int>(observed.cols());
  if (masks.size() != static_cast<std::size_t>(T))
    throw DimMismatch("svt_complete: one mask per column required");
  std::size_t n_observed = 0;
  for (const auto& op : masks) {
    if (op.kind() != SamplerKind::BinarySelection)
      throw UnsupportedOperator("svt_complete: binary selection masks only");
    if (op.m() != observed.rows() || op.M() != M)
      throw DimMismatch("svt_complete: mask dimensions");
    n_observed += static_cast<std::size_t>(op.m());
  }
  if (!(config.tol >= 0.0) || config.max_iters < 1)
    throw DimMismatch("svt_complete: bad config");

  const double tau =
      config.tau > 0.0 ? config.tau
                       : 5.0 * std::sqrt(static_cast<double>(M) * T);
  // Step heuristic 1.2 M T / |Omega|, capped below 2: the iteration composes
  // a projection with a 1-Lipschitz shrink, so steps >= 2 can diverge (and
  // do at 50% sampling).
  const double delta =
      config.delta > 0.0
          ? config.delta
          : std::min(1.2 * static_cast<double>(M) * T /
                         static_cast<double>(n_observed),
                     1.9);

  // P_Omega(Mobs): observed entries scattered into the full matrix.
  CMatrix P_obs = CMatrix::Zero(M, T);
  for (int t = 0; t < T; ++t) {
    const auto& idx = masks[static_cast<std::size_t>(t)].indices();
    for (std::size_t r = 0; r < idx.size(); ++r)
      P_obs(idx[r], t) = observed(static_cast<int>(r), t);
  }
  const double obs_norm = P_obs.norm();
  if (obs_norm <= 0.0) return CMatrix::Zero(M, T);

  CMatrix Y = CMatrix::Zero(M, T);
  CMatrix X = CMatrix::Zero(M, T);
  for (int k = 0; k < config.max_iters; ++k) {
    X = svt_shrink(Y, tau);
    // Residual restricted to Omega.
    CMatrix R = CMatrix::Zero(M, T);
    for (int t = 0; t < T; ++t) {
      const auto& idx = masks[static_cast<std::size_t>(t)].indices();
      for (std::size_t r = 0; r < idx.size(); ++r)
        R(idx[r], t) = P_obs(idx[r], t) - X(idx[r], t);
    }
    if (R.norm() <= config.tol * obs_norm) break;
    Y += delta * R;
  }
  return X;
}

CMatrix svt_subspace(const CMatrix& completed) {
  const double T = static_cast<double>(completed.cols());
  if (T == 0) return CMatrix::Zero(completed.rows(), completed.rows());
  return (completed * completed.adjoint()) / T;
}

}  // namespace subsketch
