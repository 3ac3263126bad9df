#include "subsketch/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "subsketch/errors.hpp"

namespace subsketch {

PowerProfile::PowerProfile(RVector values) : p(std::move(values)) {
  if (p.size() == 0) throw LengthMismatch("PowerProfile: empty");
  if (p.minCoeff() < -1e-12)
    throw DegenerateProfile("PowerProfile: negative entry");
  p = p.cwiseMax(0.0);
  if (std::abs(p.sum() - 1.0) > 1e-9)
    throw DegenerateProfile("PowerProfile: entries must sum to 1");
}

PowerProfile power_profile(const CMatrix& S) {
  if (S.rows() != S.cols()) throw LengthMismatch("power_profile: not square");
  const CMatrix H = 0.5 * (S + S.adjoint());
  if ((S - H).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + H.cwiseAbs().maxCoeff()))
    throw NotPSD("power_profile: input is not Hermitian");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(H);
  RVector lam = es.eigenvalues().reverse();
  const double trace = lam.sum();
  if (trace <= 1e-15) throw ZeroMatrix("power_profile: zero matrix");
  if (lam.minCoeff() < -1e-6 * trace)
    throw NotPSD("power_profile: negative eigenvalue");
  lam = lam.cwiseMax(0.0);
  return PowerProfile(lam / lam.sum());
}

PowerProfile captured_profile(const CMatrix& S_true, const CMatrix& U_hat) {
  const int M = static_cast<int>(S_true.rows());
  if (U_hat.rows() != M || U_hat.cols() != M)
    throw LengthMismatch("captured_profile: U_hat must be M x M");
  const CMatrix gram = U_hat.adjoint() * U_hat;
  if ((gram - CMatrix::Identity(M, M)).cwiseAbs().maxCoeff() > 1e-9)
    throw NotUnitary("captured_profile: U_hat is not unitary");
  const CMatrix SU = 0.5 * (S_true + S_true.adjoint()) * U_hat;
  RVector q(M);
  for (int i = 0; i < M; ++i)
    q(i) = std::max(0.0, std::real(U_hat.col(i).dot(SU.col(i))));
  const double total = q.sum();
  if (total <= 1e-15) throw ZeroMatrix("captured_profile: zero covariance");
  return PowerProfile(q / total);
}

double gamma_metric(const PowerProfile& p, const PowerProfile& p_hat) {
  if (p.size() != p_hat.size())
    throw LengthMismatch("gamma_metric: profile lengths differ");
  if (!(p.p(0) > 0.0))
    throw DegenerateProfile("gamma_metric: true profile has a zero prefix");
  double eta_p = 0.0, eta_hat = 0.0, nu = 0.0;
  for (int k = 0; k < p.size(); ++k) {
    eta_p += p.p(k);
    eta_hat += p_hat.p(k);
    nu = std::max(nu, (eta_p - eta_hat) / eta_p);
  }
  return 1.0 - nu;
}

namespace {

// Captured profile of S_true under the basis U with estimate eigenvalues
// lam (non-increasing). Columns whose eigenvalue is numerically zero are
// reordered by captured power (descending), ties by index.
double gamma_with_basis(const CMatrix& S_true, const CMatrix& U,
                        const RVector& lam) {
  const int M = static_cast<int>(S_true.rows());
  const CMatrix H = 0.5 * (S_true + S_true.adjoint());
  const CMatrix SU = H * U;
  RVector q(M);
  for (int i = 0; i < M; ++i)
    q(i) = std::max(0.0, std::real(U.col(i).dot(SU.col(i))));

  const double zero_tol = 1e-12 * std::max(lam.size() ? lam(0) : 0.0, 0.0);
  std::vector<int> order(static_cast<std::size_t>(M));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const bool za = lam(a) <= zero_tol, zb = lam(b) <= zero_tol;
    if (za != zb) return !za;       // nonzero eigenvalues stay in front
    if (!za) return false;          // keep the eigen-solver order there
    return q(a) > q(b);             // zero block: captured power, then index
  });
  RVector q_sorted(M);
  for (int i = 0; i < M; ++i) q_sorted(i) = q(order[static_cast<std::size_t>(i)]);
  const double total = q_sorted.sum();
  if (total <= 1e-15) throw ZeroMatrix("gamma: true covariance is zero");
  return gamma_metric(power_profile(H), PowerProfile(q_sorted / total));
}

}  // namespace

double gamma_of_estimate(const CMatrix& S_true, const CMatrix& S_hat) {
  if (S_true.rows() != S_hat.rows() || S_true.cols() != S_hat.cols())
    throw LengthMismatch("gamma_of_estimate: dimension mismatch");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (S_hat + S_hat.adjoint()));
  const int M = static_cast<int>(S_hat.rows());
  RVector lam(M);
  CMatrix U(M, M);
  for (int i = 0; i < M; ++i) {
    lam(i) = std::max(0.0, es.eigenvalues()(M - 1 - i));
    U.col(i) = es.eigenvectors().col(M - 1 - i);
  }
  return gamma_with_basis(S_true, U, lam);
}

double gamma_of_weights(const CMatrix& S_true, const AngularGrid& grid,
                        const RVector& s) {
  if (s.size() != grid.G)
    throw LengthMismatch("gamma_of_weights: weight length != G");
  // Economy factor F = G_mat diag(sqrt(s)): the M x M Gram F F^H shares the
  // estimate's eigenbasis and keeps the cost at O(M^2 G) instead of the
  // G x G product.
  const CMatrix F =
      grid.response_matrix() * s.cwiseMax(0.0).cwiseSqrt().asDiagonal();
  return gamma_of_estimate(S_true, F * F.adjoint());
}

}  // namespace subsketch
