#include "subsketch/tracking.hpp"

#include <algorithm>
#include <numeric>

#include "subsketch/errors.hpp"

namespace subsketch {

Tracker::Tracker(const AngularGrid& grid, TrackerConfig config)
    : grid_(&grid), config_(std::move(config)) {
  if (config_.window < 1) throw InvalidDim("Tracker: window must be >= 1");
  if (config_.k_inner < 1) throw InvalidDim("Tracker: k_inner must be >= 1");
  W_.resize(grid.G, 0);
}

RVector Tracker::push(const CVector& sketch, const SamplingOperator& op) {
  if (!window_.operators.empty()) {
    if (op.m() != window_.m())
      throw DimMismatch("Tracker::push: operator m changed");
    if (op.kind() != window_.operators.front().kind())
      throw DimMismatch("Tracker::push: operator kind changed");
  }
  if (sketch.size() != op.m())
    throw DimMismatch("Tracker::push: sketch length != operator m");

  const int T_now = size();
  if (T_now < config_.window) {
    // Grow: append the new slot, new coefficient column starts at zero.
    CMatrix X(op.m(), T_now + 1);
    if (T_now > 0) X.leftCols(T_now) = window_.X;
    X.col(T_now) = sketch;
    window_.X = std::move(X);
    window_.operators.push_back(op);
    CMatrix W(grid_->G, T_now + 1);
    if (T_now > 0) W.leftCols(T_now) = W_;
    W.col(T_now).setZero();
    W_ = std::move(W);
  } else {
    // Evict the oldest slot, drop its coefficient column.
    const int T = config_.window;
    window_.X.leftCols(T - 1) = window_.X.rightCols(T - 1).eval();
    window_.X.col(T - 1) = sketch;
    window_.operators.erase(window_.operators.begin());
    window_.operators.push_back(op);
    W_.leftCols(T - 1) = W_.rightCols(T - 1).eval();
    W_.col(T - 1).setZero();
  }
  ++steps_;

  SolverConfig cfg = config_.solver;
  cfg.max_iters = config_.k_inner;
  cfg.rel_tol = 0.0;  // run exactly k_inner iterations
  cfg.track_objective = false;
  cfg.track_kkt = false;
  cfg.zeta = 0.0;  // sqrt(T') with the current window length
  SolveResult r = run_fista(window_, *grid_, cfg, W_);
  W_ = std::move(r.W);
  return reconstruct_weights(W_, window_.m());
}

double Tracker::kkt() const {
  if (size() == 0) return 0.0;
  return kkt_residual(W_, window_, *grid_);
}

std::pair<std::vector<int>, RVector> dominant_support(const CMatrix& W,
                                                      int q) {
  const int G = static_cast<int>(W.rows());
  if (q < 1 || q > G) throw InvalidQ("dominant_support: need 1 <= q <= G");
  RVector strength(G);
  for (int i = 0; i < G; ++i) strength(i) = W.row(i).squaredNorm();
  std::vector<int> order(static_cast<std::size_t>(G));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return strength(a) > strength(b); });
  order.resize(static_cast<std::size_t>(q));
  return {order, strength};
}

}  // namespace subsketch
