#pragma once

#include <utility>
#include <vector>

#include "subsketch/array.hpp"
#include "subsketch/channel.hpp"
#include "subsketch/solver.hpp"
#include "subsketch/types.hpp"

namespace subsketch {

struct TrackerConfig {
  int window = 100;  // T: sketches kept
  int k_inner = 1;   // FISTA iterations per push
  SolverConfig solver;
};

// Sliding-window online estimator: keeps the latest T (sketch, operator)
// pairs, warm-starts from the previous coefficient matrix and runs k_inner
// accelerated iterations per new sample. The momentum sequence restarts at
// every push (stale momentum aimed at an outdated optimum hurts tracking
// right after transitions).
class Tracker {
 public:
  Tracker(const AngularGrid& grid, TrackerConfig config);

  // Ingest one sketch; returns the covariance weights s (length G) of the
  // current estimate G_mat diag(s) G_mat^H. When the window is full the
  // oldest slot is evicted and its coefficient column dropped; the new
  // column starts at zero. Before the window fills, the objective scaling
  // uses the current length T'.
  RVector push(const CVector& sketch, const SamplingOperator& op);

  const CMatrix& W() const { return W_; }
  const SketchBatch& window() const { return window_; }
  int size() const { return static_cast<int>(window_.operators.size()); }
  int capacity() const { return config_.window; }
  int steps() const { return steps_; }

  // Optimality residual of the current iterate on the current window.
  double kkt() const;

 private:
  const AngularGrid* grid_;
  TrackerConfig config_;
  SketchBatch window_;
  CMatrix W_;
  int steps_ = 0;
};

// Row strengths ||W_i||^2 and the indices of the q strongest rows
// (descending strength, ties by index).
std::pair<std::vector<int>, RVector> dominant_support(const CMatrix& W, int q);

}  // namespace subsketch
