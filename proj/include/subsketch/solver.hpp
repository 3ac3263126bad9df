#pragma once

#include <memory>
#include <vector>

#include "subsketch/array.hpp"
#include "subsketch/channel.hpp"
#include "subsketch/fft.hpp"
#include "subsketch/types.hpp"

namespace subsketch {

enum class BetaMode { AnalyticBinary, PowerIteration };
enum class StepRule { Fixed, Range };
enum class GradPath { Auto, Dense };

struct SolverConfig {
  int max_iters = 500;
  double rel_tol = 1e-6;  // stop on relative Frobenius change of W
  BetaMode beta_mode = BetaMode::AnalyticBinary;
  StepRule step_rule = StepRule::Fixed;
  double step_eps = 1e-3;   // epsilon of the admissible step ranges
  double relaxation = 1.0;  // chi
  double alpha_scale = 1.0; // forward step alpha = alpha_scale / beta
  double zeta = 0.0;        // 0 -> sqrt(T)
  bool track_objective = true;
  bool track_kkt = false;
};

struct SolveResult {
  CMatrix W;                            // G x T
  std::vector<double> objective_trace;  // f(W^k), k = 0..iters
  std::vector<double> kkt_trace;        // filled when track_kkt
  int iters = 0;
  double kkt = 0.0;  // residual at the final iterate
  double beta = 0.0;
};

// Prepared least-squares operator for one batch: applies
// Ghat_t = (1/sqrt(m)) B(t) G_mat column-by-column.
//
// Route selection (Auto): canonical grid + binary selection runs fully on
// FFTs; canonical grid + phase shift runs the grid transform on FFTs and the
// whitened mixing densely; anything else uses cached dense Ghat_t matrices.
// Holds per-solve scratch; not thread-safe per instance.
class BatchOperator {
 public:
  BatchOperator(const SketchBatch& batch, const AngularGrid& grid,
                double zeta = 0.0, GradPath path = GradPath::Auto);

  int G() const { return G_; }
  int T() const { return T_; }
  int m() const { return m_; }
  double zeta() const { return zeta_; }

  CVector forward(int t, const CVector& w);  // Ghat_t w
  CVector adjoint(int t, const CVector& r);  // Ghat_t^H r

  // f1(W) = (1/(2 zeta)) sum_t ||Ghat_t W_t - X_t||^2
  double f1(const CMatrix& W);
  // grad f1; also returns f1 through the shared residual pass.
  double f1_and_grad(const CMatrix& W, CMatrix& grad_out);

  // Lipschitz constant of grad f1 (raw estimate; solvers pad estimated
  // values by 1%).
  double beta(BetaMode mode);
  // Whether the closed form G/(m zeta) is exact for this batch and grid.
  bool analytic_beta_valid() const;

 private:
  const SketchBatch* batch_;
  const AngularGrid* grid_;
  int G_ = 0, T_ = 0, m_ = 0;
  double zeta_ = 1.0;
  bool use_fft_ = false;
  std::unique_ptr<FourierDictionary> dict_;
  std::vector<int> full_span_;        // phase-shift FFT route: all antennas
  std::vector<CMatrix> dense_;        // dense route: Ghat_t per slot
};

// f(W) = f1(W) + ||W||_{2,1}. zeta = 0 means sqrt(T).
double objective(const CMatrix& W, const SketchBatch& batch,
                 const AngularGrid& grid, double zeta = 0.0);

// Gradient of f1 (a G x T matrix).
CMatrix grad_f1(const CMatrix& W, const SketchBatch& batch,
                const AngularGrid& grid, double zeta = 0.0,
                GradPath path = GradPath::Auto);

// Single-column fast dictionary application (canonical grids only).
CVector fft_forward(const CVector& w, const std::vector<int>& mask,
                    const AngularGrid& grid);
CVector fft_adjoint(const CVector& r, const std::vector<int>& mask,
                    const AngularGrid& grid);

// Row-wise shrinkage: row_i <- (||row_i|| - alpha)_+ / ||row_i|| * row_i.
CMatrix prox_l21(const CMatrix& W, double alpha);

// Lipschitz constant of grad f1. AnalyticBinary gives G/(m zeta), exact on
// canonical grids (where Ghat_t Ghat_t^H = (G/m) I for both operator kinds,
// selection because B B^H = I and phase shift because of row whitening; it
// falls back to power iteration on non-canonical grids). PowerIteration
// estimates max_t lambda_max(Ghat_t Ghat_t^H)/zeta to 1e-6 relative. The
// solvers pad estimated (non-analytic) values by 1% when sizing steps.
double lipschitz(const SketchBatch& batch, const AngularGrid& grid,
                 BetaMode mode = BetaMode::AnalyticBinary, double zeta = 0.0);

// Forward-backward splitting with relaxation (step alpha_k, relaxation chi_k
// fixed across iterations from the config).
SolveResult run_fbs(const SketchBatch& batch, const AngularGrid& grid,
                    const SolverConfig& config, const CMatrix& W0);
SolveResult run_fbs(const SketchBatch& batch, const AngularGrid& grid,
                    const SolverConfig& config);

// FBS with Nesterov momentum (the default algorithm).
SolveResult run_fista(const SketchBatch& batch, const AngularGrid& grid,
                      const SolverConfig& config, const CMatrix& W0);
SolveResult run_fista(const SketchBatch& batch, const AngularGrid& grid,
                      const SolverConfig& config);

// Covariance weights s_i = ||W_i||/(m sqrt(T)); the estimate is
// G_mat diag(s) G_mat^H.
RVector reconstruct_weights(const CMatrix& W, int m);
CMatrix reconstruct_covariance(const CMatrix& W, const AngularGrid& grid,
                               int m, int T);

// First-order optimality residual of the scaled objective: with g = grad f1,
// max over zero rows of (||g_i|| - 1)_+ and over nonzero rows of
// ||g_i + W_i/||W_i||||.
double kkt_residual(const CMatrix& W, const SketchBatch& batch,
                    const AngularGrid& grid, double zeta = 0.0);

// Small-scale independent check of the covariance weights: solves the
// reduced diagonal program
//   min_{p >= 0} tr((Ghat diag(p) Ghat^H + I)^{-1} Chat_x) + sum_i p_i
// by projected gradient descent with Armijo backtracking. Requires a fixed
// binary selection operator across the batch and M <= 16 (ScaleTooLarge).
// At the optimum p_i ~= ||W*_i|| / sqrt(T).
RVector reduced_program_oracle(const SketchBatch& batch,
                               const AngularGrid& grid, int max_iters = 5000);

}  // namespace subsketch
