#include "subsketch/solver.hpp"

#include <algorithm>
#include <cmath>

#include "subsketch/errors.hpp"
#include "subsketch/rng.hpp"

namespace subsketch {

namespace {

double l21_norm(const CMatrix& W) {
  double s = 0.0;
  for (int i = 0; i < W.rows(); ++i) s += W.row(i).norm();
  return s;
}

double default_zeta(double zeta, int T) {
  if (zeta > 0.0) return zeta;
  return std::sqrt(static_cast<double>(T));
}

}  // namespace

BatchOperator::BatchOperator(const SketchBatch& batch, const AngularGrid& grid,
                             double zeta, GradPath path)
    : batch_(&batch), grid_(&grid) {
  batch.validate();
  G_ = grid.G;
  T_ = batch.T();
  m_ = batch.m();
  zeta_ = default_zeta(zeta, T_);
  if (grid.geometry.M != batch.operators.front().M())
    throw DimMismatch("BatchOperator: grid antennas != operator antennas");

  use_fft_ = grid.canonical && path == GradPath::Auto;
  if (use_fft_) {
    dict_ = std::make_unique<FourierDictionary>(grid);
    if (batch.operators.front().kind() == SamplerKind::PhaseShift) {
      full_span_.resize(static_cast<std::size_t>(grid.geometry.M));
      for (int k = 0; k < grid.geometry.M; ++k)
        full_span_[static_cast<std::size_t>(k)] = k;
    }
  } else {
    // Dense route: cache Ghat_t = (1/sqrt(m)) B_eff(t) G_mat.
    dense_.reserve(static_cast<std::size_t>(T_));
    const CMatrix& Gm = grid.response_matrix();
    const double scale = 1.0 / std::sqrt(static_cast<double>(m_));
    for (const auto& op : batch.operators) {
      if (op.kind() == SamplerKind::BinarySelection) {
        CMatrix Ghat(m_, G_);
        for (int r = 0; r < m_; ++r)
          Ghat.row(r) =
              scale * Gm.row(op.indices()[static_cast<std::size_t>(r)]);
        dense_.push_back(std::move(Ghat));
      } else {
        dense_.push_back(scale * (op.effective_matrix() * Gm));
      }
    }
  }
}

CVector BatchOperator::forward(int t, const CVector& w) {
  if (!use_fft_) return dense_[static_cast<std::size_t>(t)] * w;
  const auto& op = batch_->operators[static_cast<std::size_t>(t)];
  if (op.kind() == SamplerKind::BinarySelection)
    return dict_->forward(w, op.indices());
  // Phase shift: full-array transform, then the whitened mixing. The
  // dictionary normalizes by sqrt(mask size), so rescale to 1/sqrt(m).
  const CVector v = dict_->forward(w, full_span_);
  const double fix = std::sqrt(static_cast<double>(full_span_.size()) /
                               static_cast<double>(m_));
  return fix * (op.effective_matrix() * v);
}

CVector BatchOperator::adjoint(int t, const CVector& r) {
  if (!use_fft_) return dense_[static_cast<std::size_t>(t)].adjoint() * r;
  const auto& op = batch_->operators[static_cast<std::size_t>(t)];
  if (op.kind() == SamplerKind::BinarySelection)
    return dict_->adjoint(r, op.indices());
  const CVector u = op.effective_matrix().adjoint() * r;
  const double fix = std::sqrt(static_cast<double>(full_span_.size()) /
                               static_cast<double>(m_));
  return fix * dict_->adjoint(u, full_span_);
}

double BatchOperator::f1(const CMatrix& W) {
  if (W.rows() != G_ || W.cols() != T_)
    throw DimMismatch("f1: W must be G x T");
  double acc = 0.0;
  for (int t = 0; t < T_; ++t)
    acc += (forward(t, W.col(t)) - batch_->X.col(t)).squaredNorm();
  return acc / (2.0 * zeta_);
}

double BatchOperator::f1_and_grad(const CMatrix& W, CMatrix& grad_out) {
  if (W.rows() != G_ || W.cols() != T_)
    throw DimMismatch("grad: W must be G x T");
  grad_out.resize(G_, T_);
  double acc = 0.0;
  for (int t = 0; t < T_; ++t) {
    const CVector r = forward(t, W.col(t)) - batch_->X.col(t);
    acc += r.squaredNorm();
    grad_out.col(t) = adjoint(t, r) / zeta_;
  }
  return acc / (2.0 * zeta_);
}

double BatchOperator::beta(BetaMode mode) {
  if (mode == BetaMode::AnalyticBinary && grid_->canonical)
    return static_cast<double>(G_) / (m_ * zeta_);
  // Power iteration on Ghat_t Ghat_t^H per slot, deterministic start.
  double lam_max = 0.0;
  Rng rng(0x9d2c5680u);
  for (int t = 0; t < T_; ++t) {
    CVector v(m_);
    for (int r = 0; r < m_; ++r) v(r) = rng.cgaussian(1.0);
    v.normalize();
    double lam = 0.0;
    for (int it = 0; it < 500; ++it) {
      const CVector Av = forward(t, adjoint(t, v));
      const double next = std::real(v.dot(Av));
      const double nrm = Av.norm();
      if (nrm <= 0.0) break;
      v = Av / nrm;
      if (it > 2 && std::abs(next - lam) <= 1e-6 * std::max(next, 1e-300)) {
        lam = next;
        break;
      }
      lam = next;
    }
    lam_max = std::max(lam_max, lam);
  }
  return lam_max / zeta_;
}

bool BatchOperator::analytic_beta_valid() const { return grid_->canonical; }

namespace {

double solver_beta(BatchOperator& op, const SolverConfig& config) {
  const double beta = op.beta(config.beta_mode);
  if (!(beta > 0.0)) throw ConfigInvalid("beta must be positive");
  // Estimated constants get a 1% safety margin so 1/beta never exceeds the
  // true step bound; the analytic value is exact and stays untouched.
  const bool exact = config.beta_mode == BetaMode::AnalyticBinary &&
                     op.analytic_beta_valid();
  return exact ? beta : 1.01 * beta;
}

}  // namespace

double objective(const CMatrix& W, const SketchBatch& batch,
                 const AngularGrid& grid, double zeta) {
  BatchOperator op(batch, grid, zeta);
  return op.f1(W) + l21_norm(W);
}

CMatrix grad_f1(const CMatrix& W, const SketchBatch& batch,
                const AngularGrid& grid, double zeta, GradPath path) {
  BatchOperator op(batch, grid, zeta, path);
  CMatrix g;
  op.f1_and_grad(W, g);
  return g;
}

CVector fft_forward(const CVector& w, const std::vector<int>& mask,
                    const AngularGrid& grid) {
  FourierDictionary dict(grid);
  return dict.forward(w, mask);
}

CVector fft_adjoint(const CVector& r, const std::vector<int>& mask,
                    const AngularGrid& grid) {
  FourierDictionary dict(grid);
  return dict.adjoint(r, mask);
}

CMatrix prox_l21(const CMatrix& W, double alpha) {
  if (!(alpha > 0.0)) throw NonpositiveAlpha("prox_l21: alpha must be > 0");
  CMatrix out(W.rows(), W.cols());
  for (int i = 0; i < W.rows(); ++i) {
    const double nrm = W.row(i).norm();
    if (nrm > alpha)
      out.row(i) = ((nrm - alpha) / nrm) * W.row(i);
    else
      out.row(i).setZero();
  }
  return out;
}

double lipschitz(const SketchBatch& batch, const AngularGrid& grid,
                 BetaMode mode, double zeta) {
  BatchOperator op(batch, grid, zeta);
  return op.beta(mode);
}

namespace {

struct StepPlan {
  double alpha = 0.0;
  double chi = 1.0;
};

StepPlan fbs_steps(const SolverConfig& cfg, double beta) {
  StepPlan plan;
  plan.alpha = cfg.alpha_scale / beta;
  plan.chi = cfg.relaxation;
  if (cfg.step_rule == StepRule::Range) {
    const double eps = cfg.step_eps;
    if (!(eps > 0.0) || eps >= std::min(1.0, 1.0 / beta))
      throw ConfigInvalid("step_eps must lie in (0, min(1, 1/beta))");
    if (plan.alpha < eps || plan.alpha > 2.0 / beta - eps)
      throw ConfigInvalid("alpha outside [eps, 2/beta - eps]");
    if (plan.chi < eps || plan.chi > 1.0)
      throw ConfigInvalid("chi outside [eps, 1]");
  } else {
    if (!(plan.alpha > 0.0) || plan.alpha >= 2.0 / beta)
      throw ConfigInvalid("alpha must lie in (0, 2/beta)");
    if (!(plan.chi > 0.0) || plan.chi > 1.0)
      throw ConfigInvalid("chi must lie in (0, 1]");
  }
  return plan;
}

double kkt_from_grad(const CMatrix& W, const CMatrix& g) {
  double res = 0.0;
  for (int i = 0; i < W.rows(); ++i) {
    const double nrm = W.row(i).norm();
    if (nrm < 1e-12) {
      res = std::max(res, g.row(i).norm() - 1.0);
    } else {
      res = std::max(res, (g.row(i) + W.row(i) / nrm).norm());
    }
  }
  return std::max(res, 0.0);
}

}  // namespace

SolveResult run_fbs(const SketchBatch& batch, const AngularGrid& grid,
                    const SolverConfig& config, const CMatrix& W0) {
  BatchOperator op(batch, grid, config.zeta);
  if (W0.rows() != op.G() || W0.cols() != op.T())
    throw DimMismatch("run_fbs: W0 must be G x T");
  const double beta = solver_beta(op, config);
  const StepPlan plan = fbs_steps(config, beta);

  SolveResult res;
  res.beta = beta;
  CMatrix W = W0;
  CMatrix g;
  for (int k = 0; k < config.max_iters; ++k) {
    const double f1 = op.f1_and_grad(W, g);
    if (config.track_objective)
      res.objective_trace.push_back(f1 + l21_norm(W));
    if (config.track_kkt) res.kkt_trace.push_back(kkt_from_grad(W, g));
    const CMatrix P = prox_l21(W - plan.alpha * g, plan.alpha);
    const double w_norm = W.norm();
    const CMatrix Wnext = W + plan.chi * (P - W);
    const double delta = (Wnext - W).norm();
    W = Wnext;
    res.iters = k + 1;
    if (delta <= config.rel_tol * std::max(w_norm, 1e-300)) break;
  }
  const double f1 = op.f1_and_grad(W, g);
  if (config.track_objective)
    res.objective_trace.push_back(f1 + l21_norm(W));
  res.kkt = kkt_from_grad(W, g);
  if (config.track_kkt) res.kkt_trace.push_back(res.kkt);
  res.W = std::move(W);
  return res;
}

SolveResult run_fbs(const SketchBatch& batch, const AngularGrid& grid,
                    const SolverConfig& config) {
  return run_fbs(batch, grid, config,
                 CMatrix::Zero(grid.G, batch.T()));
}

SolveResult run_fista(const SketchBatch& batch, const AngularGrid& grid,
                      const SolverConfig& config, const CMatrix& W0) {
  BatchOperator op(batch, grid, config.zeta);
  if (W0.rows() != op.G() || W0.cols() != op.T())
    throw DimMismatch("run_fista: W0 must be G x T");
  const double beta = solver_beta(op, config);

  SolveResult res;
  res.beta = beta;
  CMatrix W = W0;
  CMatrix Z = W0;
  double t_k = 1.0;
  CMatrix g;
  if (config.track_objective)
    res.objective_trace.push_back(op.f1(W) + l21_norm(W));
  if (config.track_kkt) {
    op.f1_and_grad(W, g);
    res.kkt_trace.push_back(kkt_from_grad(W, g));
  }
  for (int k = 0; k < config.max_iters; ++k) {
    op.f1_and_grad(Z, g);
    const CMatrix R = Z - g / beta;
    CMatrix Wnext = prox_l21(R, 1.0 / beta);
    const double t_next = 0.5 * (1.0 + std::sqrt(4.0 * t_k * t_k + 1.0));
    const double momentum = (t_k - 1.0) / t_next;
    Z = Wnext + momentum * (Wnext - W);
    const double delta = (Wnext - W).norm();
    const double w_norm = W.norm();
    W = std::move(Wnext);
    t_k = t_next;
    res.iters = k + 1;
    if (config.track_objective)
      res.objective_trace.push_back(op.f1(W) + l21_norm(W));
    if (config.track_kkt) {
      CMatrix gw;
      op.f1_and_grad(W, gw);
      res.kkt_trace.push_back(kkt_from_grad(W, gw));
    }
    if (delta <= config.rel_tol * std::max(w_norm, 1e-300)) break;
  }
  CMatrix gw;
  op.f1_and_grad(W, gw);
  res.kkt = kkt_from_grad(W, gw);
  res.W = std::move(W);
  return res;
}

SolveResult run_fista(const SketchBatch& batch, const AngularGrid& grid,
                      const SolverConfig& config) {
  return run_fista(batch, grid, config,
                   CMatrix::Zero(grid.G, batch.T()));
}

RVector reconstruct_weights(const CMatrix& W, int m) {
  const double scale =
      1.0 / (m * std::sqrt(static_cast<double>(W.cols())));
  RVector s(W.rows());
  for (int i = 0; i < W.rows(); ++i) s(i) = scale * W.row(i).norm();
  return s;
}

CMatrix reconstruct_covariance(const CMatrix& W, const AngularGrid& grid,
                               int m, int T) {
  if (W.rows() != grid.G || W.cols() != T)
    throw DimMismatch("reconstruct_covariance: W must be G x T");
  const RVector s = reconstruct_weights(W, m);
  const CMatrix F = grid.response_matrix() * s.cwiseSqrt().asDiagonal();
  return F * F.adjoint();
}

double kkt_residual(const CMatrix& W, const SketchBatch& batch,
                    const AngularGrid& grid, double zeta) {
  BatchOperator op(batch, grid, zeta);
  CMatrix g;
  op.f1_and_grad(W, g);
  return kkt_from_grad(W, g);
}

RVector reduced_program_oracle(const SketchBatch& batch,
                               const AngularGrid& grid, int max_iters) {
  batch.validate();
  const int M = grid.geometry.M;
  if (M > 16)
    throw ScaleTooLarge("reduced_program_oracle: toy scale only (M <= 16)");
  const auto& ops = batch.operators;
  if (ops.front().kind() != SamplerKind::BinarySelection)
    throw Error("reduced_program_oracle: needs binary selection");
  for (const auto& o : ops)
    if (o.indices() != ops.front().indices())
      throw Error("reduced_program_oracle: needs a fixed selection operator");

  const int m = batch.m();
  const int T = batch.T();
  const int G = grid.G;
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  CMatrix Ghat(m, G);
  for (int r = 0; r < m; ++r)
    Ghat.row(r) = scale * grid.response_matrix().row(
                              ops.front().indices()[static_cast<std::size_t>(r)]);
  const CMatrix Cx = (batch.X * batch.X.adjoint()) / static_cast<double>(T);

  const auto objective_of = [&](const RVector& p) {
    const CMatrix A = Ghat * p.asDiagonal() * Ghat.adjoint() +
                      CMatrix::Identity(m, m);
    const CMatrix Ainv_C = A.llt().solve(Cx);
    return std::real(Ainv_C.trace()) + p.sum();
  };
  const auto gradient_of = [&](const RVector& p) {
    const CMatrix A = Ghat * p.asDiagonal() * Ghat.adjoint() +
                      CMatrix::Identity(m, m);
    Eigen::LLT<CMatrix> llt(A);
    // d/dp_i tr(A^{-1} C) = -g_i^H A^{-1} C A^{-1} g_i with g_i = Ghat e_i.
    const CMatrix K = llt.solve(llt.solve(Cx).adjoint().eval()).adjoint();
    const CMatrix KG = K * Ghat;
    RVector grad(G);
    for (int i = 0; i < G; ++i)
      grad(i) = 1.0 - std::real(Ghat.col(i).dot(KG.col(i)));
    return grad;
  };

  RVector p = RVector::Constant(G, std::real(Cx.trace()) / (m * G));
  double f = objective_of(p);
  double step = 1.0;
  for (int it = 0; it < max_iters; ++it) {
    const RVector g = gradient_of(p);
    // Armijo backtracking on the projected step.
    bool moved = false;
    for (int bt = 0; bt < 60; ++bt) {
      const RVector p_new = (p - step * g).cwiseMax(0.0);
      const double dnorm2 = (p_new - p).squaredNorm();
      if (dnorm2 <= 1e-30) break;
      const double f_new = objective_of(p_new);
      if (f_new <= f - 1e-4 * dnorm2 / step) {
        p = p_new;
        f = f_new;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
    step *= 1.3;
  }
  return p;
}

}  // namespace subsketch
