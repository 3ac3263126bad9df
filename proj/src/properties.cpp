#include <cmath>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "subsketch/errors.hpp"
#include "subsketch/experiment.hpp"
#include "subsketch/io.hpp"
#include "subsketch/rng.hpp"

namespace subsketch {

namespace {

struct Check {
  std::string name;
  std::function<void()> run;  // throws Error on failure
};

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(what);
}

CMatrix random_cmatrix(int rows, int cols, Rng& rng) {
  CMatrix W(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) W(r, c) = rng.cgaussian(1.0);
  return W;
}

SketchBatch random_binary_batch(const ArrayGeometry& geom, int m, int T,
                                Rng& rng) {
  SketchBatch batch;
  batch.X = random_cmatrix(m, T, rng);
  for (int t = 0; t < T; ++t)
    batch.operators.push_back(draw_selection(m, geom.M, rng));
  return batch;
}

std::vector<Check> make_checks() {
  std::vector<Check> checks;

  checks.push_back({"steering-unit-modulus", [] {
    const auto ula = ArrayGeometry::ula(16, deg2rad(60));
    for (double th : {0.0, -0.7, deg2rad(20.0), deg2rad(60.0)}) {
      const CVector a = ula_response(ula, th);
      require((a.cwiseAbs().array() - 1.0).abs().maxCoeff() <= 1e-12,
              "ULA response entry off the unit circle");
    }
    const auto rect = ArrayGeometry::rect(2, 4, std::sqrt(2.0), std::sqrt(2.0));
    const Eigen::Vector3d xi(0.3, -0.4, std::sqrt(1 - 0.09 - 0.16));
    const CVector a = rect_response(rect, xi);
    require((a.cwiseAbs().array() - 1.0).abs().maxCoeff() <= 1e-12,
            "rect response entry off the unit circle");
  }});

  checks.push_back({"canonical-completeness", [] {
    const auto geom = ArrayGeometry::ula(16, deg2rad(60));
    const AngularGrid grid = build_grid(geom, 32);
    const CMatrix& Gm = grid.response_matrix();
    const CMatrix lhs = Gm * Gm.adjoint();
    const CMatrix rhs = static_cast<double>(grid.G) *
                        CMatrix::Identity(geom.M, geom.M);
    require((lhs - rhs).norm() <= 1e-9 * rhs.norm(),
            "G G^H != G I on the canonical ULA grid");
    const auto rect = ArrayGeometry::rect(4, 4, std::sqrt(2.0), std::sqrt(2.0));
    const AngularGrid rgrid = build_rect_grid(rect, 8, 8);
    const CMatrix& Rm = rgrid.response_matrix();
    require((Rm * Rm.adjoint() - static_cast<double>(rgrid.G) *
                                     CMatrix::Identity(rect.M, rect.M))
                    .norm() <= 1e-9 * rgrid.G * std::sqrt(1.0 * rect.M),
            "G G^H != G I on the canonical rect grid");
  }});

  checks.push_back({"column-phase-invariance", [] {
    Rng rng(11);
    const auto geom = ArrayGeometry::ula(8, deg2rad(45));
    const AngularGrid grid = build_grid(geom, 16);
    RVector s(grid.G);
    for (int i = 0; i < grid.G; ++i) s(i) = rng.uniform();
    CMatrix phased = grid.response_matrix();
    for (int i = 0; i < grid.G; ++i)
      phased.col(i) *= std::polar(1.0, 2 * rng.uniform() - 1.0);
    const CMatrix S1 = grid.response_matrix() * s.asDiagonal() *
                       grid.response_matrix().adjoint();
    const CMatrix S2 = phased * s.asDiagonal() * phased.adjoint();
    require((S1 - S2).norm() <= 1e-10 * S1.norm(),
            "covariance changed under per-column phases");
  }});

  checks.push_back({"rect-block-toeplitz", [] {
    Rng rng(12);
    const auto rect = ArrayGeometry::rect(4, 4, std::sqrt(2.0), std::sqrt(2.0));
    const AngularGrid grid = build_rect_grid(rect, 8, 8);
    RVector s(grid.G);
    for (int i = 0; i < grid.G; ++i) s(i) = rng.uniform();
    const CMatrix S = grid.response_matrix() * s.asDiagonal() *
                      grid.response_matrix().adjoint();
    require((S - S.adjoint()).norm() <= 1e-10 * S.norm(), "S not Hermitian");
    const int My = rect.My;
    // Entries may depend only on the element index differences.
    for (int x = 0; x < rect.Mx; ++x)
      for (int y = 0; y < My; ++y)
        for (int x2 = 0; x2 < rect.Mx; ++x2)
          for (int y2 = 0; y2 < My; ++y2) {
            const int dx = x - x2, dy = y - y2;
            const int rx = std::max(dx, 0), ry = std::max(dy, 0);
            const int cx = std::max(-dx, 0), cy = std::max(-dy, 0);
            require(std::abs(S(x * My + y, x2 * My + y2) -
                             S(rx * My + ry, cx * My + cy)) <=
                        1e-10 * S.norm(),
                    "covariance is not block-Toeplitz");
          }
  }});

  checks.push_back({"sampling-operators", [] {
    Rng rng(13);
    const auto op = draw_selection(4, 12, rng);
    const CMatrix B = op.matrix();
    require((B * B.adjoint() - CMatrix::Identity(4, 4)).norm() == 0.0,
            "selection B B^H != I");
    const auto ps = draw_phase_shift(3, 8, 5, rng);
    const CMatrix P = ps.matrix();
    require((P.cwiseAbs().array() - 1.0 / std::sqrt(8.0)).abs().maxCoeff() <=
                1e-15,
            "phase-shift modulus != 1/sqrt(M)");
    const CMatrix& W = ps.effective_matrix();
    require((W * W.adjoint() - CMatrix::Identity(3, 3)).norm() <= 1e-10,
            "whitened operator rows not orthonormal");
  }});

  checks.push_back({"fft-dense-agreement", [] {
    Rng rng(14);
    const auto geom = ArrayGeometry::ula(16, deg2rad(60));
    const AngularGrid grid = build_grid(geom, 32);
    for (int rep = 0; rep < 4; ++rep) {
      SketchBatch batch;
      const int m = rep % 2 ? 8 : 4;
      batch.X = random_cmatrix(m, 8, rng);
      for (int t = 0; t < 8; ++t)
        batch.operators.push_back(rep < 2
                                      ? draw_selection(m, geom.M, rng)
                                      : draw_phase_shift(m, geom.M, 5, rng));
      const CMatrix W = random_cmatrix(grid.G, 8, rng);
      const CMatrix fast = grad_f1(W, batch, grid);
      const CMatrix dense = grad_f1(W, batch, grid, 0.0, GradPath::Dense);
      require((fast - dense).norm() <= 1e-10 * dense.norm(),
              "FFT gradient disagrees with dense gradient");
    }
  }});

  checks.push_back({"fft-adjoint-identity", [] {
    Rng rng(15);
    const auto geom = ArrayGeometry::ula(8, deg2rad(50));
    const AngularGrid grid = build_grid(geom, 16);
    const std::vector<int> mask = {1, 4, 6};
    const CVector u = random_cmatrix(grid.G, 1, rng);
    const CVector r = random_cmatrix(3, 1, rng);
    const Complex lhs = fft_forward(u, mask, grid).dot(r);
    const Complex rhs = u.dot(fft_adjoint(r, mask, grid));
    require(std::abs(lhs - rhs) <= 1e-12 * (1.0 + std::abs(lhs)),
            "adjoint identity violated");
  }});

  checks.push_back({"descent-lemma", [] {
    Rng rng(16);
    const auto geom = ArrayGeometry::ula(16, deg2rad(60));
    const AngularGrid grid = build_grid(geom, 32);
    const SketchBatch batch = random_binary_batch(geom, 4, 8, rng);
    const double beta = lipschitz(batch, grid);
    BatchOperator op(batch, grid);
    for (int rep = 0; rep < 20; ++rep) {
      const CMatrix W = random_cmatrix(grid.G, 8, rng);
      const CMatrix Wp = random_cmatrix(grid.G, 8, rng);
      CMatrix g;
      const double f1p = op.f1_and_grad(Wp, g);
      const double lhs = op.f1(W);
      const double rhs = f1p +
                         std::real((g.conjugate().cwiseProduct(W - Wp)).sum()) +
                         0.5 * beta * (W - Wp).squaredNorm();
      require(lhs <= rhs + 1e-9, "descent lemma violated");
    }
  }});

  checks.push_back({"prox-shrinkage", [] {
    CMatrix W(2, 2);
    W << Complex(3, 0), Complex(4, 0), Complex(0.1, 0), Complex(0.2, 0);
    const CMatrix P = prox_l21(W, 1.0);
    require(std::abs(P(0, 0) - Complex(2.4, 0)) <= 1e-12 &&
                std::abs(P(0, 1) - Complex(3.2, 0)) <= 1e-12,
            "row shrink closed form");
    require(P.row(1).norm() == 0.0, "short row not zeroed");
    Rng rng(17);
    for (int rep = 0; rep < 20; ++rep) {
      const CMatrix U = random_cmatrix(4, 6, rng);
      const CMatrix V = random_cmatrix(4, 6, rng);
      require((prox_l21(U, 0.7) - prox_l21(V, 0.7)).norm() <=
                  (U - V).norm() + 1e-12,
              "prox not nonexpansive");
    }
  }});

  checks.push_back({"fbs-fista-agreement", [] {
    Rng rng(18);
    const auto geom = ArrayGeometry::ula(8, deg2rad(60));
    const AngularGrid grid = build_grid(geom, 16);
    const SketchBatch batch = random_binary_batch(geom, 4, 8, rng);
    SolverConfig cfg;
    cfg.max_iters = 20000;
    cfg.rel_tol = 1e-12;
    const SolveResult a = run_fbs(batch, grid, cfg);
    const SolveResult b = run_fista(batch, grid, cfg);
    const double fa = a.objective_trace.back();
    const double fb = b.objective_trace.back();
    require(std::abs(fa - fb) <= 1e-6 * std::max(fa, fb),
            "FBS and FISTA optima differ");
    for (std::size_t k = 1; k < a.objective_trace.size(); ++k)
      require(a.objective_trace[k] <=
                  a.objective_trace[k - 1] + 1e-12 * a.objective_trace[0],
              "FBS objective not monotone");
  }});

  checks.push_back({"kkt-closed-form", [] {
    const auto geom = ArrayGeometry::ula(1, deg2rad(60));
    const AngularGrid grid = build_grid(geom, 1);
    SketchBatch batch;
    batch.X = CMatrix(1, 4);
    batch.X << Complex(3, 0), Complex(0, 3), Complex(-3, 0), Complex(0, -3);
    for (int t = 0; t < 4; ++t)
      batch.operators.push_back(SamplingOperator::selection({0}, 1));
    const double zeta = 2.0;  // sqrt(T)
    const double norm_x = batch.X.norm();
    const CMatrix W_opt = batch.X * ((norm_x - zeta) / norm_x);
    require(kkt_residual(W_opt, batch, grid) <= 1e-10,
            "closed-form optimum has nonzero residual");
    // Small data: W = 0 must be optimal.
    SketchBatch small = batch;
    small.X *= 0.1;
    require(kkt_residual(CMatrix::Zero(1, 4), small, grid) == 0.0,
            "zero solution not recognized as optimal");
  }});

  checks.push_back({"reduced-program-gradient", [] {
    Rng rng(19);
    const auto geom = ArrayGeometry::ula(4, deg2rad(60));
    const AngularGrid grid = build_grid(geom, 8);
    SketchBatch batch;
    batch.X = random_cmatrix(2, 16, rng);
    const auto mask = draw_selection(2, 4, rng);
    for (int t = 0; t < 16; ++t) batch.operators.push_back(mask);
    // Finite-difference check of the smooth part around a random point.
    const int m = 2, G = grid.G;
    CMatrix Ghat(m, G);
    for (int r = 0; r < m; ++r)
      Ghat.row(r) = grid.response_matrix().row(
                        mask.indices()[static_cast<std::size_t>(r)]) /
                    std::sqrt(2.0);
    const CMatrix Cx = batch.X * batch.X.adjoint() / 16.0;
    RVector p(G);
    for (int i = 0; i < G; ++i) p(i) = 0.1 + rng.uniform();
    const auto f = [&](const RVector& q) {
      const CMatrix A = Ghat * q.asDiagonal() * Ghat.adjoint() +
                        CMatrix::Identity(m, m);
      return std::real(A.llt().solve(Cx).trace()) + q.sum();
    };
    const auto grad_i = [&](int i) {
      const CMatrix A = Ghat * p.asDiagonal() * Ghat.adjoint() +
                        CMatrix::Identity(m, m);
      Eigen::LLT<CMatrix> llt(A);
      const CMatrix K = llt.solve(llt.solve(Cx).adjoint().eval());
      return 1.0 - std::real(Ghat.col(i).dot(K * Ghat.col(i)));
    };
    for (int i = 0; i < G; i += 3) {
      RVector hi = p, lo = p;
      const double h = 1e-6;
      hi(i) += h;
      lo(i) -= h;
      const double fd = (f(hi) - f(lo)) / (2 * h);
      const double an = grad_i(i);
      require(std::abs(fd - an) <= 1e-5 * std::max(1.0, std::abs(an)),
              "reduced-program gradient does not match finite differences");
    }
  }});

  checks.push_back({"gamma-properties", [] {
    Rng rng(20);
    for (int rep = 0; rep < 10; ++rep) {
      const int M = 6;
      const CMatrix A = random_cmatrix(M, M, rng);
      const CMatrix S = A * A.adjoint();
      const CMatrix Q =
          Eigen::HouseholderQR<CMatrix>(random_cmatrix(M, M, rng))
              .householderQ();
      const PowerProfile p = power_profile(S);
      const PowerProfile ph = captured_profile(S, Q);
      double eta_p = 0, eta_h = 0;
      for (int k = 0; k < M; ++k) {
        eta_p += p.p(k);
        eta_h += ph.p(k);
        require(eta_p >= eta_h - 1e-9, "majorization violated");
      }
      const double g = gamma_metric(p, ph);
      require(g >= 0.0 && g <= 1.0, "gamma out of [0,1]");
      require(std::abs(gamma_metric(p, p) - 1.0) <= 1e-12,
              "gamma(p,p) != 1");
      // Certificate: prefix beamformers capture >= (1 - eps) of the optimum.
      const double eps = 1.0 - g;
      double lam_prefix = 0.0, q_prefix = 0.0;
      const double trace = std::real(S.trace());
      for (int k = 0; k < M; ++k) {
        lam_prefix += p.p(k) * trace;
        q_prefix += ph.p(k) * trace;
        require(q_prefix >= (1.0 - eps) * lam_prefix - 1e-9 * trace,
                "gamma certificate violated");
      }
    }
  }});

  checks.push_back({"svt-shrinkage", [] {
    Rng rng(21);
    const CMatrix Y = random_cmatrix(5, 9, rng);
    Eigen::JacobiSVD<CMatrix> before(Y);
    const double tau = 0.6 * before.singularValues()(0);
    const CMatrix X = svt_shrink(Y, tau);
    Eigen::JacobiSVD<CMatrix> after(X);
    for (int i = 0; i < 5; ++i) {
      const double expect = std::max(before.singularValues()(i) - tau, 0.0);
      require(std::abs(after.singularValues()(i) - expect) <= 1e-9,
              "soft-thresholded singular values are off");
    }
  }});

  checks.push_back({"svt-rank1-recovery", [] {
    Rng rng(22);
    const auto geom = ArrayGeometry::ula(16, deg2rad(60));
    const CVector a = ula_response(geom, deg2rad(17.0));
    CMatrix truth(16, 32);
    for (int t = 0; t < 32; ++t) truth.col(t) = a * rng.cgaussian(1.0);
    std::vector<SamplingOperator> masks;
    CMatrix obs(8, 32);
    for (int t = 0; t < 32; ++t) {
      masks.push_back(draw_selection(8, 16, rng));
      for (int r = 0; r < 8; ++r)
        obs(r, t) = truth(masks.back().indices()[static_cast<std::size_t>(r)],
                          t);
    }
    SvtConfig cfg;
    cfg.max_iters = 1000;
    cfg.tol = 1e-6;
    const CMatrix done = svt_complete(obs, masks, 16, cfg);
    require((done - truth).norm() <= 1e-3 * truth.norm(),
            "rank-1 completion error too large");
  }});

  checks.push_back({"tracker-window-semantics", [] {
    Rng rng(23);
    const auto geom = ArrayGeometry::ula(8, deg2rad(60));
    const AngularGrid grid = build_grid(geom, 16);
    TrackerConfig tc;
    tc.window = 5;
    Tracker tracker(grid, tc);
    std::vector<std::pair<CVector, SamplingOperator>> fed;
    for (int t = 0; t < 12; ++t) {
      const auto op = draw_selection(3, geom.M, rng);
      const CVector x = random_cmatrix(3, 1, rng);
      fed.push_back({x, op});
      tracker.push(x, op);
    }
    const SketchBatch& win = tracker.window();
    require(win.T() == 5, "window size wrong");
    for (int j = 0; j < 5; ++j) {
      const auto& [x, op] = fed[static_cast<std::size_t>(7 + j)];
      require((win.X.col(j) - x).norm() == 0.0, "window sketch mismatch");
      require(win.operators[static_cast<std::size_t>(j)].indices() ==
                  op.indices(),
              "window operator mismatch");
    }
    SolverConfig cfg;
    cfg.max_iters = 20000;
    cfg.rel_tol = 1e-12;
    const double warm = run_fista(win, grid, cfg, tracker.W())
                            .objective_trace.back();
    const double cold = run_fista(win, grid, cfg).objective_trace.back();
    require(std::abs(warm - cold) <= 1e-6 * std::max(warm, cold),
            "warm-started window optimum differs from batch optimum");
  }});

  checks.push_back({"batch-roundtrip", [] {
    Rng rng(24);
    const auto geom = ArrayGeometry::ula(8, deg2rad(60));
    for (int kind = 0; kind < 2; ++kind) {
      SketchBatch batch;
      batch.noise_sigma = 0.25;
      batch.X = random_cmatrix(3, 6, rng);
      for (int t = 0; t < 6; ++t)
        batch.operators.push_back(kind == 0
                                      ? draw_selection(3, geom.M, rng)
                                      : draw_phase_shift(3, geom.M, 5, rng));
      const std::string path = "/tmp/subsketch_batch_check.bin";
      save_batch(batch, geom.M, path);
      int M = 0;
      const SketchBatch back = load_batch(path, &M);
      require(M == geom.M && back.T() == 6 && back.m() == 3 &&
                  back.noise_sigma == batch.noise_sigma,
              "batch header mismatch");
      require((back.X - batch.X).norm() == 0.0, "batch X not bit-identical");
      for (int t = 0; t < 6; ++t) {
        const auto& a = batch.operators[static_cast<std::size_t>(t)];
        const auto& b = back.operators[static_cast<std::size_t>(t)];
        require(a.kind() == b.kind(), "operator kind mismatch");
        if (kind == 0)
          require(a.indices() == b.indices(), "operator indices mismatch");
        else
          require(a.phase_lattice() == b.phase_lattice(),
                  "operator lattice mismatch");
      }
    }
  }});

  return checks;
}

}  // namespace

bool run_property_suite(std::ostream& log) {
  bool all_ok = true;
  for (const auto& check : make_checks()) {
    try {
      check.run();
      log << "[PASS] " << check.name << "\n";
    } catch (const std::exception& e) {
      all_ok = false;
      log << "[FAIL] " << check.name << ": " << e.what() << "\n";
    }
  }
  return all_ok;
}

}  // namespace subsketch
