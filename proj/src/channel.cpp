#include "subsketch/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

#include "subsketch/errors.hpp"

namespace subsketch {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

ScatteringProfile ScatteringProfile::points(std::vector<Scatterer> comps) {
  if (comps.empty()) throw EmptyProfile("profile has no components");
  double total = 0.0;
  for (const auto& c : comps) {
    if (c.power < 0.0) throw EmptyProfile("negative scatterer power");
    total += c.power;
  }
  // All-zero profiles are degenerate but representable, so the zero-channel
  // limit stays expressible; estimation pipelines always carry power.
  ScatteringProfile p;
  p.components_ = std::move(comps);
  p.total_power_ = total;
  return p;
}

ScatteringProfile ScatteringProfile::band(double theta_lo, double theta_hi,
                                          double total_power, int n_points) {
  if (!(theta_hi > theta_lo)) throw EmptyProfile("band: empty angular range");
  if (!(total_power > 0.0)) throw EmptyProfile("band: nonpositive power");
  if (n_points < 1) throw EmptyProfile("band: need at least one point");
  std::vector<Scatterer> comps;
  comps.reserve(static_cast<std::size_t>(n_points));
  const double step = (theta_hi - theta_lo) / n_points;
  for (int l = 0; l < n_points; ++l)
    comps.push_back({theta_lo + (l + 0.5) * step, total_power / n_points});
  return points(std::move(comps));
}

SamplingOperator SamplingOperator::selection(std::vector<int> indices, int M) {
  const int m = static_cast<int>(indices.size());
  if (m < 1 || m > M) throw InvalidDim("selection: need 1 <= m <= M");
  for (int i = 0; i < m; ++i) {
    if (indices[static_cast<std::size_t>(i)] < 0 ||
        indices[static_cast<std::size_t>(i)] >= M)
      throw InvalidDim("selection: index out of range");
    if (i > 0 && indices[static_cast<std::size_t>(i)] <=
                     indices[static_cast<std::size_t>(i - 1)])
      throw InvalidDim("selection: indices must be strictly increasing");
  }
  SamplingOperator op;
  op.kind_ = SamplerKind::BinarySelection;
  op.m_ = m;
  op.M_ = M;
  op.indices_ = std::move(indices);
  return op;
}

SamplingOperator SamplingOperator::phase_shift(Eigen::MatrixXi lattice,
                                               int bits, int M) {
  if (bits < 1 || bits > 16) throw InvalidDim("phase_shift: need 1 <= b <= 16");
  if (lattice.cols() != M || lattice.rows() < 1)
    throw InvalidDim("phase_shift: lattice must be m x M with m >= 1");
  const int levels = 1 << bits;
  if ((lattice.array() < 0).any() || (lattice.array() >= levels).any())
    throw InvalidDim("phase_shift: lattice entry out of range");
  SamplingOperator op;
  op.kind_ = SamplerKind::PhaseShift;
  op.m_ = static_cast<int>(lattice.rows());
  op.M_ = M;
  op.bits_ = bits;
  op.lattice_ = std::move(lattice);
  // Row-whitened operator: (B B^H)^{-1/2} B.
  const CMatrix B = op.matrix();
  const CMatrix S = B * B.adjoint();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(S);
  const RVector inv_sqrt =
      es.eigenvalues().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
  op.whitened_ = es.eigenvectors() * inv_sqrt.asDiagonal() *
                 es.eigenvectors().adjoint() * B;
  return op;
}

const std::vector<int>& SamplingOperator::indices() const {
  if (kind_ != SamplerKind::BinarySelection)
    throw WrongGeometry("indices(): not a selection operator");
  return indices_;
}

const Eigen::MatrixXi& SamplingOperator::phase_lattice() const {
  if (kind_ != SamplerKind::PhaseShift)
    throw WrongGeometry("phase_lattice(): not a phase-shift operator");
  return lattice_;
}

CMatrix SamplingOperator::matrix() const {
  CMatrix B = CMatrix::Zero(m_, M_);
  if (kind_ == SamplerKind::BinarySelection) {
    for (int r = 0; r < m_; ++r)
      B(r, indices_[static_cast<std::size_t>(r)]) = 1.0;
  } else {
    const double scale = 1.0 / std::sqrt(static_cast<double>(M_));
    const int levels = 1 << bits_;
    for (int r = 0; r < m_; ++r)
      for (int c = 0; c < M_; ++c)
        B(r, c) = std::polar(scale, kTwoPi * lattice_(r, c) / levels);
  }
  return B;
}

const CMatrix& SamplingOperator::effective_matrix() const {
  if (kind_ != SamplerKind::PhaseShift)
    throw WrongGeometry("effective_matrix(): only for phase-shift operators");
  return whitened_;
}

SamplingOperator draw_selection(int m, int M, Rng& rng) {
  if (m < 1 || m > M) throw InvalidDim("draw_selection: need 1 <= m <= M");
  return SamplingOperator::selection(rng.subset(m, M), M);
}

SamplingOperator draw_phase_shift(int m, int M, int bits, Rng& rng) {
  if (m < 1 || M < 1) throw InvalidDim("draw_phase_shift: need m, M >= 1");
  if (bits < 1 || bits > 16)
    throw InvalidDim("draw_phase_shift: need 1 <= b <= 16");
  Eigen::MatrixXi lattice(m, M);
  const std::uint64_t levels = 1ULL << bits;
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < M; ++c)
      lattice(r, c) = static_cast<int>(rng.below(levels));
  return SamplingOperator::phase_shift(std::move(lattice), bits, M);
}

CMatrix true_covariance(const ScatteringProfile& profile,
                        const ArrayGeometry& geom) {
  if (geom.kind != ArrayKind::Ula)
    throw WrongGeometry("true_covariance: angular profiles describe ULAs");
  CMatrix S = CMatrix::Zero(geom.M, geom.M);
  for (const auto& c : profile.components()) {
    if (c.power == 0.0) continue;
    const CVector a = ula_response(geom, c.theta);
    S.noalias() += c.power * a * a.adjoint();
  }
  return 0.5 * (S + S.adjoint().eval());
}

CVector sample_channel(const ScatteringProfile& profile,
                       const ArrayGeometry& geom, Rng& rng) {
  if (geom.kind != ArrayKind::Ula)
    throw WrongGeometry("sample_channel: angular profiles describe ULAs");
  CVector h = CVector::Zero(geom.M);
  // One gain draw per component regardless of its power, so the engine
  // position depends only on the component count.
  for (const auto& c : profile.components()) {
    const Complex w = rng.cgaussian(c.power);
    if (c.power == 0.0) continue;
    h += w * ula_response(geom, c.theta);
  }
  return h;
}

CVector make_sketch(const CVector& h, const SamplingOperator& op, double sigma,
                    Rng& rng, bool noiseless) {
  if (h.size() != op.M()) throw DimMismatch("make_sketch: channel length");
  if (!(sigma > 0.0)) throw DimMismatch("make_sketch: sigma must be positive");
  CVector x(op.m());
  if (op.kind() == SamplerKind::BinarySelection) {
    const auto& idx = op.indices();
    for (int r = 0; r < op.m(); ++r)
      x(r) = h(idx[static_cast<std::size_t>(r)]);
  } else {
    x.noalias() = op.effective_matrix() * h;
  }
  if (!noiseless)
    for (int r = 0; r < op.m(); ++r) x(r) += rng.cgaussian(sigma * sigma);
  return x / sigma;
}

void SketchBatch::validate() const {
  if (operators.size() != static_cast<std::size_t>(T()))
    throw DimMismatch("batch: operator count != T");
  for (const auto& op : operators) {
    if (op.kind() != operators.front().kind())
      throw DimMismatch("batch: mixed operator kinds");
    if (op.m() != m()) throw DimMismatch("batch: operator m != X rows");
  }
  if (!(noise_sigma > 0.0)) throw DimMismatch("batch: nonpositive sigma");
}

}  // namespace subsketch
