#include <cmath>
#include <limits>
#include <sstream>

#include "curvlab/weights.hpp"

namespace curvlab::weights {

HessianBlocks hessian_blocks(const WeightModel& w, const CVector& t, const CVector& z) {
  return w.jet(t, z).hessian;
}

namespace {

std::string describe(const CVector& t, const CVector& z) {
  std::ostringstream out;
  out << "(t=";
  for (Eigen::Index i = 0; i < t.size(); ++i) out << (i ? "," : "") << t(i);
  out << ", z=";
  for (Eigen::Index i = 0; i < z.size(); ++i) out << (i ? "," : "") << z(i);
  out << ")";
  return out.str();
}

bool z_block_degenerate(const CMatrix& z) {
  const Eigen::VectorXd ev = numerics::eigenvalues(numerics::HermitianForm(z));
  const double scale = std::max(1.0, std::abs(ev(ev.size() - 1)));
  return !(ev(0) > 1e-12 * scale);
}

}  // namespace

numerics::HermitianForm schur_D(const HessianBlocks& blocks) {
  if (z_block_degenerate(blocks.Z)) throw DegenerateHessian("degenerate fiber Hessian");
  const numerics::Cholesky chol(0.5 * (blocks.Z + blocks.Z.adjoint()), "fiber Hessian");
  const CMatrix zinv_bh = chol.solve(CMatrix(blocks.B.adjoint()));
  const CMatrix d = blocks.T - blocks.B * zinv_bh;
  return numerics::HermitianForm(0.5 * (d + d.adjoint()));
}

numerics::HermitianForm schur_D(const WeightModel& w, const CVector& t, const CVector& z) {
  try {
    return schur_D(hessian_blocks(w, t, z));
  } catch (const DegenerateHessian&) {
    throw DegenerateHessian("degenerate fiber Hessian at " + describe(t, z));
  } catch (const NotPositiveDefinite&) {
    throw DegenerateHessian("degenerate fiber Hessian at " + describe(t, z));
  }
}

PshWeightReport check_psh(const WeightModel& w, std::span<const Point> probes) {
  PshWeightReport report;
  for (const Point& p : probes) {
    PshProbe probe;
    probe.point = p;
    const HessianBlocks blocks = hessian_blocks(w, p.t, p.z);
    const CMatrix full = blocks.full();
    const Eigen::VectorXd ev = numerics::eigenvalues(numerics::HermitianForm(full));
    probe.full_min_eig = ev(0);
    const double scale = std::max(1.0, std::abs(ev(ev.size() - 1)));
    const bool full_pd = ev(0) > 1e-12 * scale;
    if (!full_pd || z_block_degenerate(blocks.Z)) {
      probe.degenerate = true;
      probe.schur_min_eig = std::numeric_limits<double>::quiet_NaN();
      ++report.degenerate_count;
      // A singular Hessian is still required to be positive semidefinite.
      probe.ok = ev(0) >= -1e-10 * scale;
    } else {
      const numerics::HermitianForm d = schur_D(blocks);
      probe.schur_min_eig = numerics::min_eigenvalue(d);
      const cplx det_full = full.determinant();
      const cplx det_split = blocks.Z.determinant() * d.symmetrized().determinant();
      const double det_scale = std::max(std::abs(det_full), std::abs(det_split));
      probe.det_identity_residual =
          det_scale > 0.0 ? std::abs(det_full - det_split) / det_scale : 0.0;
      probe.ok = probe.schur_min_eig >= -1e-10 && probe.det_identity_residual <= 1e-8;
    }
    if (!probe.ok) ++report.violations;
    report.probes.push_back(std::move(probe));
  }
  report.passed = report.violations == 0;
  return report;
}

}  // namespace curvlab::weights
