#include <cmath>
#include <limits>
#include <random>

#include "curvlab/curvature.hpp"
#include "curvlab/weights.hpp"

namespace curvlab::curvature {

bergman::GramFamily dual_family(const bergman::GramFamily& gf) {
  const int m = gf.base_dim();
  const Eigen::Index r = gf.gram.rows();
  const numerics::Cholesky chol(CMatrix(gf.gram.conjugate()), "dual metric");
  const CMatrix p = chol.solve(CMatrix(CMatrix::Identity(r, r)));

  bergman::GramFamily dual;
  dual.t = gf.t;
  dual.gram = 0.5 * (p + p.adjoint());
  dual.condition = gf.condition;
  // d_j conj(M) = M_j^T, dbar_k conj(M) = conj(M_k), dbar_k M_j^T = M_jk^T
  for (int j = 0; j < m; ++j) dual.d_t.push_back(-p * gf.first(j).transpose() * p);
  for (int j = 0; j < m; ++j) {
    for (int k = 0; k < m; ++k) {
      const CMatrix aj = gf.first(j).transpose();
      const CMatrix ak_bar = gf.first(k).conjugate();
      dual.d_tt.push_back(p * ak_bar * p * aj * p + p * aj * p * ak_bar * p -
                          p * gf.second(j, k).transpose() * p);
    }
  }
  return dual;
}

CurvatureAssembly dual_assembly(const CurvatureAssembly& ca) {
  return curvature_direct(dual_family(ca.family));
}

DualCheckReport dual_curvature_check(const CurvatureAssembly& ca,
                                     const std::vector<std::vector<CVector>>& samples,
                                     double threshold) {
  const CurvatureAssembly dual = dual_assembly(ca);
  const numerics::Cholesky chol(ca.metric(), "Gram matrix");
  DualCheckReport report;
  report.threshold = threshold;
  for (const auto& xi : samples) {
    if (static_cast<int>(xi.size()) != ca.m) throw InvalidArgument("dual check: tuple size");
    std::vector<CVector> u;  // u_j = J xi_j has coefficients M^{-1} conj(xi_j)
    for (const auto& x : xi) u.push_back(chol.solve(CVector(x.conjugate())));
    cplx lhs = 0.0;
    cplx rhs = 0.0;
    double scale = 0.0;
    for (int j = 0; j < ca.m; ++j) {
      for (int k = 0; k < ca.m; ++k) {
        lhs += xi[k].dot(dual.block(j, k) * xi[j]);
        rhs -= u[j].dot(ca.block(j, k) * u[k]);
        // both sides are differences of the frame terms; measure against those too
        scale += xi[k].norm() * xi[j].norm() *
                     (numerics::frobenius(dual.block(j, k)) + numerics::frobenius(dual.family.second(j, k))) +
                 u[j].norm() * u[k].norm() *
                     (numerics::frobenius(ca.block(j, k)) + numerics::frobenius(ca.family.second(j, k)));
      }
    }
    const double diff = std::abs(lhs - rhs);
    const double residual = scale > 0.0 ? diff / scale : diff;
    report.residuals.push_back(residual);
    report.max_residual = std::max(report.max_residual, residual);
  }
  report.passed = report.max_residual <= threshold;
  return report;
}

std::vector<std::vector<CVector>> random_tuples(int m, std::size_t rank, std::size_t count,
                                                unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  std::vector<std::vector<CVector>> tuples(count);
  for (auto& tuple : tuples) {
    for (int j = 0; j < m; ++j) {
      CVector v(static_cast<Eigen::Index>(rank));
      for (auto& c : v) c = cplx(gauss(rng), gauss(rng));
      tuple.push_back(std::move(v));
    }
  }
  return tuples;
}

namespace {

void finalize(InequalityReport& report) {
  report.violations = 0;
  report.min_relative_slack = std::numeric_limits<double>::infinity();
  report.max_relative_gap = 0.0;
  for (const auto& s : report.samples) {
    const double rel = s.scale > 0.0 ? s.slack / s.scale : s.slack;
    report.min_relative_slack = std::min(report.min_relative_slack, rel);
    const double gap = std::abs(s.lhs - s.rhs);
    report.max_relative_gap =
        std::max(report.max_relative_gap, s.scale > 0.0 ? gap / s.scale : gap);
    if (s.slack < -report.tolerance * s.scale) ++report.violations;
  }
  if (report.samples.empty()) report.min_relative_slack = 0.0;
  report.passed = report.violations == 0;
}

std::vector<std::vector<cplx>> tuple_values(const bergman::BergmanFiber& fiber,
                                            const std::vector<CVector>& tuple) {
  std::vector<std::vector<cplx>> values;
  for (const auto& u : tuple) values.push_back(fiber.section_values(u));
  return values;
}

double tuple_norm2(const bergman::BergmanFiber& fiber, const std::vector<CVector>& tuple) {
  double acc = 0.0;
  for (const auto& u : tuple) acc += u.dot(fiber.gram() * u).real();
  return acc;
}

cplx integrate_density(const bergman::BergmanFiber& fiber, std::span<const cplx> g) {
  const std::vector<cplx> ones(fiber.node_count(), 1.0);
  return fiber.inner(g, ones);
}

void require_tuple(const bergman::BergmanFiber& fiber, const std::vector<CVector>& tuple) {
  if (static_cast<int>(tuple.size()) != fiber.base_dim()) {
    throw InvalidArgument("tuple has " + std::to_string(tuple.size()) + " sections, expected " +
                          std::to_string(fiber.base_dim()));
  }
  for (const auto& u : tuple) {
    if (static_cast<std::size_t>(u.size()) != fiber.basis().size()) {
      throw InvalidArgument("tuple section has the wrong length");
    }
  }
}

}  // namespace

InequalityReport hormander_check(const bergman::BergmanFiber& fiber,
                                 const std::vector<std::vector<CVector>>& tuples,
                                 double tolerance) {
  InequalityReport report;
  report.tolerance = tolerance;
  const int m = fiber.base_dim();
  const int n = fiber.weight().fiber_dim();
  const std::size_t nodes = fiber.node_count();

  // Z^{-1} per node, shared by every tuple.
  std::vector<CMatrix> z_inverse(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    const CMatrix& z = fiber.jet(i).hessian.Z;
    try {
      z_inverse[i] = numerics::Cholesky(0.5 * (z + z.adjoint()))
                         .solve(CMatrix(CMatrix::Identity(n, n)));
    } catch (const NotPositiveDefinite&) {
      throw DegenerateHessian("degenerate fiber Hessian at node " + std::to_string(i));
    }
  }

  for (const auto& tuple : tuples) {
    require_tuple(fiber, tuple);
    const auto values = tuple_values(fiber, tuple);
    std::vector<cplx> source(nodes);
    std::vector<cplx> bound(nodes);
    for (std::size_t i = 0; i < nodes; ++i) {
      const auto& jet = fiber.jet(i);
      cplx a = 0.0;
      CVector f = CVector::Zero(n);
      for (int j = 0; j < m; ++j) {
        a += jet.phi_t(j) * values[j][i];
        f += values[j][i] * jet.hessian.B.row(j).transpose();
      }
      source[i] = a;
      bound[i] = (f.transpose() * z_inverse[i] * f.conjugate())(0, 0);
    }
    InequalitySample s;
    s.lhs = fiber.complement_pairing(source, source).real();
    s.rhs = integrate_density(fiber, bound).real();
    s.scale = std::max({std::abs(s.lhs), std::abs(s.rhs), tuple_norm2(fiber, tuple)});
    s.slack = s.rhs - s.lhs;
    report.samples.push_back(s);
  }
  finalize(report);
  return report;
}

InequalityReport lower_bound_check(const CurvatureAssembly& ca,
                                   const bergman::BergmanFiber& fiber,
                                   const std::vector<std::vector<CVector>>& tuples,
                                   double tolerance) {
  InequalityReport report;
  report.tolerance = tolerance;
  const int m = fiber.base_dim();
  const std::size_t nodes = fiber.node_count();
  if (ca.m != m) throw InvalidArgument("lower_bound_check: assembly does not match fiber");

  std::vector<CMatrix> schur(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    try {
      schur[i] = weights::schur_D(fiber.jet(i).hessian).symmetrized();
    } catch (const DegenerateHessian&) {
      throw DegenerateHessian("degenerate fiber Hessian at node " + std::to_string(i));
    }
  }

  for (const auto& tuple : tuples) {
    require_tuple(fiber, tuple);
    const auto values = tuple_values(fiber, tuple);
    std::vector<cplx> density(nodes);
    for (std::size_t i = 0; i < nodes; ++i) {
      cplx acc = 0.0;
      for (int j = 0; j < m; ++j) {
        for (int k = 0; k < m; ++k) acc += schur[i](j, k) * values[j][i] * std::conj(values[k][i]);
      }
      density[i] = acc;
    }
    InequalitySample s;
    s.lhs = ca.nakano_form(tuple).real();
    s.rhs = integrate_density(fiber, density).real();
    s.scale = std::max({std::abs(s.lhs), std::abs(s.rhs), tuple_norm2(fiber, tuple)});
    s.slack = s.lhs - s.rhs;
    report.samples.push_back(s);
  }
  finalize(report);
  return report;
}

}  // namespace curvlab::curvature
