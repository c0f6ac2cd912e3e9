#include <algorithm>

#include "curvlab/curvature.hpp"

namespace curvlab::curvature {

cplx CurvatureAssembly::nakano_form(const std::vector<CVector>& u) const {
  if (static_cast<int>(u.size()) != m) throw InvalidArgument("nakano_form: tuple size mismatch");
  cplx acc = 0.0;
  for (int j = 0; j < m; ++j) {
    for (int k = 0; k < m; ++k) acc += u[k].dot(block(j, k) * u[j]);
  }
  return acc;
}

CMatrix CurvatureAssembly::stacked() const {
  const Eigen::Index r = metric().rows();
  CMatrix s(m * r, m * r);
  for (int j = 0; j < m; ++j) {
    for (int k = 0; k < m; ++k) s.block(k * r, j * r, r, r) = block(j, k);
  }
  return s;
}

double CurvatureAssembly::block_asymmetry() const {
  double worst = 0.0;
  double scale = std::max(1.0, family.gram.cwiseAbs().maxCoeff());
  for (const auto& b : blocks) scale = std::max(scale, b.cwiseAbs().maxCoeff());
  for (int j = 0; j < m; ++j) {
    for (int k = 0; k < m; ++k) {
      worst = std::max(worst, (block(j, k) - block(k, j).adjoint()).cwiseAbs().maxCoeff());
    }
  }
  return worst / scale;
}

CurvatureAssembly curvature_direct(const bergman::GramFamily& gf) {
  const int m = gf.base_dim();
  if (m == 0 || gf.d_tt.size() != static_cast<std::size_t>(m * m)) {
    throw InvalidArgument("curvature_direct: Gram family lacks t-derivatives");
  }
  const numerics::Cholesky chol(gf.gram, "Gram matrix");
  std::vector<CMatrix> connection;  // M^{-1} M_j
  for (int j = 0; j < m; ++j) connection.push_back(chol.solve(gf.first(j)));
  CurvatureAssembly ca;
  ca.m = m;
  ca.family = gf;
  for (int j = 0; j < m; ++j) {
    for (int k = 0; k < m; ++k) {
      ca.blocks.push_back(gf.first(k).adjoint() * connection[j] - gf.second(j, k));
    }
  }
  return ca;
}

CurvatureAssembly curvature_via_second_fundamental_form(const bergman::BergmanFiber& fiber) {
  const int m = fiber.base_dim();
  const std::size_t nodes = fiber.node_count();
  const CMatrix& frame = fiber.frame_values();

  // Rows of shifted[j] are phi_j e_alpha on the nodes (D^F_j e_alpha up to sign).
  std::vector<CMatrix> shifted(m, CMatrix(frame.rows(), frame.cols()));
  for (int j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < nodes; ++i) {
      const auto col = static_cast<Eigen::Index>(i);
      shifted[j].col(col) = fiber.jet(i).phi_t(j) * frame.col(col);
    }
  }

  CurvatureAssembly ca;
  ca.m = m;
  ca.family = fiber.gram_family();
  ca.blocks.clear();
  std::vector<cplx> w(nodes);
  for (int j = 0; j < m; ++j) {
    for (int k = 0; k < m; ++k) {
      for (std::size_t i = 0; i < nodes; ++i) w[i] = fiber.jet(i).hessian.T(j, k);
      const CMatrix ambient = fiber.weighted_pairing(frame, frame, w);
      ca.blocks.push_back(ambient - fiber.complement_pairing(shifted[j], shifted[k]));
    }
  }
  return ca;
}

double route_deviation(const CurvatureAssembly& a, const CurvatureAssembly& b) {
  if (a.m != b.m || a.metric().rows() != b.metric().rows()) {
    throw InvalidArgument("route_deviation: assemblies have different shapes");
  }
  const double scale = numerics::frobenius(a.metric());
  double worst = 0.0;
  for (std::size_t i = 0; i < a.blocks.size(); ++i) {
    worst = std::max(worst, numerics::frobenius(a.blocks[i] - b.blocks[i]));
  }
  return worst / scale;
}

double max_block_norm(const CurvatureAssembly& ca) {
  double worst = 0.0;
  for (const auto& b : ca.blocks) worst = std::max(worst, numerics::frobenius(b));
  return worst / numerics::frobenius(ca.metric());
}

}  // namespace curvlab::curvature
