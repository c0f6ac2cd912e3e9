#include <cmath>
#include <sstream>

#include "curvlab/bergman.hpp"
#include "curvlab/parallel.hpp"

namespace curvlab::bergman {

BergmanFiber::BergmanFiber(weights::WeightPtr weight, Basis basis,
                           std::shared_ptr<const numerics::QuadGrid> grid, CVector t,
                           GramOptions options)
    : weight_(std::move(weight)),
      basis_(std::move(basis)),
      grid_(std::move(grid)),
      t_(std::move(t)),
      options_(options) {
  if (!weight_ || !grid_) throw InvalidArgument("BergmanFiber: null weight or grid");
  if (t_.size() != weight_->base_dim()) {
    throw InvalidArgument("BergmanFiber: base point has dimension " + std::to_string(t_.size()) +
                          ", weight expects " + std::to_string(weight_->base_dim()));
  }
  if (static_cast<int>(grid_->dim) != weight_->fiber_dim() ||
      basis_.fiber_dim() != weight_->fiber_dim()) {
    throw InvalidArgument("BergmanFiber: grid, basis and weight fiber dimensions differ");
  }
  const std::size_t nodes = grid_->size();
  const auto rank = static_cast<Eigen::Index>(basis_.size());
  frame_.resize(rank, static_cast<Eigen::Index>(nodes));
  density_.resize(nodes);
  if (options_.derivatives) jets_.resize(nodes);
  parallel::parallel_for(nodes, [&](std::size_t i) {
    const auto z = grid_->node(i);
    basis_.evaluate(z, std::span<cplx>(frame_.col(static_cast<Eigen::Index>(i)).data(),
                                       static_cast<std::size_t>(rank)));
    thread_local CVector zv;
    zv.resize(static_cast<Eigen::Index>(z.size()));
    for (std::size_t c = 0; c < z.size(); ++c) zv(static_cast<Eigen::Index>(c)) = z[c];
    double phi = 0.0;
    if (options_.derivatives) {
      jets_[i] = weight_->jet(t_, zv);
      phi = jets_[i].phi;
    } else {
      phi = weight_->value(t_, zv);
    }
    density_[i] = grid_->weights[i] * std::exp(-phi);
  });
  for (std::size_t i = 0; i < nodes; ++i) {
    if (!std::isfinite(density_[i])) {
      throw NumericalAbort("BergmanFiber: non-finite density at node " + std::to_string(i));
    }
  }

  std::vector<cplx> ones(nodes, 1.0);
  gram_ = weighted_pairing(frame_, frame_, ones);
  gram_ = 0.5 * (gram_ + gram_.adjoint());
  try {
    chol_ = std::make_unique<numerics::Cholesky>(gram_, "Gram matrix");
  } catch (const NotPositiveDefinite& e) {
    throw NotPositiveDefinite(e.pivot(),
                              "Gram matrix lost definiteness; increase Q or reduce N");
  }
  const double cond = numerics::equilibrated_condition(gram_);
  if (!(cond <= options_.max_condition)) {
    std::ostringstream msg;
    msg << "Gram condition estimate " << cond << " exceeds " << options_.max_condition
        << "; reduce N";
    throw NumericalAbort(msg.str());
  }
}

CMatrix BergmanFiber::weighted_pairing(const CMatrix& left, const CMatrix& right,
                                       std::span<const cplx> node_weight) const {
  const std::size_t nodes = node_count();
  if (static_cast<std::size_t>(left.cols()) != nodes ||
      static_cast<std::size_t>(right.cols()) != nodes || node_weight.size() != nodes) {
    throw InvalidArgument("weighted_pairing: node count mismatch");
  }
  const Eigen::Index p = left.rows();
  const Eigen::Index q = right.rows();
  return parallel::reduce_blocks<CMatrix>(
      nodes,
      [&](std::size_t lo, std::size_t hi) -> CMatrix {
        const auto len = static_cast<Eigen::Index>(hi - lo);
        if (len == 0) return CMatrix::Zero(p, q);
        CMatrix scaled = right.middleCols(static_cast<Eigen::Index>(lo), len);
        for (Eigen::Index c = 0; c < len; ++c) {
          const std::size_t i = lo + static_cast<std::size_t>(c);
          scaled.col(c) *= node_weight[i] * density_[i];
        }
        return left.middleCols(static_cast<Eigen::Index>(lo), len).conjugate() *
               scaled.transpose();
      },
      [](const CMatrix& a, const CMatrix& b) -> CMatrix { return a + b; });
}

const weights::WeightJet& BergmanFiber::jet(std::size_t node) const {
  if (jets_.empty()) throw InvalidArgument("BergmanFiber: built without derivatives");
  return jets_.at(node);
}

GramFamily BergmanFiber::gram_family() const {
  if (jets_.empty()) throw InvalidArgument("BergmanFiber: built without derivatives");
  const int m = base_dim();
  const std::size_t nodes = node_count();
  GramFamily gf;
  gf.t = t_;
  gf.gram = gram_;
  gf.condition = numerics::equilibrated_condition(gram_);
  std::vector<cplx> w(nodes);
  for (int j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < nodes; ++i) w[i] = -jets_[i].phi_t(j);
    gf.d_t.push_back(weighted_pairing(frame_, frame_, w));
  }
  for (int j = 0; j < m; ++j) {
    for (int k = 0; k < m; ++k) {
      for (std::size_t i = 0; i < nodes; ++i) {
        const auto& jet = jets_[i];
        w[i] = jet.phi_t(j) * std::conj(jet.phi_t(k)) - jet.hessian.T(j, k);
      }
      gf.d_tt.push_back(weighted_pairing(frame_, frame_, w));
    }
  }
  return gf;
}

namespace {
CMatrix as_row(std::span<const cplx> a) {
  CMatrix row(1, static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) row(0, static_cast<Eigen::Index>(i)) = a[i];
  return row;
}
}  // namespace

cplx BergmanFiber::inner(std::span<const cplx> a, std::span<const cplx> b) const {
  return inner(as_row(a), as_row(b))(0, 0);
}

CVector BergmanFiber::moments(std::span<const cplx> a) const {
  return moments(as_row(a)).col(0);
}

CVector BergmanFiber::project(std::span<const cplx> a) const {
  return chol_->solve(moments(a));
}

cplx BergmanFiber::complement_pairing(std::span<const cplx> a, std::span<const cplx> b) const {
  return complement_pairing(as_row(a), as_row(b))(0, 0);
}

CMatrix BergmanFiber::inner(const CMatrix& a, const CMatrix& b) const {
  const std::vector<cplx> ones(node_count(), 1.0);
  return weighted_pairing(b, a, ones);
}

CMatrix BergmanFiber::moments(const CMatrix& a) const {
  const std::vector<cplx> ones(node_count(), 1.0);
  return weighted_pairing(frame_, a, ones);
}

CMatrix BergmanFiber::complement_pairing(const CMatrix& a, const CMatrix& b) const {
  const CMatrix va = moments(a);
  const CMatrix vb = moments(b);
  return inner(a, b) - vb.adjoint() * chol_->solve(va);
}

std::vector<cplx> BergmanFiber::section_values(const CVector& coeffs) const {
  if (coeffs.size() != frame_.rows()) throw InvalidArgument("section_values: size mismatch");
  const CVector values = frame_.transpose() * coeffs;
  return {values.data(), values.data() + values.size()};
}

// ---------------------------------------------------------------------------

GramFamily gram(const weights::WeightPtr& w, const Basis& basis,
                std::shared_ptr<const numerics::QuadGrid> grid, const CVector& t,
                GramOptions options) {
  BergmanFiber fiber(w, basis, std::move(grid), t, options);
  if (!options.derivatives) {
    GramFamily gf;
    gf.t = t;
    gf.gram = fiber.gram();
    gf.condition = numerics::equilibrated_condition(gf.gram);
    return gf;
  }
  return fiber.gram_family();
}

double kernel_diag(const GramFamily& gf, const Basis& basis, const CVector& z) {
  return kernel(gf, basis, z, z).real();
}

cplx kernel(const GramFamily& gf, const Basis& basis, const CVector& z, const CVector& w) {
  if (gf.rank() != basis.size()) throw InvalidArgument("kernel: basis does not match Gram");
  const numerics::Cholesky chol(gf.gram, "Gram matrix");
  const CVector ew = basis.evaluate(w).conjugate();
  return basis.evaluate(z).transpose() * chol.solve(ew);
}

}  // namespace curvlab::bergman
