#pragma once

#include <memory>
#include <span>
#include <vector>

#include "curvlab/numerics.hpp"
#include "curvlab/weights.hpp"

namespace curvlab::bergman {

/// Monomial frame z^alpha, |alpha| <= N, in graded-lexicographic order.
class Basis {
 public:
  Basis(int fiber_dim, int max_degree);

  int fiber_dim() const { return n_; }
  int max_degree() const { return degree_; }
  std::size_t size() const { return indices_.size(); }
  const std::vector<std::vector<int>>& indices() const { return indices_; }
  /// Position of a multi-index, or size() when absent.
  std::size_t index_of(const std::vector<int>& alpha) const;

  void evaluate(std::span<const cplx> z, std::span<cplx> out) const;
  CVector evaluate(const CVector& z) const;

 private:
  int n_;
  int degree_;
  std::vector<std::vector<int>> indices_;
};

/// Metric of the monomial frame at a base point and its t-derivatives.
/// Convention: gram(a, b) = (e_b, e_a)_t = int conj(e_a) e_b e^{-phi}, so that
/// (u, v)_t = v^H gram u for coefficient vectors u, v.
struct GramFamily {
  CVector t;
  CMatrix gram;
  std::vector<CMatrix> d_t;   ///< d/dt_j of gram
  std::vector<CMatrix> d_tt;  ///< d^2/dt_j dconj(t_k) of gram, index j * m + k
  double condition = 0.0;     ///< equilibrated condition estimate of gram

  int base_dim() const { return static_cast<int>(d_t.size()); }
  std::size_t rank() const { return static_cast<std::size_t>(gram.rows()); }
  const CMatrix& first(int j) const { return d_t.at(j); }
  const CMatrix& second(int j, int k) const { return d_tt.at(j * base_dim() + k); }
  /// (u, v)_t
  cplx inner(const CVector& u, const CVector& v) const { return v.dot(gram * u); }
};

struct GramOptions {
  bool derivatives = true;
  double max_condition = 1e12;
};

/// Quadrature data for the truncated space A^2_t at one base point: frame
/// values, densities e^{-phi} and (with derivatives) weight jets at every
/// node. Immutable.
class BergmanFiber {
 public:
  BergmanFiber(weights::WeightPtr weight, Basis basis,
               std::shared_ptr<const numerics::QuadGrid> grid, CVector t,
               GramOptions options = {});

  const weights::WeightModel& weight() const { return *weight_; }
  const weights::WeightPtr& weight_ptr() const { return weight_; }
  const Basis& basis() const { return basis_; }
  const numerics::QuadGrid& grid() const { return *grid_; }
  const CVector& t() const { return t_; }
  std::size_t node_count() const { return grid_->size(); }
  int base_dim() const { return weight_->base_dim(); }

  /// rank x nodes, column i holds the frame at node i.
  const CMatrix& frame_values() const { return frame_; }
  /// Requires a fiber built with derivatives.
  const weights::WeightJet& jet(std::size_t node) const;
  const CMatrix& gram() const { return gram_; }

  /// Gram matrix with analytic t-derivative integrands.
  GramFamily gram_family() const;

  /// int a conj(b) e^{-phi}
  cplx inner(std::span<const cplx> a, std::span<const cplx> b) const;
  /// v(alpha) = int a conj(e_alpha) e^{-phi}
  CVector moments(std::span<const cplx> a) const;
  /// Coefficients of the orthogonal projection of a onto the frame span.
  CVector project(std::span<const cplx> a) const;
  /// (pi_perp a, pi_perp b) = (a, b) - v_b^H M^{-1} v_a
  cplx complement_pairing(std::span<const cplx> a, std::span<const cplx> b) const;

  /// Batched forms; rows of `a` and `b` are functions sampled on the nodes.
  /// Entry (q, p) pairs a_p with b_q.
  CMatrix inner(const CMatrix& a, const CMatrix& b) const;
  CMatrix moments(const CMatrix& a) const;
  CMatrix complement_pairing(const CMatrix& a, const CMatrix& b) const;

  /// Values of the section with the given coefficients at every node.
  std::vector<cplx> section_values(const CVector& coeffs) const;

  /// sum_i conj(left(:, i)) * w_i * right(:, i)^T, reduced in node blocks.
  CMatrix weighted_pairing(const CMatrix& left, const CMatrix& right,
                           std::span<const cplx> node_weight) const;

 private:
  weights::WeightPtr weight_;
  Basis basis_;
  std::shared_ptr<const numerics::QuadGrid> grid_;
  CVector t_;
  GramOptions options_;
  CMatrix frame_;
  std::vector<double> density_;
  std::vector<weights::WeightJet> jets_;
  CMatrix gram_;
  std::unique_ptr<numerics::Cholesky> chol_;
};

GramFamily gram(const weights::WeightPtr& w, const Basis& basis,
                std::shared_ptr<const numerics::QuadGrid> grid, const CVector& t,
                GramOptions options = {});

/// K_t(z, z) = e(z)^T M^{-1} conj(e(z)), the squared norm of evaluation at z.
double kernel_diag(const GramFamily& gf, const Basis& basis, const CVector& z);
/// K_t(z, w) = e(z)^T M^{-1} conj(e(w))
cplx kernel(const GramFamily& gf, const Basis& basis, const CVector& z, const CVector& w);

}  // namespace curvlab::bergman
