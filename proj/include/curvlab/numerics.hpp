#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "curvlab/errors.hpp"

namespace curvlab {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

}  // namespace curvlab

namespace curvlab::numerics {

enum class DomainKind { disc, polydisc, plane_truncation };

std::string to_string(DomainKind kind);
DomainKind domain_kind_from_string(const std::string& name);

/// Integration domain in C^n. One radius and one radial order per complex
/// coordinate; a disc is the n = 1 polydisc.
struct DomainSpec {
  DomainKind kind = DomainKind::disc;
  std::vector<double> radii;
  std::vector<int> quad_order;
  /// Plane truncations must declare that the weight decays like a Gaussian
  /// beyond the cutoff; the cutoff itself is radii[i].
  bool gaussian_decay = false;

  std::size_t dimension() const { return radii.size(); }
  void validate() const;
};

/// Tensor quadrature rule over a product of planar regions. Nodes are stored
/// coordinate-major per node: node(i)[c] is coordinate c of node i.
struct QuadGrid {
  std::size_t dim = 1;
  std::vector<cplx> nodes;
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
  std::span<const cplx> node(std::size_t i) const {
    return {nodes.data() + i * dim, dim};
  }
  double total_weight() const;
};

/// Polar Gauss-Legendre in the radius times the trapezoid rule in the angle,
/// tensored over coordinates. Per coordinate: Q radial nodes, 2Q angles.
QuadGrid build_grid(const DomainSpec& domain);

/// Rule for a whole complex line, through s = r^2 / (1 + r^2) on [0, 1).
QuadGrid build_plane_chart_grid(int radial_order, int angular_count);

/// Tail bound e^{-R^2} R^{2N+2} for a Gaussian weight truncated at radius R.
double gaussian_tail_bound(double radius, int max_degree);
/// Smallest radius (to 0.25) satisfying gaussian_tail_bound < target.
double gaussian_cutoff_radius(int max_degree, double target = 1e-12);

/// Weighted sum over grid nodes in a fixed pairwise order.
cplx integrate(std::span<const cplx> values, const QuadGrid& grid);
/// Same contract as `integrate`, evaluating f at every node.
cplx integrate(const std::function<cplx(std::span<const cplx>)>& f,
               const QuadGrid& grid);

// ---------------------------------------------------------------------------
// Hermitian forms

/// Square complex matrix that is read as a Hermitian form after
/// symmetrization (F + F^H) / 2.
class HermitianForm {
 public:
  HermitianForm() = default;
  explicit HermitianForm(CMatrix m);

  const CMatrix& raw() const { return m_; }
  CMatrix symmetrized() const;
  /// max |F - F^H| / max(1, max |F|)
  double asymmetry() const;
  Eigen::Index size() const { return m_.rows(); }

 private:
  CMatrix m_;
};

inline constexpr double kAsymmetryWarn = 1e-8;
inline constexpr double kAsymmetryError = 1e-4;

/// Smallest eigenvalue of the symmetrized form. Asymmetry above 1e-4 is an
/// error, above 1e-8 a recorded warning.
double min_eigenvalue(const HermitianForm& form);
/// All eigenvalues ascending.
Eigen::VectorXd eigenvalues(const HermitianForm& form);

/// Smallest lambda with form - lambda * metric singular; metric must be HPD.
double min_generalized_eigenvalue(const HermitianForm& form,
                                  const HermitianForm& metric);

/// Cholesky factorization of a Hermitian positive definite matrix that
/// reports the failing pivot.
class Cholesky {
 public:
  explicit Cholesky(const CMatrix& m, const std::string& context = {});

  CVector solve(const CVector& rhs) const;
  CMatrix solve(const CMatrix& rhs) const;
  /// L^{-1} b
  CMatrix solve_lower(const CMatrix& rhs) const;
  const CMatrix& lower() const { return l_; }
  double log_det() const;

 private:
  CMatrix l_;
};

/// Solve M x = b with M Hermitian positive definite. One step of iterative
/// refinement; relative residual checked against 1e-10.
CVector solve_hpd(const HermitianForm& form, const CVector& rhs);

/// 2-norm condition number of D^{-1/2} M D^{-1/2}, D = diag(M).
double equilibrated_condition(const CMatrix& m);

double frobenius(const CMatrix& m);

// ---------------------------------------------------------------------------
// Warnings

/// Process-wide sink for numerical warnings (asymmetry, tail bounds).
void record_warning(const std::string& message);
std::vector<std::string> take_warnings();

}  // namespace curvlab::numerics
