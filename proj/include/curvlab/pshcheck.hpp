#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "curvlab/bergman.hpp"
#include "curvlab/numerics.hpp"
#include "curvlab/weights.hpp"

namespace curvlab::pshcheck {

/// Holomorphic map from the base U in C^m into the fiber domain in C^n.
class HoloMap {
 public:
  using Evaluator = std::function<CVector(const CVector&)>;

  HoloMap(std::string name, int base_dim, int fiber_dim, Evaluator f);

  /// f(t) = c + L t + (t^T Q_l t)_l with one symmetric m x m matrix per
  /// output coordinate.
  static HoloMap polynomial(CVector constant, CMatrix linear, std::vector<CMatrix> quadratic);

  CVector operator()(const CVector& t) const { return f_(t); }
  const std::string& name() const { return name_; }
  int base_dim() const { return m_; }
  int fiber_dim() const { return n_; }

  /// max |dbar f| over probes by central differences.
  double cauchy_riemann_residual(const std::vector<CVector>& probes, double h = 1e-5) const;

 private:
  std::string name_;
  int m_;
  int n_;
  Evaluator f_;
};

/// Uniform square grid in one or two complex parameters s, embedded in the
/// base by t = center + directions * s. Real axes ordered (x_1, y_1, x_2, y_2)
/// with the first axis varying slowest.
struct TGridSpec {
  CVector center;
  double half_width = 1.0;
  int points = 21;
  CMatrix directions;  ///< m x grid_dim; empty means identity

  int grid_dim() const;
  double spacing() const { return 2.0 * half_width / (points - 1); }
};

struct GridFunction {
  TGridSpec spec;
  std::vector<double> values;

  int grid_dim() const { return spec.grid_dim(); }
  std::size_t size() const { return values.size(); }
  double spacing() const { return spec.spacing(); }
  int points() const { return spec.points; }
  /// Axis indices of a flat node index.
  std::vector<int> axes(std::size_t node) const;
  std::size_t flat(const std::vector<int>& axes) const;
  CVector grid_point(std::size_t node) const;  ///< s in C^grid_dim
  CVector base_point(std::size_t node) const;  ///< t in C^m
};

/// Every node of the grid described by spec, in flat order.
std::vector<CVector> grid_nodes(const TGridSpec& spec);

/// Samples g at every grid node.
GridFunction sample(const TGridSpec& spec, const std::function<double(const CVector&)>& g);

/// K_t(f(t), f(t)) over the grid. `domain_radii` bound the fiber domain;
/// f(t) must stay inside by one radial cell R / Q.
GridFunction kernel_along_map(const weights::WeightPtr& w, const bergman::Basis& basis,
                              const numerics::DomainSpec& domain,
                              std::shared_ptr<const numerics::QuadGrid> grid, const HoloMap& f,
                              const TGridSpec& tgrid);

/// Same as kernel_along_map for several maps, one Gram per grid node.
std::vector<GridFunction> kernel_along_maps(const weights::WeightPtr& w, const bergman::Basis& basis,
                                           const numerics::DomainSpec& domain,
                                           std::shared_ptr<const numerics::QuadGrid> grid,
                                           const std::vector<HoloMap>& maps,
                                           const TGridSpec& tgrid);

GridFunction log_of(const GridFunction& g);

struct HessianField {
  std::vector<std::size_t> nodes;  ///< interior node indices
  std::vector<CMatrix> hessian;    ///< grid_dim square, d^2 g / ds_j dconj(s_k)
  std::vector<double> min_eig;
};

/// Central-difference complex Hessian (5-point for one parameter, 9-point
/// cross stencils for two) at interior nodes at distance `step` from the
/// border, in multiples of the grid spacing.
HessianField fd_complex_hessian(const GridFunction& g, int step = 1);

struct PshViolation {
  std::size_t node;
  CVector t;
  double value;  ///< offending Hessian eigenvalue or mean-value defect
  std::string kind;  ///< "hessian" or "mean-value"
};

struct PshReport {
  double spacing = 0.0;
  double tol_grid = 0.0;        ///< C h^2 (plus a rounding floor)
  double error_constant = 0.0;  ///< C
  double min_hessian_eig = 0.0;
  double min_mean_value_defect = 0.0;  ///< scaled like a Hessian eigenvalue
  std::size_t interior_nodes = 0;
  std::vector<PshViolation> violations;
  std::vector<std::size_t> hessian_violation_nodes;
  bool passed = true;
  HessianField field;
};

/// Certifies plurisubharmonicity of grid data two ways: finite-difference
/// complex Hessians and a sub-mean-value test on the circle through the four
/// diagonal neighbours (radius h sqrt 2). The tolerance C h^2 takes C from
/// the discrepancy between the h and 2h stencils.
PshReport psh_report(const GridFunction& g);

/// CSV with columns t_re,t_im (per base coordinate) and value.
void write_csv(std::ostream& out, const GridFunction& g);

}  // namespace curvlab::pshcheck
