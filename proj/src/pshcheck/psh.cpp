#include <cmath>
#include <limits>
#include <sstream>

#include "curvlab/pshcheck.hpp"

namespace curvlab::pshcheck {

std::vector<GridFunction> kernel_along_maps(const weights::WeightPtr& w, const bergman::Basis& basis,
                                           const numerics::DomainSpec& domain,
                                           std::shared_ptr<const numerics::QuadGrid> grid,
                                           const std::vector<HoloMap>& maps,
                                           const TGridSpec& tgrid) {
  for (const auto& f : maps) {
    if (f.base_dim() != w->base_dim() || f.fiber_dim() != w->fiber_dim()) {
      throw InvalidArgument("kernel_along_map: map " + f.name() + " does not match the weight dimensions");
    }
  }
  const auto nodes = grid_nodes(tgrid);
  std::vector<GridFunction> out(maps.size(), GridFunction{tgrid, {}});
  for (auto& g : out) g.values.reserve(nodes.size());
  for (const CVector& t : nodes) {
    std::vector<CVector> images;
    for (const auto& f : maps) {
      const CVector z = f(t);
      for (Eigen::Index c = 0; c < z.size(); ++c) {
        const auto ci = static_cast<std::size_t>(c);
        const double margin = domain.radii[ci] - domain.radii[ci] / domain.quad_order[ci];
        if (std::abs(z(c)) > margin) {
          std::ostringstream msg;
          msg << "kernel_along_map: " << f.name() << "(t) = " << z(c) << " at t = " << t.transpose()
              << " lies outside the fiber domain";
          throw InvalidArgument(msg.str());
        }
      }
      images.push_back(z);
    }
    const auto gf = bergman::gram(w, basis, grid, t, {.derivatives = false});
    for (std::size_t k = 0; k < maps.size(); ++k) {
      const double value = bergman::kernel_diag(gf, basis, images[k]);
      if (!(value > 0.0)) throw NumericalAbort("kernel_along_map: nonpositive kernel value");
      out[k].values.push_back(value);
    }
  }
  return out;
}

GridFunction kernel_along_map(const weights::WeightPtr& w, const bergman::Basis& basis,
                              const numerics::DomainSpec& domain,
                              std::shared_ptr<const numerics::QuadGrid> grid, const HoloMap& f,
                              const TGridSpec& tgrid) {
  return kernel_along_maps(w, basis, domain, std::move(grid), {f}, tgrid).front();
}

namespace {

struct Stencil {
  const GridFunction& g;
  std::vector<int> base;
  int step;

  double at(const std::vector<std::pair<int, int>>& offsets) const {
    std::vector<int> idx = base;
    for (const auto& [axis, delta] : offsets) idx[axis] += delta * step;
    return g.values[g.flat(idx)];
  }

  double second(int a, int b, double h) const {
    if (a == b) return (at({{a, 1}}) - 2.0 * at({}) + at({{a, -1}})) / (h * h);
    return (at({{a, 1}, {b, 1}}) - at({{a, 1}, {b, -1}}) - at({{a, -1}, {b, 1}}) +
            at({{a, -1}, {b, -1}})) /
           (4.0 * h * h);
  }

  CMatrix hessian(double h) const {
    const int d = g.grid_dim();
    CMatrix out(d, d);
    for (int c = 0; c < d; ++c) {
      for (int e = 0; e < d; ++e) {
        const double xx = second(2 * c, 2 * e, h);
        const double yy = second(2 * c + 1, 2 * e + 1, h);
        const double xy = c == e ? 0.0 : second(2 * c, 2 * e + 1, h);
        const double yx = c == e ? 0.0 : second(2 * c + 1, 2 * e, h);
        out(c, e) = 0.25 * cplx(xx + yy, xy - yx);
      }
    }
    return out;
  }

  // (mean over the four diagonal neighbours in plane c - center) / (2 h^2),
  // which tends to d^2 g / ds_c dconj(s_c).
  double mean_value(int c, double h) const {
    const int x = 2 * c;
    const int y = 2 * c + 1;
    const double mean = 0.25 * (at({{x, 1}, {y, 1}}) + at({{x, 1}, {y, -1}}) +
                                at({{x, -1}, {y, 1}}) + at({{x, -1}, {y, -1}}));
    return (mean - at({})) / (2.0 * h * h);
  }
};

bool interior(const std::vector<int>& axes, int points, int step) {
  for (int a : axes) {
    if (a < step || a > points - 1 - step) return false;
  }
  return true;
}

}  // namespace

HessianField fd_complex_hessian(const GridFunction& g, int step) {
  if (g.points() < 3) throw InvalidArgument("fd_complex_hessian: grid too small (< 3 nodes per axis)");
  HessianField field;
  const double h = step * g.spacing();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto axes = g.axes(i);
    if (!interior(axes, g.points(), step)) continue;
    const Stencil st{g, axes, step};
    CMatrix hess = st.hessian(h);
    field.nodes.push_back(i);
    field.min_eig.push_back(numerics::min_eigenvalue(numerics::HermitianForm(hess)));
    field.hessian.push_back(std::move(hess));
  }
  return field;
}

PshReport psh_report(const GridFunction& g) {
  PshReport report;
  const double h = g.spacing();
  const int d = g.grid_dim();
  report.spacing = h;
  report.field = fd_complex_hessian(g, 1);
  report.interior_nodes = report.field.nodes.size();

  // Error constant from the h / 2h discrepancy: an O(h^2) stencil differs from
  // its 2h counterpart by about 3 C h^2.
  double discrepancy = 0.0;
  double max_abs = 0.0;
  for (double v : g.values) max_abs = std::max(max_abs, std::abs(v));
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto axes = g.axes(i);
    if (!interior(axes, g.points(), 2)) continue;
    const Stencil fine{g, axes, 1};
    const Stencil coarse{g, axes, 2};
    discrepancy = std::max(discrepancy,
                           (fine.hessian(h) - coarse.hessian(2.0 * h)).cwiseAbs().maxCoeff());
    for (int c = 0; c < d; ++c) {
      discrepancy = std::max(discrepancy,
                             std::abs(fine.mean_value(c, h) - coarse.mean_value(c, 2.0 * h)));
    }
  }
  const double a = discrepancy / (3.0 * h * h);
  report.error_constant = 2.0 * a;
  const double rounding_floor = 1e-10 * std::max(1.0, max_abs) / (h * h);
  report.tol_grid = std::max(report.error_constant * h * h, rounding_floor);

  report.min_hessian_eig = std::numeric_limits<double>::infinity();
  report.min_mean_value_defect = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < report.field.nodes.size(); ++n) {
    const std::size_t node = report.field.nodes[n];
    const double eig = report.field.min_eig[n];
    report.min_hessian_eig = std::min(report.min_hessian_eig, eig);
    if (eig < -report.tol_grid) {
      report.violations.push_back({node, g.base_point(node), eig, "hessian"});
      report.hessian_violation_nodes.push_back(node);
    }
    const Stencil st{g, g.axes(node), 1};
    for (int c = 0; c < d; ++c) {
      const double mv = st.mean_value(c, h);
      report.min_mean_value_defect = std::min(report.min_mean_value_defect, mv);
      if (mv < -report.tol_grid) {
        report.violations.push_back({node, g.base_point(node), mv, "mean-value"});
      }
    }
  }
  if (report.field.nodes.empty()) {
    report.min_hessian_eig = 0.0;
    report.min_mean_value_defect = 0.0;
  }
  report.passed = report.violations.empty();
  return report;
}

}  // namespace curvlab::pshcheck
