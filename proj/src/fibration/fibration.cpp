#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "curvlab/errors.hpp"
#include "curvlab/fibration.hpp"

namespace curvlab::fibration {

namespace {

/// l * psi(t, zeta) as a weight on U x C.
class LinePowerWeight final : public weights::WeightModel {
 public:
  LinePowerWeight(PotentialPtr psi, int l) : psi_(std::move(psi)), l_(l) {}

  int base_dim() const override { return psi_->base_dim(); }
  int fiber_dim() const override { return 1; }
  double value(const CVector& t, const CVector& z) const override {
    return l_ * psi_->value(t, z(0));
  }
  weights::WeightJet jet(const CVector& t, const CVector& z) const override {
    const PotentialJet p = psi_->jet(t, z(0));
    const int m = base_dim();
    weights::WeightJet j;
    j.phi = l_ * p.psi;
    j.phi_t = l_ * p.psi_t;
    j.hessian.T = l_ * p.psi_tt;
    j.hessian.B = CMatrix(m, 1);
    j.hessian.B.col(0) = l_ * p.psi_tz;
    j.hessian.Z = CMatrix::Constant(1, 1, cplx(l_ * p.psi_zz));
    return j;
  }
  std::string name() const override {
    return std::to_string(l_) + "*" + psi_->name();
  }

 private:
  PotentialPtr psi_;
  int l_;
};

void require_model(const FibrationModel& fm) {
  if (!fm.potential) throw InvalidArgument("fibration: no fiber potential");
  if (fm.twist < 2) {
    throw InvalidArgument("fibration: the section space is zero for l = " +
                          std::to_string(fm.twist) + " (need l >= 2)");
  }
}

constexpr double kTailWidth = 1e-10;
constexpr double kTailLimit = 1e-8;

}  // namespace

bergman::Basis FibrationModel::basis() const {
  require_model(*this);
  return bergman::Basis(1, twist - 2);
}

weights::WeightPtr FibrationModel::line_weight() const {
  require_model(*this);
  return std::make_shared<LinePowerWeight>(potential, twist);
}

std::shared_ptr<const numerics::QuadGrid> chart_grid(int radial_order) {
  return std::make_shared<const numerics::QuadGrid>(
      numerics::build_plane_chart_grid(radial_order, 2 * radial_order));
}

double decay_tail_estimate(const FibrationModel& fm, const CVector& t,
                           const numerics::QuadGrid& grid) {
  require_model(fm);
  const int a = fm.twist - 2;
  const int l = fm.twist;
  auto log_density = [&](cplx zeta) {
    const double r2 = std::norm(zeta);
    const double lead = a == 0 ? 0.0 : a * std::log(r2);
    return lead - l * fm.potential->value(t, zeta);
  };
  double top = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    top += grid.weights[i] * std::exp(log_density(grid.nodes[i]));
  }
  if (!(top > 0.0) || !std::isfinite(top)) {
    throw NumericalAbort("fibration: top-degree section has non-finite norm");
  }
  // radial density in s near s = 1, averaged over 16 angles
  const double s = 1.0 - 0.5 * kTailWidth;
  const double r = std::sqrt(s / (1.0 - s));
  const double jac = 0.5 / ((1.0 - s) * (1.0 - s));
  constexpr int angles = 16;
  double rho = 0.0;
  for (int k = 0; k < angles; ++k) {
    const double th = 2.0 * std::numbers::pi * k / angles;
    rho += std::exp(log_density(std::polar(r, th)) + std::log(jac)) * (2.0 * std::numbers::pi / angles);
  }
  return kTailWidth * rho / top;
}

bergman::BergmanFiber fiber_space(const FibrationModel& fm, const CVector& t,
                                  std::shared_ptr<const numerics::QuadGrid> grid) {
  require_model(fm);
  const double tail = decay_tail_estimate(fm, t, *grid);
  if (!(tail <= kTailLimit)) {
    std::ostringstream msg;
    msg << "insufficient decay: potential " << fm.potential->name() << " with l = " << fm.twist
        << " leaves tail estimate " << tail << " > " << kTailLimit
        << " at the point at infinity";
    throw NumericalAbort(msg.str());
  }
  return bergman::BergmanFiber(fm.line_weight(), fm.basis(), std::move(grid), t);
}

bergman::GramFamily fiber_gram(const FibrationModel& fm, const CVector& t,
                               std::shared_ptr<const numerics::QuadGrid> grid) {
  return fiber_space(fm, t, std::move(grid)).gram_family();
}

CMatrix opposite_chart_gram(const FibrationModel& fm, const CVector& t,
                            const numerics::QuadGrid& grid) {
  require_model(fm);
  const int rank = fm.section_count();
  const int l = fm.twist;
  const std::size_t nodes = grid.size();
  std::vector<double> density(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    const cplx w = grid.nodes[i];
    const double psi = fm.potential->value(t, 1.0 / w) + std::log(std::norm(w));
    density[i] = std::exp(-l * psi);
  }
  CMatrix g(rank, rank);
  std::vector<cplx> vals(nodes);
  for (int a = 0; a < rank; ++a) {
    for (int b = 0; b < rank; ++b) {
      for (std::size_t i = 0; i < nodes; ++i) {
        const cplx w = grid.nodes[i];
        // zeta^a d zeta  ->  -w^{l-2-a} dw
        const cplx qa = -std::pow(w, l - 2 - a);
        const cplx qb = -std::pow(w, l - 2 - b);
        vals[i] = std::conj(qa) * qb * density[i];
      }
      g(a, b) = numerics::integrate(vals, grid);
    }
  }
  return 0.5 * (g + g.adjoint());
}

DetTransformReport det_transform_check(const Eigen::Matrix2cd& a, double tolerance) {
  DetTransformReport rep;
  rep.determinant = a.determinant();
  const double scale = a.squaredNorm();
  if (!(std::abs(rep.determinant) > 1e-14 * std::max(scale, 1e-300))) {
    throw InvalidArgument("det_transform_check: A is singular");
  }
  // z_1 dz_2 - z_2 dz_1 = z^T C dz
  Eigen::Matrix2cd c;
  c << 0.0, 1.0, -1.0, 0.0;
  const Eigen::Matrix2cd transformed = a.transpose() * c * a;
  rep.factor = transformed(0, 1) / c(0, 1);
  rep.form_residual = (transformed - rep.factor * c).norm() / std::max(1.0, std::abs(rep.factor));
  rep.relative_error = std::abs(rep.factor / rep.determinant - 1.0);

  // In the chart z' = (1, zeta') the form reads p(zeta') d zeta'; p should be
  // the constant det A.
  const cplx samples[] = {0.0, {0.3, -0.2}, {-1.1, 0.7}, {2.5, 1.5}};
  for (const cplx zeta : samples) {
    const cplx z1 = a(0, 0) + a(0, 1) * zeta;
    const cplx z2 = a(1, 0) + a(1, 1) * zeta;
    const cplx p = z1 * a(1, 1) - z2 * a(0, 1);
    rep.chart_residual = std::max(rep.chart_residual,
                                  std::abs(p - rep.determinant) / std::abs(rep.determinant));
  }
  rep.passed = rep.relative_error <= tolerance && rep.form_residual <= tolerance &&
               rep.chart_residual <= tolerance;
  return rep;
}

RankReport rank_check(int twist) {
  RankReport rep;
  rep.twist = twist;
  if (twist >= 2) {
    rep.section_dim = static_cast<int>(bergman::Basis(1, twist - 2).size());
    rep.symmetric_rank = (twist - 2) + 1;
  }
  rep.expected = std::max(0, twist - 1);
  rep.passed = rep.section_dim == rep.expected && rep.symmetric_rank == rep.expected;
  return rep;
}

double fiber_positivity(const FibrationModel& fm, const CVector& t,
                        const numerics::QuadGrid& grid) {
  require_model(fm);
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const cplx zeta = grid.nodes[i];
    const double u = 1.0 + std::norm(zeta);
    lo = std::min(lo, fm.potential->jet(t, zeta).psi_zz * u * u);
  }
  return lo;
}

FibrationReport fibration_nakano(const FibrationModel& fm, const std::vector<CVector>& t_nodes,
                                 int radial_order) {
  require_model(fm);
  auto grid = chart_grid(radial_order);
  FibrationReport rep;
  rep.twist = fm.twist;
  rep.quad_order = radial_order;
  rep.min_nakano_delta = std::numeric_limits<double>::infinity();
  for (const CVector& t : t_nodes) {
    if (!(fiber_positivity(fm, t, *grid) > 0.0)) {
      throw InvalidArgument("fibration: potential is not strictly positive along the fiber");
    }
    const bergman::BergmanFiber fiber = fiber_space(fm, t, grid);
    const auto direct = curvature::curvature_direct(fiber.gram_family());
    const auto via_sff = curvature::curvature_via_second_fundamental_form(fiber);
    FibrationNode node;
    node.t = t;
    node.nakano_delta = curvature::nakano_delta(direct);
    node.griffiths_delta = curvature::griffiths_delta(direct);
    node.route_deviation = curvature::route_deviation(direct, via_sff);
    node.condition = direct.family.condition;
    rep.min_nakano_delta = std::min(rep.min_nakano_delta, node.nakano_delta);
    rep.max_route_deviation = std::max(rep.max_route_deviation, node.route_deviation);
    rep.nodes.push_back(std::move(node));
  }
  return rep;
}

}  // namespace curvlab::fibration
