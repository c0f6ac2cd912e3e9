#pragma once

#include <memory>
#include <string>
#include <vector>

#include "curvlab/bergman.hpp"
#include "curvlab/curvature.hpp"
#include "curvlab/numerics.hpp"
#include "curvlab/weights.hpp"

namespace curvlab::fibration {

/// Partials of a fiber potential psi(t, zeta), zeta the affine coordinate of
/// the projective line.
struct PotentialJet {
  double psi = 0.0;
  CVector psi_t;   ///< d psi / dt_j
  CMatrix psi_tt;  ///< d^2 psi / dt_j dconj(t_k)
  CVector psi_tz;  ///< d^2 psi / dt_j dconj(zeta)
  double psi_zz = 0.0;
};

/// Local potential of a metric on O(1) over P^1-fibers, in the chart
/// [1 : zeta]. Immutable.
class FiberPotential {
 public:
  virtual ~FiberPotential() = default;
  virtual int base_dim() const = 0;
  virtual double value(const CVector& t, cplx zeta) const = 0;
  virtual PotentialJet jet(const CVector& t, cplx zeta) const = 0;
  virtual std::string name() const = 0;
};

using PotentialPtr = std::shared_ptr<const FiberPotential>;

/// scale * log(1 + |zeta|^2), t-independent. scale = 1 is Fubini-Study.
class FubiniStudy final : public FiberPotential {
 public:
  explicit FubiniStudy(double scale = 1.0) : scale_(scale) {}
  int base_dim() const override { return 1; }
  double value(const CVector& t, cplx zeta) const override;
  PotentialJet jet(const CVector& t, cplx zeta) const override;
  std::string name() const override;

 private:
  double scale_;
};

/// log(1 + e^{2 Re t} |zeta|^2): Fubini-Study pulled back by zeta -> e^t zeta.
class TwistedFubiniStudy final : public FiberPotential {
 public:
  int base_dim() const override { return 1; }
  double value(const CVector& t, cplx zeta) const override;
  PotentialJet jet(const CVector& t, cplx zeta) const override;
  std::string name() const override { return "twisted"; }
};

/// base + c |t|^2 + Re(alpha t + beta t^2)
class ShiftedPotential final : public FiberPotential {
 public:
  ShiftedPotential(PotentialPtr base, double c, cplx alpha, cplx beta);
  int base_dim() const override { return base_->base_dim(); }
  double value(const CVector& t, cplx zeta) const override;
  PotentialJet jet(const CVector& t, cplx zeta) const override;
  std::string name() const override;

 private:
  PotentialPtr base_;
  double c_;
  cplx alpha_;
  cplx beta_;
};

/// "fubini_study" (optional scale), "twisted".
PotentialPtr builtin_potential(const std::string& name, const std::vector<double>& params = {});

/// Rank-2 bundle V, twist level l: fibers are sections of O(l) (x) K over P^1,
/// i.e. p(zeta) d zeta with deg p <= l - 2.
struct FibrationModel {
  static constexpr int rank = 2;
  int twist = 3;
  PotentialPtr potential;

  /// dim of the section space, l - 1 (zero when l < 2).
  int section_count() const { return twist >= 2 ? twist - 1 : 0; }
  bergman::Basis basis() const;
  /// l * psi viewed as a weight on U x C.
  weights::WeightPtr line_weight() const;
};

/// Quadrature over the whole affine chart, s = r^2 / (1 + r^2).
std::shared_ptr<const numerics::QuadGrid> chart_grid(int radial_order);

/// Estimated share of the top-degree Gram entry lying in the last 1e-10 of
/// the s-interval, i.e. at the missing point of the chart.
double decay_tail_estimate(const FibrationModel& fm, const CVector& t,
                           const numerics::QuadGrid& grid);

/// Gram of the frame zeta^a d zeta against e^{-l psi} with t-derivatives.
/// Throws NumericalAbort("insufficient decay") when the tail estimate
/// exceeds 1e-8.
bergman::GramFamily fiber_gram(const FibrationModel& fm, const CVector& t,
                               std::shared_ptr<const numerics::QuadGrid> grid);
bergman::BergmanFiber fiber_space(const FibrationModel& fm, const CVector& t,
                                  std::shared_ptr<const numerics::QuadGrid> grid);

/// The same Gram recomputed in the chart w = 1/zeta, where zeta^a d zeta
/// becomes -w^{l-2-a} dw and the potential becomes psi(t, 1/w) + log|w|^2.
CMatrix opposite_chart_gram(const FibrationModel& fm, const CVector& t,
                            const numerics::QuadGrid& grid);

struct DetTransformReport {
  cplx determinant;
  cplx factor;              ///< new coefficient / old coefficient
  double relative_error = 0.0;  ///< |factor / det - 1|
  double form_residual = 0.0;   ///< transformed form minus factor * original
  double chart_residual = 0.0;  ///< chart polynomial minus det, max over samples
  bool passed = true;
};

/// Transforms z_1 dz_2 - z_2 dz_1 under z = A z' and reads off its factor.
DetTransformReport det_transform_check(const Eigen::Matrix2cd& a, double tolerance = 1e-10);

struct RankReport {
  int twist = 0;
  int section_dim = 0;         ///< frame length of the section space
  int symmetric_rank = 0;      ///< rank of S^{l-2}(C^2) (x) det, 0 for l < 2
  int expected = 0;
  bool passed = true;
};
RankReport rank_check(int twist);

struct FibrationNode {
  CVector t;
  double nakano_delta = 0.0;
  double griffiths_delta = 0.0;
  double route_deviation = 0.0;
  double condition = 0.0;
};

struct FibrationReport {
  std::vector<FibrationNode> nodes;
  double min_nakano_delta = 0.0;
  double max_route_deviation = 0.0;
  int twist = 0;
  int quad_order = 0;
};

/// Curvature of the fiberwise L^2 metric at every base point, by the frame
/// calculus and cross-checked against the second-fundamental-form route.
FibrationReport fibration_nakano(const FibrationModel& fm, const std::vector<CVector>& t_nodes,
                                 int radial_order);

/// Minimum over the chart grid of psi_zz (1 + |zeta|^2)^2, the fiber form
/// relative to Fubini-Study.
double fiber_positivity(const FibrationModel& fm, const CVector& t,
                        const numerics::QuadGrid& grid);

}  // namespace curvlab::fibration
