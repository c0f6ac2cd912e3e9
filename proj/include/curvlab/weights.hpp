#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "curvlab/numerics.hpp"

namespace curvlab::weights {

/// Point (t, z) in U x Omega, t in C^m and z in C^n.
struct Point {
  CVector t;
  CVector z;
};

/// Complex Hessian of the weight at a point, split into base and fiber
/// blocks. Wirtinger derivatives with d/dt = (d/dx - i d/dy) / 2.
///   T(j,k) = d^2 phi / dt_j d conj(t_k)
///   B(j,l) = d^2 phi / dt_j d conj(z_l)
///   Z(l,m) = d^2 phi / dz_l d conj(z_m)
struct HessianBlocks {
  CMatrix T;
  CMatrix B;
  CMatrix Z;

  /// [[T, B], [B^H, Z]]
  CMatrix full() const;
};

/// Weight value together with every partial the curvature code consumes.
struct WeightJet {
  double phi = 0.0;
  CVector phi_t;  ///< d phi / dt_j
  HessianBlocks hessian;
};

/// A real weight phi(t, z) with analytic first and second Wirtinger partials.
/// Implementations are immutable and thread-safe.
class WeightModel {
 public:
  virtual ~WeightModel() = default;

  virtual int base_dim() const = 0;
  virtual int fiber_dim() const = 0;
  virtual double value(const CVector& t, const CVector& z) const = 0;
  virtual WeightJet jet(const CVector& t, const CVector& z) const = 0;
  virtual std::string name() const = 0;
  /// Declared lower bound for the base-directed Schur complement (0 when
  /// the weight is only semidefinite somewhere).
  virtual double strictness_margin() const { return 0.0; }
};

using WeightPtr = std::shared_ptr<const WeightModel>;

/// phi(t, z) = w^H A w for w = (t, z) stacked, A Hermitian (m + n) square.
class QuadraticWeight final : public WeightModel {
 public:
  QuadraticWeight(std::string name, int m, int n, CMatrix form, double margin = 0.0);

  int base_dim() const override { return m_; }
  int fiber_dim() const override { return n_; }
  double value(const CVector& t, const CVector& z) const override;
  WeightJet jet(const CVector& t, const CVector& z) const override;
  std::string name() const override { return name_; }
  double strictness_margin() const override { return margin_; }

 private:
  std::string name_;
  int m_;
  int n_;
  CMatrix form_;
  double margin_;
};

/// phi(t, z) = (1 + |t|^2) |z|^2, m = n = 1. Only semidefinite at z = 0.
class CoupledWeight final : public WeightModel {
 public:
  int base_dim() const override { return 1; }
  int fiber_dim() const override { return 1; }
  double value(const CVector& t, const CVector& z) const override;
  WeightJet jet(const CVector& t, const CVector& z) const override;
  std::string name() const override { return "coupled"; }
};

/// base + c |t|^2
class ConformalShift final : public WeightModel {
 public:
  ConformalShift(WeightPtr base, double c);

  int base_dim() const override { return base_->base_dim(); }
  int fiber_dim() const override { return base_->fiber_dim(); }
  double value(const CVector& t, const CVector& z) const override;
  WeightJet jet(const CVector& t, const CVector& z) const override;
  std::string name() const override;
  double strictness_margin() const override { return base_->strictness_margin() + c_; }

 private:
  WeightPtr base_;
  double c_;
};

/// base * scale, used for line-bundle powers l * psi.
class ScaledWeight final : public WeightModel {
 public:
  ScaledWeight(WeightPtr base, double scale);

  int base_dim() const override { return base_->base_dim(); }
  int fiber_dim() const override { return base_->fiber_dim(); }
  double value(const CVector& t, const CVector& z) const override;
  WeightJet jet(const CVector& t, const CVector& z) const override;
  std::string name() const override;
  double strictness_margin() const override { return scale_ * base_->strictness_margin(); }

 private:
  WeightPtr base_;
  double scale_;
};

/// Names and parameter counts accepted by `builtin`.
struct BuiltinInfo {
  std::string name;
  std::size_t param_count;
  int base_dim;
  int fiber_dim;
  std::string formula;
};
const std::vector<BuiltinInfo>& builtin_catalog();

/// fock_shift(eps): |z - t|^2 + eps |t|^2
/// product:         |z|^2 + |t|^2
/// coupled:         (1 + |t|^2) |z|^2
/// product2:        |z|^2 + |t1|^2 + |t2|^2
/// rank_one2:       |z|^2 + |t1 + t2|^2 / 2
/// The returned model has passed validate_derivatives on fixed probes.
WeightPtr builtin(const std::string& name, const std::vector<double>& params = {});

// ---------------------------------------------------------------------------

struct DerivativeReport {
  /// max |analytic - finite difference| per partial kind:
  /// "phi", "phi_t", "phi_tt", "phi_tz", "phi_zz"
  std::map<std::string, double> max_deviation;
  double threshold = 1e-4;
  bool passed = true;
  std::vector<std::string> failed_partials;
};

/// Central differences with h = 1e-4, Richardson-extrapolated with h / 2.
DerivativeReport validate_derivatives(const WeightModel& w, std::span<const Point> probes,
                                      double step = 1e-4, double threshold = 1e-4);

/// Fixed-seed probes with |t_j| <= t_radius and |z_l| <= z_radius.
std::vector<Point> random_probes(int m, int n, std::size_t count, double t_radius,
                                 double z_radius, unsigned long long seed);

HessianBlocks hessian_blocks(const WeightModel& w, const CVector& t, const CVector& z);

/// D = T - B Z^{-1} B^H. Throws DegenerateHessian when Z is singular.
numerics::HermitianForm schur_D(const WeightModel& w, const CVector& t, const CVector& z);
numerics::HermitianForm schur_D(const HessianBlocks& blocks);

struct PshProbe {
  Point point;
  double full_min_eig = 0.0;
  double schur_min_eig = 0.0;  ///< NaN when degenerate
  double det_identity_residual = 0.0;  ///< |det H - det Z det D| / scale
  bool degenerate = false;
  bool ok = true;
};

struct PshWeightReport {
  std::vector<PshProbe> probes;
  std::size_t degenerate_count = 0;
  std::size_t violations = 0;
  bool passed = true;
};

/// Per probe the minimum eigenvalues of the full Hessian and of D; a probe
/// fails when the full Hessian is positive definite but D has a negative
/// eigenvalue below -1e-10. Points with a singular Hessian are flagged
/// degenerate instead.
PshWeightReport check_psh(const WeightModel& w, std::span<const Point> probes);

}  // namespace curvlab::weights
