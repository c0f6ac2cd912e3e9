#include <cmath>
#include <sstream>

#include "curvlab/errors.hpp"
#include "curvlab/fibration.hpp"

namespace curvlab::fibration {

namespace {

PotentialJet zero_jet(int m) {
  PotentialJet j;
  j.psi_t = CVector::Zero(m);
  j.psi_tt = CMatrix::Zero(m, m);
  j.psi_tz = CVector::Zero(m);
  return j;
}

void require_base(const CVector& t, int m, const char* who) {
  if (t.size() != m) {
    throw InvalidArgument(std::string(who) + ": base point must have dimension " +
                          std::to_string(m));
  }
}

}  // namespace

double FubiniStudy::value(const CVector& t, cplx zeta) const {
  require_base(t, 1, "fubini_study");
  return scale_ * std::log1p(std::norm(zeta));
}

PotentialJet FubiniStudy::jet(const CVector& t, cplx zeta) const {
  require_base(t, 1, "fubini_study");
  PotentialJet j = zero_jet(1);
  const double r2 = std::norm(zeta);
  j.psi = scale_ * std::log1p(r2);
  j.psi_zz = scale_ / ((1.0 + r2) * (1.0 + r2));
  return j;
}

std::string FubiniStudy::name() const {
  if (scale_ == 1.0) return "fubini_study";
  std::ostringstream s;
  s << "fubini_study(" << scale_ << ")";
  return s.str();
}

double TwistedFubiniStudy::value(const CVector& t, cplx zeta) const {
  require_base(t, 1, "twisted");
  const double a = std::exp(2.0 * t(0).real());
  return std::log1p(a * std::norm(zeta));
}

PotentialJet TwistedFubiniStudy::jet(const CVector& t, cplx zeta) const {
  require_base(t, 1, "twisted");
  PotentialJet j = zero_jet(1);
  const double a = std::exp(2.0 * t(0).real());
  const double u = 1.0 + a * std::norm(zeta);
  const double q = a * std::norm(zeta) / u;
  j.psi = std::log(u);
  j.psi_t(0) = q;
  j.psi_tt(0, 0) = q * (1.0 - q);
  j.psi_tz(0) = a * zeta / (u * u);
  j.psi_zz = a / (u * u);
  return j;
}

ShiftedPotential::ShiftedPotential(PotentialPtr base, double c, cplx alpha, cplx beta)
    : base_(std::move(base)), c_(c), alpha_(alpha), beta_(beta) {
  if (!base_) throw InvalidArgument("shifted potential: null base");
  if (!std::isfinite(c_)) throw InvalidArgument("shifted potential: non-finite coefficient");
}

double ShiftedPotential::value(const CVector& t, cplx zeta) const {
  const cplx s = t(0);
  return base_->value(t, zeta) + c_ * std::norm(s) + (alpha_ * s + beta_ * s * s).real();
}

PotentialJet ShiftedPotential::jet(const CVector& t, cplx zeta) const {
  PotentialJet j = base_->jet(t, zeta);
  const cplx s = t(0);
  j.psi += c_ * std::norm(s) + (alpha_ * s + beta_ * s * s).real();
  // d/dt Re(h) = h'(t) / 2 for holomorphic h
  j.psi_t(0) += c_ * std::conj(s) + 0.5 * (alpha_ + 2.0 * beta_ * s);
  j.psi_tt(0, 0) += c_;
  return j;
}

std::string ShiftedPotential::name() const {
  std::ostringstream s;
  s << base_->name();
  if (c_ != 0.0) s << "+" << c_ << "|t|^2";
  if (alpha_ != 0.0 || beta_ != 0.0) s << "+Re(" << alpha_ << "t+" << beta_ << "t^2)";
  return s.str();
}

PotentialPtr builtin_potential(const std::string& name, const std::vector<double>& params) {
  if (name == "fubini_study") {
    if (params.size() > 1) throw InvalidArgument("fubini_study takes at most one parameter");
    const double scale = params.empty() ? 1.0 : params[0];
    if (!(scale > 0.0)) throw InvalidArgument("fubini_study scale must be positive");
    return std::make_shared<FubiniStudy>(scale);
  }
  if (name == "twisted") {
    if (!params.empty()) throw InvalidArgument("twisted takes no parameters");
    return std::make_shared<TwistedFubiniStudy>();
  }
  throw InvalidArgument("unknown fiber potential '" + name +
                        "' (expected fubini_study or twisted)");
}

}  // namespace curvlab::fibration
