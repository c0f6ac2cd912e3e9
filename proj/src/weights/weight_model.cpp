#include <cmath>
#include <random>

#include "curvlab/weights.hpp"

namespace curvlab::weights {

CMatrix HessianBlocks::full() const {
  const Eigen::Index m = T.rows();
  const Eigen::Index n = Z.rows();
  CMatrix h(m + n, m + n);
  h.topLeftCorner(m, m) = T;
  h.topRightCorner(m, n) = B;
  h.bottomLeftCorner(n, m) = B.adjoint();
  h.bottomRightCorner(n, n) = Z;
  return h;
}

// ---------------------------------------------------------------------------

QuadraticWeight::QuadraticWeight(std::string name, int m, int n, CMatrix form, double margin)
    : name_(std::move(name)), m_(m), n_(n), form_(std::move(form)), margin_(margin) {
  if (m < 1 || n < 1) throw InvalidArgument("QuadraticWeight: dimensions must be positive");
  if (form_.rows() != m + n || form_.cols() != m + n) {
    throw InvalidArgument("QuadraticWeight: form must be (m+n) square");
  }
  if ((form_ - form_.adjoint()).cwiseAbs().maxCoeff() > 1e-14) {
    throw InvalidArgument("QuadraticWeight: form must be Hermitian");
  }
}

namespace {
CVector stack(const CVector& t, const CVector& z) {
  CVector w(t.size() + z.size());
  w << t, z;
  return w;
}
}  // namespace

double QuadraticWeight::value(const CVector& t, const CVector& z) const {
  if (t.size() != m_ || z.size() != n_) throw InvalidArgument(name_ + ": point has wrong dimension");
  auto coord = [&](Eigen::Index a) { return a < m_ ? t(a) : z(a - m_); };
  cplx sum = 0.0;
  for (Eigen::Index a = 0; a < form_.rows(); ++a) {
    cplx row = 0.0;
    for (Eigen::Index b = 0; b < form_.cols(); ++b) row += form_(a, b) * coord(b);
    sum += std::conj(coord(a)) * row;
  }
  return sum.real();
}

WeightJet QuadraticWeight::jet(const CVector& t, const CVector& z) const {
  const CVector w = stack(t, z);
  WeightJet jet;
  jet.phi = w.dot(form_ * w).real();
  // d phi / dw_c = sum_a conj(w_a) A(a, c)
  const CVector grad = form_.transpose() * w.conjugate();
  jet.phi_t = grad.head(m_);
  // d_c dbar_d phi = A(d, c)
  const CMatrix levi = form_.transpose();
  jet.hessian.T = levi.topLeftCorner(m_, m_);
  jet.hessian.B = levi.topRightCorner(m_, n_);
  jet.hessian.Z = levi.bottomRightCorner(n_, n_);
  return jet;
}

// ---------------------------------------------------------------------------

double CoupledWeight::value(const CVector& t, const CVector& z) const {
  return (1.0 + std::norm(t(0))) * std::norm(z(0));
}

WeightJet CoupledWeight::jet(const CVector& t, const CVector& z) const {
  const cplx tt = t(0);
  const cplx zz = z(0);
  WeightJet jet;
  jet.phi = (1.0 + std::norm(tt)) * std::norm(zz);
  jet.phi_t = CVector::Constant(1, std::conj(tt) * std::norm(zz));
  jet.hessian.T = CMatrix::Constant(1, 1, std::norm(zz));
  jet.hessian.B = CMatrix::Constant(1, 1, std::conj(tt) * zz);
  jet.hessian.Z = CMatrix::Constant(1, 1, 1.0 + std::norm(tt));
  return jet;
}

// ---------------------------------------------------------------------------

ConformalShift::ConformalShift(WeightPtr base, double c) : base_(std::move(base)), c_(c) {
  if (!base_) throw InvalidArgument("ConformalShift: null base weight");
}

double ConformalShift::value(const CVector& t, const CVector& z) const {
  return base_->value(t, z) + c_ * t.squaredNorm();
}

WeightJet ConformalShift::jet(const CVector& t, const CVector& z) const {
  WeightJet jet = base_->jet(t, z);
  jet.phi += c_ * t.squaredNorm();
  jet.phi_t += c_ * t.conjugate();
  jet.hessian.T += c_ * CMatrix::Identity(t.size(), t.size());
  return jet;
}

std::string ConformalShift::name() const {
  return base_->name() + "+" + std::to_string(c_) + "|t|^2";
}

ScaledWeight::ScaledWeight(WeightPtr base, double scale)
    : base_(std::move(base)), scale_(scale) {
  if (!base_) throw InvalidArgument("ScaledWeight: null base weight");
  if (!(scale > 0.0)) throw InvalidArgument("ScaledWeight: scale must be positive");
}

double ScaledWeight::value(const CVector& t, const CVector& z) const {
  return scale_ * base_->value(t, z);
}

WeightJet ScaledWeight::jet(const CVector& t, const CVector& z) const {
  WeightJet jet = base_->jet(t, z);
  jet.phi *= scale_;
  jet.phi_t *= scale_;
  jet.hessian.T *= scale_;
  jet.hessian.B *= scale_;
  jet.hessian.Z *= scale_;
  return jet;
}

std::string ScaledWeight::name() const {
  return std::to_string(scale_) + "*" + base_->name();
}

// ---------------------------------------------------------------------------

std::vector<Point> random_probes(int m, int n, std::size_t count, double t_radius,
                                 double z_radius, unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  auto draw = [&](int dim, double radius) {
    CVector v(dim);
    for (int i = 0; i < dim; ++i) {
      cplx c;
      do {
        c = cplx(unit(rng), unit(rng));
      } while (std::abs(c) > 1.0);
      v(i) = radius * c;
    }
    return v;
  };
  std::vector<Point> probes;
  probes.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Point p;
    p.t = draw(m, t_radius);
    p.z = draw(n, z_radius);
    probes.push_back(std::move(p));
  }
  return probes;
}

namespace {

// Real coordinates (x_0, y_0, x_1, y_1, ...) over the stacked (t, z).
struct RealView {
  const WeightModel& w;
  CVector t;
  CVector z;

  double eval(const Eigen::VectorXd& delta) const {
    CVector tt = t;
    CVector zz = z;
    const Eigen::Index m = t.size();
    for (Eigen::Index v = 0; v < t.size() + z.size(); ++v) {
      const cplx d(delta(2 * v), delta(2 * v + 1));
      if (v < m) {
        tt(v) += d;
      } else {
        zz(v - m) += d;
      }
    }
    return w.value(tt, zz);
  }
};

double first_real(const RealView& f, Eigen::Index a, double h) {
  Eigen::VectorXd d = Eigen::VectorXd::Zero(2 * (f.t.size() + f.z.size()));
  d(a) = h;
  const double plus = f.eval(d);
  d(a) = -h;
  return (plus - f.eval(d)) / (2.0 * h);
}

double second_real(const RealView& f, Eigen::Index a, Eigen::Index b, double h) {
  Eigen::VectorXd d = Eigen::VectorXd::Zero(2 * (f.t.size() + f.z.size()));
  if (a == b) {
    const double center = f.eval(d);
    d(a) = h;
    const double plus = f.eval(d);
    d(a) = -h;
    return (plus - 2.0 * center + f.eval(d)) / (h * h);
  }
  auto at = [&](double sa, double sb) {
    d.setZero();
    d(a) = sa * h;
    d(b) = sb * h;
    return f.eval(d);
  };
  return (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * h * h);
}

template <class F>
double richardson(F&& diff, double h) {
  return (4.0 * diff(0.5 * h) - diff(h)) / 3.0;
}

// Wirtinger d_c dbar_d from real second partials of complex coordinates c, d.
cplx levi_entry(const RealView& f, Eigen::Index c, Eigen::Index d, double h) {
  auto s = [&](Eigen::Index a, Eigen::Index b) {
    return richardson([&](double hh) { return second_real(f, a, b, hh); }, h);
  };
  const double xx = s(2 * c, 2 * d);
  const double yy = s(2 * c + 1, 2 * d + 1);
  const double xy = s(2 * c, 2 * d + 1);
  const double yx = s(2 * c + 1, 2 * d);
  return 0.25 * cplx(xx + yy, xy - yx);
}

}  // namespace

DerivativeReport validate_derivatives(const WeightModel& w, std::span<const Point> probes,
                                      double step, double threshold) {
  DerivativeReport report;
  report.threshold = threshold;
  for (const char* kind : {"phi", "phi_t", "phi_tt", "phi_tz", "phi_zz"}) report.max_deviation[kind] = 0.0;
  const int m = w.base_dim();
  const int n = w.fiber_dim();
  for (const Point& p : probes) {
    if (p.t.size() != m || p.z.size() != n) {
      throw InvalidArgument("validate_derivatives: probe dimension mismatch");
    }
    const RealView f{w, p.t, p.z};
    const WeightJet jet = w.jet(p.t, p.z);
    auto bump = [&](const char* kind, double dev) {
      double& slot = report.max_deviation[kind];
      slot = std::max(slot, dev);
    };
    bump("phi", std::abs(jet.phi - w.value(p.t, p.z)));
    for (int j = 0; j < m; ++j) {
      const double dx = richardson([&](double hh) { return first_real(f, 2 * j, hh); }, step);
      const double dy = richardson([&](double hh) { return first_real(f, 2 * j + 1, hh); }, step);
      bump("phi_t", std::abs(jet.phi_t(j) - 0.5 * cplx(dx, -dy)));
    }
    for (int j = 0; j < m; ++j) {
      for (int k = 0; k < m; ++k) {
        bump("phi_tt", std::abs(jet.hessian.T(j, k) - levi_entry(f, j, k, step)));
      }
      for (int l = 0; l < n; ++l) {
        bump("phi_tz", std::abs(jet.hessian.B(j, l) - levi_entry(f, j, m + l, step)));
      }
    }
    for (int l = 0; l < n; ++l) {
      for (int q = 0; q < n; ++q) {
        bump("phi_zz", std::abs(jet.hessian.Z(l, q) - levi_entry(f, m + l, m + q, step)));
      }
    }
  }
  for (const auto& [kind, dev] : report.max_deviation) {
    if (!(dev <= threshold)) {
      report.passed = false;
      report.failed_partials.push_back(kind);
    }
  }
  return report;
}

}  // namespace curvlab::weights
