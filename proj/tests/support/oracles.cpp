#include "oracles.hpp"

#include <cmath>
#include <numbers>

namespace oracle {

double fock_moment(int n) { return std::numbers::pi * std::tgamma(n + 1.0); }

double fock_kernel(cplx z, cplx t, double eps) {
  return std::exp(std::norm(z - t) + eps * std::norm(t)) / std::numbers::pi;
}

double truncated_fock_kernel(double x, int n) {
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k <= n; ++k) {
    term *= x / k;
    sum += term;
  }
  return sum / std::numbers::pi;
}

namespace {

/// (1/4) Laplacian of s -> f(w + s v) at s = 0, i.e. the Levi form at v.
double line_levi(const std::function<double(const Eigen::VectorXcd&)>& f,
                 const Eigen::VectorXcd& w, const Eigen::VectorXcd& v, double h) {
  auto lap = [&](double step) {
    const double c = f(w);
    const double sum = f(w + step * v) + f(w - step * v) + f(w + cplx(0, step) * v) +
                       f(w - cplx(0, step) * v);
    return (sum - 4.0 * c) / (step * step);
  };
  return 0.25 * (4.0 * lap(h / 2) - lap(h)) / 3.0;
}

}  // namespace

Eigen::MatrixXcd levi_by_polarization(const std::function<double(const Eigen::VectorXcd&)>& f,
                                      const Eigen::VectorXcd& w, double h) {
  const auto d = w.size();
  Eigen::MatrixXcd out(d, d);
  const cplx i(0, 1);
  for (Eigen::Index a = 0; a < d; ++a) {
    for (Eigen::Index b = 0; b < d; ++b) {
      Eigen::VectorXcd ea = Eigen::VectorXcd::Zero(d);
      Eigen::VectorXcd eb = Eigen::VectorXcd::Zero(d);
      ea(a) = 1.0;
      eb(b) = 1.0;
      if (a == b) {
        out(a, b) = line_levi(f, w, ea, h);
        continue;
      }
      const double p = line_levi(f, w, ea + eb, h);
      const double q = line_levi(f, w, ea - eb, h);
      const double r = line_levi(f, w, ea + i * eb, h);
      const double s = line_levi(f, w, ea - i * eb, h);
      out(a, b) = 0.25 * ((p - q) + i * (r - s));
    }
  }
  return out;
}

Eigen::MatrixXcd schur_by_elimination(const std::function<double(const Eigen::VectorXcd&)>& f,
                                      const Eigen::VectorXcd& w, int m, double h) {
  const Eigen::MatrixXcd hess = levi_by_polarization(f, w, h);
  const auto n = w.size() - m;
  const Eigen::MatrixXcd t = hess.topLeftCorner(m, m);
  const Eigen::MatrixXcd b = hess.topRightCorner(m, n);
  const Eigen::MatrixXcd z = hess.bottomRightCorner(n, n);
  return t - b * z.inverse() * b.adjoint();
}

double schur_coupled(cplx t, cplx z) { return std::norm(z) / (1.0 + std::norm(t)); }

}  // namespace oracle
