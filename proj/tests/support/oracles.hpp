#pragma once

#include <complex>
#include <functional>

#include <Eigen/Dense>

namespace oracle {

using cplx = std::complex<double>;

/// int_C |z|^{2n} e^{-|z|^2} = pi n!
double fock_moment(int n);

/// Fock kernel on the diagonal for phi = |z - t|^2 + eps |t|^2.
double fock_kernel(cplx z, cplx t, double eps);

/// sum_{k <= N} x^k / k!  divided by pi
double truncated_fock_kernel(double x, int n);

/// Complex Hessian d^2 f / dw_a dconj(w_b) of a real function of w in C^d by
/// polarization of Laplacians along complex lines (5-point, Richardson).
Eigen::MatrixXcd levi_by_polarization(const std::function<double(const Eigen::VectorXcd&)>& f,
                                      const Eigen::VectorXcd& w, double h);

/// T - B Z^{-1} B^H from the polarized Hessian, first m coordinates as base.
Eigen::MatrixXcd schur_by_elimination(const std::function<double(const Eigen::VectorXcd&)>& f,
                                      const Eigen::VectorXcd& w, int m, double h);

/// Closed forms of the Schur matrix for the built-in weights.
double schur_coupled(cplx t, cplx z);  ///< |z|^2 / (1 + |t|^2)

}  // namespace oracle
