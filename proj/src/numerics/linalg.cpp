#include <algorithm>
#include <limits>
#include <utility>
#include <cmath>
#include <mutex>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "curvlab/numerics.hpp"

namespace curvlab::numerics {

namespace {
std::mutex g_warning_mutex;
std::vector<std::string> g_warnings;

void require_finite(const CMatrix& m, const char* what) {
  if (!m.allFinite()) throw InvalidArgument(std::string(what) + ": non-finite entries");
}
}  // namespace

void record_warning(const std::string& message) {
  std::lock_guard lock(g_warning_mutex);
  if (std::find(g_warnings.begin(), g_warnings.end(), message) == g_warnings.end()) {
    g_warnings.push_back(message);
  }
}

std::vector<std::string> take_warnings() {
  std::lock_guard lock(g_warning_mutex);
  return std::exchange(g_warnings, {});
}

HermitianForm::HermitianForm(CMatrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) {
    std::ostringstream msg;
    msg << "HermitianForm: non-square input " << m_.rows() << "x" << m_.cols();
    throw InvalidArgument(msg.str());
  }
}

CMatrix HermitianForm::symmetrized() const {
  return 0.5 * (m_ + m_.adjoint());
}

double HermitianForm::asymmetry() const {
  if (m_.size() == 0) return 0.0;
  const double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
  return (m_ - m_.adjoint()).cwiseAbs().maxCoeff() / scale;
}

namespace {
CMatrix checked_symmetric(const HermitianForm& form, const char* what) {
  require_finite(form.raw(), what);
  const double asym = form.asymmetry();
  if (asym > kAsymmetryError) {
    std::ostringstream msg;
    msg << what << ": asymmetry " << asym << " exceeds " << kAsymmetryError;
    throw NumericalAbort(msg.str());
  }
  if (asym > kAsymmetryWarn) {
    std::ostringstream msg;
    msg << what << ": asymmetry " << asym << " above " << kAsymmetryWarn;
    record_warning(msg.str());
  }
  return form.symmetrized();
}
}  // namespace

Eigen::VectorXd eigenvalues(const HermitianForm& form) {
  const CMatrix sym = checked_symmetric(form, "eigenvalues");
  if (sym.size() == 0) return {};
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(sym, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalAbort("eigenvalues: no convergence");
  return solver.eigenvalues();
}

double min_eigenvalue(const HermitianForm& form) {
  if (form.size() == 0) throw InvalidArgument("min_eigenvalue: empty form");
  return eigenvalues(form)(0);
}

double min_generalized_eigenvalue(const HermitianForm& form, const HermitianForm& metric) {
  if (form.size() != metric.size()) {
    throw InvalidArgument("min_generalized_eigenvalue: size mismatch");
  }
  const CMatrix a = checked_symmetric(form, "min_generalized_eigenvalue");
  const Cholesky chol(checked_symmetric(metric, "min_generalized_eigenvalue metric"),
                      "metric");
  // L^{-1} A L^{-H}
  const CMatrix left = chol.solve_lower(a);
  const CMatrix reduced = chol.solve_lower(CMatrix(left.adjoint())).adjoint();
  return min_eigenvalue(HermitianForm(reduced));
}

Cholesky::Cholesky(const CMatrix& m, const std::string& context) {
  if (m.rows() != m.cols()) throw InvalidArgument("Cholesky: non-square input");
  require_finite(m, "Cholesky");
  const Eigen::Index n = m.rows();
  l_ = CMatrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double diag = m(j, j).real();
    for (Eigen::Index k = 0; k < j; ++k) diag -= std::norm(l_(j, k));
    if (!(diag > 0.0)) throw NotPositiveDefinite(static_cast<std::size_t>(j), context);
    const double ljj = std::sqrt(diag);
    l_(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      cplx s = m(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= l_(i, k) * std::conj(l_(j, k));
      l_(i, j) = s / ljj;
    }
  }
}

CMatrix Cholesky::solve_lower(const CMatrix& rhs) const {
  return l_.triangularView<Eigen::Lower>().solve(rhs);
}

CMatrix Cholesky::solve(const CMatrix& rhs) const {
  if (rhs.rows() != l_.rows()) throw InvalidArgument("Cholesky::solve: size mismatch");
  const CMatrix y = l_.triangularView<Eigen::Lower>().solve(rhs);
  return l_.adjoint().triangularView<Eigen::Upper>().solve(y);
}

CVector Cholesky::solve(const CVector& rhs) const {
  return solve(CMatrix(rhs)).col(0);
}

double Cholesky::log_det() const {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < l_.rows(); ++i) acc += 2.0 * std::log(l_(i, i).real());
  return acc;
}

CVector solve_hpd(const HermitianForm& form, const CVector& rhs) {
  if (rhs.size() != form.size()) throw InvalidArgument("solve_hpd: size mismatch");
  const CMatrix m = checked_symmetric(form, "solve_hpd");
  const Cholesky chol(m, "solve_hpd");
  CVector x = chol.solve(rhs);
  x += chol.solve(CVector(rhs - m * x));
  const double bnorm = rhs.norm();
  const double resid = (m * x - rhs).norm();
  if (resid > 1e-10 * std::max(bnorm, std::numeric_limits<double>::min())) {
    std::ostringstream msg;
    msg << "solve_hpd: relative residual " << resid / bnorm << " above 1e-10";
    throw NumericalAbort(msg.str());
  }
  return x;
}

double equilibrated_condition(const CMatrix& m) {
  const Eigen::Index n = m.rows();
  Eigen::VectorXd scale(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = m(i, i).real();
    if (!(d > 0.0)) return std::numeric_limits<double>::infinity();
    scale(i) = 1.0 / std::sqrt(d);
  }
  const CMatrix eq = scale.asDiagonal() * m * scale.asDiagonal();
  const Eigen::VectorXd ev = eigenvalues(HermitianForm(eq));
  if (!(ev(0) > 0.0)) return std::numeric_limits<double>::infinity();
  return ev(n - 1) / ev(0);
}

double frobenius(const CMatrix& m) { return m.norm(); }

}  // namespace curvlab::numerics
