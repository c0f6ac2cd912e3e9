#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "curvlab/bergman.hpp"
#include "curvlab/numerics.hpp"

namespace curvlab::curvature {

/// Curvature blocks H_jk with (Theta_jk u, v)_t = v^H H_jk u for coefficient
/// vectors over the frame. H_kj = H_jk^H.
struct CurvatureAssembly {
  int m = 0;
  std::vector<CMatrix> blocks;  ///< index j * m + k
  bergman::GramFamily family;

  const CMatrix& block(int j, int k) const { return blocks.at(j * m + k); }
  const CMatrix& metric() const { return family.gram; }
  /// sum_jk (Theta_jk u_j, u_k)
  cplx nakano_form(const std::vector<CVector>& u) const;
  /// m * rank square form whose block (k, j) is H_jk.
  CMatrix stacked() const;
  /// max_jk |H_jk - H_kj^H| / max(1, |H|, |M|), entrywise maxima
  double block_asymmetry() const;
};

/// Frame calculus: H_jk = (M_k)^H M^{-1} M_j - M_jk, which realizes
/// (D_j u, D_k v) - d_j dbar_k (u, v) for frame-constant u, v.
CurvatureAssembly curvature_direct(const bergman::GramFamily& gf);

/// Ambient curvature minus the second fundamental form:
/// H_jk(e_a, e_b) = int phi_jk e_a conj(e_b) e^{-phi}
///                  - (pi_perp(phi_j e_a), pi_perp(phi_k e_b)).
CurvatureAssembly curvature_via_second_fundamental_form(const bergman::BergmanFiber& fiber);

/// Largest delta with sum (Theta_jk u_j, u_k) >= delta sum |u_j|^2.
double nakano_delta(const CurvatureAssembly& ca);

struct GriffithsResult {
  double delta = 0.0;
  CVector direction;
};
/// min over unit v in C^m of the metric-normalized minimum eigenvalue of
/// sum_jk v_j conj(v_k) H_jk. Exact for m = 1; for m = 2 a direction scan
/// refined by pattern search.
GriffithsResult griffiths(const CurvatureAssembly& ca);
double griffiths_delta(const CurvatureAssembly& ca);

/// Max over blocks of |A_jk - B_jk|_F / |M|_F.
double route_deviation(const CurvatureAssembly& a, const CurvatureAssembly& b);
/// Max over blocks of |H_jk|_F / |M|_F.
double max_block_norm(const CurvatureAssembly& ca);

struct PositivityReport {
  double nakano_delta = 0.0;
  double griffiths_delta = 0.0;
  std::vector<double> block_norms;  ///< |H_jk|_F per block
  double block_asymmetry = 0.0;
  double route_deviation = -1.0;    ///< negative when only one route ran
  int max_degree = 0;
  int quad_order = 0;
};
PositivityReport positivity_report(const CurvatureAssembly& ca, int max_degree,
                                   int quad_order);

// ---------------------------------------------------------------------------
// Dual bundle

/// Gram family of the dual frame: metric conj(M)^{-1} and its derivatives,
/// pure linear algebra on the input family.
bergman::GramFamily dual_family(const bergman::GramFamily& gf);
CurvatureAssembly dual_assembly(const CurvatureAssembly& ca);

struct DualCheckReport {
  std::vector<double> residuals;
  double max_residual = 0.0;
  double threshold = 1e-10;
  bool passed = true;
};
/// For tuples of dual coefficient vectors xi_j, compares
/// sum (Theta*_jk xi_j, xi_k) with -sum (Theta_jk u_k, u_j), u = J xi.
/// Residuals are relative to the curvature terms plus the second-derivative
/// frame terms they are computed from, so flat bundles are not judged
/// against their own cancellation noise.
DualCheckReport dual_curvature_check(const CurvatureAssembly& ca,
                                     const std::vector<std::vector<CVector>>& samples,
                                     double threshold = 1e-10);

// ---------------------------------------------------------------------------
// Inequality checks on sampled tuples

/// Fixed-seed complex Gaussian coefficient tuples (count tuples of m vectors).
std::vector<std::vector<CVector>> random_tuples(int m, std::size_t rank, std::size_t count,
                                                unsigned long long seed);

struct InequalitySample {
  double lhs = 0.0;
  double rhs = 0.0;
  double scale = 0.0;
  double slack = 0.0;  ///< signed margin in the direction of the inequality
};

struct InequalityReport {
  std::vector<InequalitySample> samples;
  double tolerance = 0.0;  ///< violation when slack < -tolerance * scale
  std::size_t violations = 0;
  double min_relative_slack = 0.0;
  double max_relative_gap = 0.0;  ///< max |lhs - rhs| / scale
  unsigned long long seed = 0;
  bool passed = true;
};

/// lhs = |pi_perp(sum phi_j u_j)|^2, rhs = int Z^{-1}(f, f) e^{-phi} with
/// f_l = sum_j phi_{j l} u_j; asserts lhs <= rhs + 1e-8 scale.
InequalityReport hormander_check(const bergman::BergmanFiber& fiber,
                                 const std::vector<std::vector<CVector>>& tuples,
                                 double tolerance = 1e-8);

/// lhs = sum (Theta_jk u_j, u_k) from the given assembly, rhs =
/// int sum D_jk u_j conj(u_k) e^{-phi}; asserts lhs >= rhs - 1e-6 scale.
InequalityReport lower_bound_check(const CurvatureAssembly& ca,
                                   const bergman::BergmanFiber& fiber,
                                   const std::vector<std::vector<CVector>>& tuples,
                                   double tolerance = 1e-6);

// ---------------------------------------------------------------------------
// Matrix text format: first line "rows cols", then one line per row with
// space-separated "re,im" pairs in full precision.

void write_matrix(std::ostream& out, const CMatrix& m);
CMatrix read_matrix(std::istream& in);

}  // namespace curvlab::curvature
