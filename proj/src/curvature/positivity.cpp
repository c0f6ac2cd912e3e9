#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "curvlab/curvature.hpp"

namespace curvlab::curvature {

double nakano_delta(const CurvatureAssembly& ca) {
  const Eigen::Index r = ca.metric().rows();
  CMatrix metric = CMatrix::Zero(ca.m * r, ca.m * r);
  for (int j = 0; j < ca.m; ++j) metric.block(j * r, j * r, r, r) = ca.metric();
  return numerics::min_generalized_eigenvalue(numerics::HermitianForm(ca.stacked()),
                                              numerics::HermitianForm(metric));
}

namespace {

double directional_min(const CurvatureAssembly& ca, const CVector& v) {
  CMatrix form = CMatrix::Zero(ca.metric().rows(), ca.metric().cols());
  for (int j = 0; j < ca.m; ++j) {
    for (int k = 0; k < ca.m; ++k) form += v(j) * std::conj(v(k)) * ca.block(j, k);
  }
  return numerics::min_generalized_eigenvalue(numerics::HermitianForm(form),
                                              numerics::HermitianForm(ca.metric()));
}

CVector direction2(double theta, double phase) {
  CVector v(2);
  v << std::cos(theta), std::polar(std::sin(theta), phase);
  return v;
}

}  // namespace

GriffithsResult griffiths(const CurvatureAssembly& ca) {
  if (ca.m == 1) {
    CVector v = CVector::Ones(1);
    return {directional_min(ca, v), v};
  }
  if (ca.m != 2) throw InvalidArgument("griffiths: base dimension above 2 is not supported");

  // Unit directions modulo phase: (cos theta, e^{i p} sin theta).
  constexpr int kTheta = 17;
  constexpr int kPhase = 32;
  const double pi = std::numbers::pi;
  struct Candidate {
    double value;
    double theta;
    double phase;
  };
  std::vector<Candidate> scan;
  for (int a = 0; a < kTheta; ++a) {
    const double theta = 0.5 * pi * a / (kTheta - 1);
    const int phases = (a == 0) ? 1 : kPhase;
    for (int b = 0; b < phases; ++b) {
      const double phase = 2.0 * pi * b / kPhase;
      scan.push_back({directional_min(ca, direction2(theta, phase)), theta, phase});
    }
  }
  std::sort(scan.begin(), scan.end(),
            [](const Candidate& x, const Candidate& y) { return x.value < y.value; });

  Candidate best = scan.front();
  const std::size_t starts = std::min<std::size_t>(3, scan.size());
  for (std::size_t s = 0; s < starts; ++s) {
    Candidate cur = scan[s];
    double step_theta = 0.5 * pi / (kTheta - 1);
    double step_phase = 2.0 * pi / kPhase;
    for (int iter = 0; iter < 60 && step_theta > 1e-9; ++iter) {
      bool moved = false;
      const std::array<std::array<double, 2>, 4> moves = {
          {{step_theta, 0.0}, {-step_theta, 0.0}, {0.0, step_phase}, {0.0, -step_phase}}};
      for (const auto& mv : moves) {
        const double theta = std::clamp(cur.theta + mv[0], 0.0, 0.5 * pi);
        const double phase = cur.phase + mv[1];
        const double value = directional_min(ca, direction2(theta, phase));
        if (value < cur.value) {
          cur = {value, theta, phase};
          moved = true;
        }
      }
      if (!moved) {
        step_theta *= 0.5;
        step_phase *= 0.5;
      }
    }
    if (cur.value < best.value) best = cur;
  }
  return {best.value, direction2(best.theta, best.phase)};
}

double griffiths_delta(const CurvatureAssembly& ca) { return griffiths(ca).delta; }

PositivityReport positivity_report(const CurvatureAssembly& ca, int max_degree,
                                   int quad_order) {
  PositivityReport report;
  report.nakano_delta = nakano_delta(ca);
  report.griffiths_delta = griffiths_delta(ca);
  for (const auto& b : ca.blocks) report.block_norms.push_back(numerics::frobenius(b));
  report.block_asymmetry = ca.block_asymmetry();
  report.max_degree = max_degree;
  report.quad_order = quad_order;
  return report;
}

}  // namespace curvlab::curvature
