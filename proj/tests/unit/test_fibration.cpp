#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "curvlab/fibration.hpp"

using namespace curvlab;
using fibration::FibrationModel;

namespace {

constexpr double kPi = std::numbers::pi;

CVector v1(cplx a) {
  CVector v(1);
  v << a;
  return v;
}

FibrationModel model(int l, fibration::PotentialPtr psi) {
  FibrationModel fm;
  fm.twist = l;
  fm.potential = std::move(psi);
  return fm;
}

double factorial(int n) { return std::tgamma(n + 1.0); }

// int_C |zeta|^{2a} (1 + |zeta|^2)^{-l} = pi a! (l - a - 2)! / (l - 1)!
double fs_moment(int a, int l) { return kPi * factorial(a) * factorial(l - a - 2) / factorial(l - 1); }

std::vector<CVector> square_nodes(cplx center, double half, int points) {
  std::vector<CVector> out;
  for (int i = 0; i < points; ++i)
    for (int j = 0; j < points; ++j)
      out.push_back(v1(center + cplx(-half + 2 * half * i / (points - 1), -half + 2 * half * j / (points - 1))));
  return out;
}

}  // namespace

TEST_CASE("Fubini-Study Grams") {
  const auto grid = fibration::chart_grid(40);
  const auto fs = fibration::builtin_potential("fubini_study");
  const auto g3 = fibration::fiber_gram(model(3, fs), v1(0.3), grid);
  CHECK((g3.gram - 0.5 * kPi * CMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-6);
  const auto g2 = fibration::fiber_gram(model(2, fs), v1(0.0), grid);
  REQUIRE(g2.gram.rows() == 1);
  CHECK(g2.gram(0, 0).real() == doctest::Approx(kPi).epsilon(1e-6));
  const auto g6 = fibration::fiber_gram(model(6, fs), v1(0.0), grid);
  for (int a = 0; a < 5; ++a) CHECK(g6.gram(a, a).real() == doctest::Approx(fs_moment(a, 6)).epsilon(1e-8));
  for (const auto& d : g3.d_t) CHECK(d.norm() < 1e-14);
}

TEST_CASE("twisted Gram follows the substitution zeta -> e^{-t} zeta") {
  const auto grid = fibration::chart_grid(40);
  const auto fm = model(4, fibration::builtin_potential("twisted"));
  const cplx t(0.35, -0.6);
  const auto gf = fibration::fiber_gram(fm, v1(t), grid);
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      const double expect = a == b ? std::exp(-2.0 * (a + 1) * t.real()) * fs_moment(a, 4) : 0.0;
      CHECK(std::abs(gf.gram(a, b) - expect) < 1e-8);
    }
  }
}

TEST_CASE("Gram is the same in the opposite chart") {
  const auto grid = fibration::chart_grid(40);
  for (const auto& fm : {model(3, fibration::builtin_potential("fubini_study")),
                         model(5, fibration::builtin_potential("twisted"))}) {
    const cplx t(0.2, 0.1);
    const CMatrix a = fibration::fiber_gram(fm, v1(t), grid).gram;
    const CMatrix b = fibration::opposite_chart_gram(fm, v1(t), *grid);
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-8 * a.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("insufficient decay aborts") {
  const auto grid = fibration::chart_grid(40);
  const auto fm = model(3, fibration::builtin_potential("fubini_study", {0.5}));
  CHECK(fibration::decay_tail_estimate(fm, v1(0.0), *grid) > 1e-8);
  CHECK_THROWS_WITH_AS(fibration::fiber_gram(fm, v1(0.0), grid), doctest::Contains("insufficient decay"),
                       NumericalAbort);
  CHECK(fibration::decay_tail_estimate(model(3, fibration::builtin_potential("fubini_study")), v1(0.0), *grid) <
        1e-8);
}

TEST_CASE("potential catalogue errors") {
  CHECK_THROWS_AS(fibration::builtin_potential("nope"), InvalidArgument);
  CHECK_THROWS_AS(fibration::builtin_potential("fubini_study", {-1.0}), InvalidArgument);
  CHECK_THROWS_AS(fibration::builtin_potential("twisted", {1.0}), InvalidArgument);
  CHECK_THROWS_AS(fibration::fiber_gram(model(1, fibration::builtin_potential("twisted")), v1(0.0),
                                        fibration::chart_grid(8)),
                  InvalidArgument);
}

TEST_CASE("line weights carry correct derivatives") {
  const auto shifted = std::make_shared<fibration::ShiftedPotential>(fibration::builtin_potential("twisted"), 0.4,
                                                                     cplx(0.3, -0.2), cplx(0.1, 0.5));
  const auto w = model(3, shifted).line_weight();
  const auto probes = weights::random_probes(1, 1, 30, 1.0, 2.0, 13);
  const auto rep = weights::validate_derivatives(*w, probes);
  CHECK(rep.passed);
  for (const auto& [kind, dev] : rep.max_deviation) CHECK_MESSAGE(dev < 1e-6, kind);
}

TEST_CASE("fiber positivity relative to Fubini-Study") {
  const auto grid = fibration::chart_grid(20);
  CHECK(fibration::fiber_positivity(model(3, fibration::builtin_potential("fubini_study")), v1(0.0), *grid) ==
        doctest::Approx(1.0));
  CHECK(fibration::fiber_positivity(model(3, fibration::builtin_potential("twisted")), v1(0.5), *grid) > 0.0);
}

TEST_CASE("determinant transformation") {
  Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
  CHECK(std::abs(fibration::det_transform_check(id).factor - 1.0) < 1e-12);
  Eigen::Matrix2cd d;
  d << 2.0, 0.0, 0.0, 3.0;
  CHECK(std::abs(fibration::det_transform_check(d).factor - 6.0) < 1e-12);
  Eigen::Matrix2cd shear;
  shear << 1.0, 1.0, 0.0, 1.0;
  CHECK(std::abs(fibration::det_transform_check(shear).factor - 1.0) < 1e-12);

  std::mt19937_64 rng(99);
  std::normal_distribution<double> n01;
  for (int k = 0; k < 100; ++k) {
    Eigen::Matrix2cd a;
    for (int i = 0; i < 4; ++i) a(i / 2, i % 2) = cplx(n01(rng), n01(rng));
    const auto rep = fibration::det_transform_check(a);
    CHECK(rep.passed);
    CHECK(rep.relative_error <= 1e-10);
    CHECK(std::abs(rep.factor / a.determinant() - 1.0) <= 1e-10);
  }
  Eigen::Matrix2cd singular;
  singular << 1.0, 2.0, 2.0, 4.0;
  CHECK_THROWS_AS(fibration::det_transform_check(singular), InvalidArgument);
}

TEST_CASE("section rank") {
  CHECK(fibration::rank_check(1).section_dim == 0);
  CHECK(fibration::rank_check(1).passed);
  CHECK(fibration::rank_check(2).section_dim == 1);
  CHECK(fibration::rank_check(3).section_dim == 2);
  for (int l = 0; l <= 8; ++l) {
    const auto r = fibration::rank_check(l);
    CHECK(r.passed);
    CHECK(r.section_dim == std::max(0, l - 1));
    CHECK(r.symmetric_rank == r.section_dim);
  }
}

TEST_CASE("Nakano positivity of the fiberwise metric") {
  const auto nodes = square_nodes({0.0, 0.0}, 0.5, 3);
  const auto fs = fibration::builtin_potential("fubini_study");
  const auto flat = fibration::fibration_nakano(model(3, fs), nodes, 40);
  for (const auto& n : flat.nodes) CHECK(std::abs(n.nakano_delta) < 1e-6);

  const auto conf = std::make_shared<fibration::ShiftedPotential>(fs, 1.0 / 3, 0.0, 0.0);
  const auto c = fibration::fibration_nakano(model(3, conf), nodes, 40);
  for (const auto& n : c.nodes) CHECK(n.nakano_delta == doctest::Approx(1.0).epsilon(1e-3));

  const auto tw = std::make_shared<fibration::ShiftedPotential>(fibration::builtin_potential("twisted"), 1.0 / 3,
                                                                0.0, 0.0);
  const auto rep = fibration::fibration_nakano(model(3, tw), nodes, 40);
  CHECK(rep.min_nakano_delta > 0.0);
  CHECK(rep.max_route_deviation < 1e-3);
  for (const auto& n : rep.nodes) CHECK(n.nakano_delta <= n.griffiths_delta + 1e-10);

  // pluriharmonic changes of the potential leave the curvature alone
  const auto ph = std::make_shared<fibration::ShiftedPotential>(fibration::builtin_potential("twisted"), 1.0 / 3,
                                                                cplx(0.7, -0.3), cplx(0.2, 0.4));
  const auto rep2 = fibration::fibration_nakano(model(3, ph), nodes, 40);
  for (std::size_t i = 0; i < nodes.size(); ++i)
    CHECK(std::abs(rep2.nodes[i].nakano_delta - rep.nodes[i].nakano_delta) < 1e-8);
}
