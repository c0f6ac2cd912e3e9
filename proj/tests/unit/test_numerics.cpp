#include <doctest.h>

#include <cmath>
#include <numbers>

#include "curvlab/numerics.hpp"
#include "curvlab/parallel.hpp"

using namespace curvlab;
using numerics::DomainKind;
using numerics::DomainSpec;

namespace {

DomainSpec disc(double r, int q) {
  DomainSpec d;
  d.kind = DomainKind::disc;
  d.radii = {r};
  d.quad_order = {q};
  return d;
}

}  // namespace

TEST_CASE("disc rule integrates radial polynomials exactly") {
  const auto grid = numerics::build_grid(disc(2.0, 12));
  CHECK(grid.size() == 2u * 12 * 12);
  // int_{|z|<2} |z|^{2k} = pi 2^{2k+2} / (k + 1)
  for (int k = 0; k <= 5; ++k) {
    std::vector<cplx> v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) v[i] = std::pow(std::norm(grid.nodes[i]), k);
    const double exact = std::numbers::pi * std::pow(2.0, 2 * k + 2) / (k + 1);
    CHECK(numerics::integrate(v, grid).real() == doctest::Approx(exact).epsilon(1e-13));
  }
}

TEST_CASE("angular trapezoid kills off-diagonal monomials") {
  const auto grid = numerics::build_grid(disc(1.5, 10));
  std::vector<cplx> v(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const cplx z = grid.nodes[i];
    v[i] = std::pow(z, 3) * std::pow(std::conj(z), 1);
  }
  CHECK(std::abs(numerics::integrate(v, grid)) < 1e-13);
}

TEST_CASE("polydisc is the tensor product") {
  DomainSpec d;
  d.kind = DomainKind::polydisc;
  d.radii = {1.0, 2.0};
  d.quad_order = {6, 5};
  const auto grid = numerics::build_grid(d);
  CHECK(grid.dim == 2u);
  CHECK(grid.size() == (2u * 36) * (2u * 25));
  CHECK(grid.total_weight() == doctest::Approx(std::numbers::pi * std::numbers::pi * 4.0).epsilon(1e-13));
}

TEST_CASE("chart grid covers the plane") {
  const auto grid = numerics::build_plane_chart_grid(30, 60);
  // int_C (1 + |z|^2)^{-2} = pi ; int_C |z|^2 (1 + |z|^2)^{-4} = pi / 6
  std::vector<cplx> a(grid.size());
  std::vector<cplx> b(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double r2 = std::norm(grid.nodes[i]);
    a[i] = 1.0 / ((1 + r2) * (1 + r2));
    b[i] = r2 / std::pow(1 + r2, 4);
  }
  CHECK(numerics::integrate(a, grid).real() == doctest::Approx(std::numbers::pi).epsilon(1e-13));
  CHECK(numerics::integrate(b, grid).real() == doctest::Approx(std::numbers::pi / 6).epsilon(1e-13));
}

TEST_CASE("domain validation") {
  CHECK_THROWS_WITH_AS(numerics::build_grid(disc(1.0, 2)), doctest::Contains("quad_order"), InvalidArgument);
  CHECK_THROWS_AS(numerics::build_grid(disc(-1.0, 8)), InvalidArgument);
  DomainSpec p = disc(6.0, 8);
  p.kind = DomainKind::plane_truncation;
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("gaussian_decay"), InvalidArgument);
  p.gaussian_decay = true;
  CHECK_NOTHROW(p.validate());
  CHECK(numerics::domain_kind_from_string(numerics::to_string(DomainKind::plane_truncation)) ==
        DomainKind::plane_truncation);
}

TEST_CASE("integrate names the non-finite node") {
  const auto grid = numerics::build_grid(disc(1.0, 4));
  std::vector<cplx> v(grid.size(), 1.0);
  v[7] = std::nan("");
  CHECK_THROWS_WITH_AS(numerics::integrate(v, grid), doctest::Contains("node 7"), InvalidArgument);
  v.pop_back();
  CHECK_THROWS_AS(numerics::integrate(v, grid), InvalidArgument);
}

TEST_CASE("reduction is bitwise independent of the worker count") {
  const auto grid = numerics::build_grid(disc(3.0, 40));
  std::vector<cplx> v(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) v[i] = std::exp(-std::norm(grid.nodes[i])) * grid.nodes[i];
  parallel::set_threads(1);
  const cplx one = numerics::integrate(v, grid);
  for (unsigned k : {2u, 3u, 8u}) {
    parallel::set_threads(k);
    const cplx many = numerics::integrate(v, grid);
    CHECK(many.real() == one.real());
    CHECK(many.imag() == one.imag());
  }
  parallel::set_threads(1);
}

TEST_CASE("parallel_for propagates exceptions") {
  parallel::set_threads(4);
  CHECK_THROWS_AS(parallel::parallel_for(100, [](std::size_t i) {
                    if (i == 42) throw NumericalAbort("boom");
                  }),
                  NumericalAbort);
  parallel::set_threads(1);
}

TEST_CASE("gaussian tail bound") {
  CHECK(numerics::gaussian_tail_bound(6.0, 8) == doctest::Approx(std::exp(-36.0) * std::pow(6.0, 18)));
  const double r = numerics::gaussian_cutoff_radius(12);
  CHECK(numerics::gaussian_tail_bound(r, 12) < 1e-12);
  CHECK(numerics::gaussian_tail_bound(r - 0.25, 12) >= 1e-12);
}

TEST_CASE("hermitian forms: asymmetry thresholds") {
  numerics::take_warnings();
  CMatrix m(2, 2);
  m << 2.0, cplx(0.5, 0.1), cplx(0.5, -0.1), 1.0;
  CHECK(numerics::min_eigenvalue(numerics::HermitianForm(m)) ==
        doctest::Approx(1.5 - std::sqrt(0.25 + 0.26)));
  CHECK(numerics::take_warnings().empty());

  CMatrix warn = m;
  warn(0, 1) += 1e-6;
  numerics::min_eigenvalue(numerics::HermitianForm(warn));
  CHECK(numerics::take_warnings().size() == 1u);

  CMatrix bad = m;
  bad(0, 1) += 0.1;
  CHECK_THROWS_AS(numerics::min_eigenvalue(numerics::HermitianForm(bad)), NumericalAbort);
  CHECK_THROWS_AS(numerics::HermitianForm(CMatrix::Zero(2, 3)), InvalidArgument);
}

TEST_CASE("generalized eigenvalue against the metric") {
  CMatrix a(2, 2);
  a << 3.0, 0.0, 0.0, 8.0;
  CMatrix b(2, 2);
  b << 1.0, 0.0, 0.0, 4.0;
  CHECK(numerics::min_generalized_eigenvalue(numerics::HermitianForm(a), numerics::HermitianForm(b)) ==
        doctest::Approx(2.0));
}

TEST_CASE("cholesky reports the failing pivot") {
  CMatrix m = CMatrix::Identity(3, 3);
  m(2, 2) = -1.0;
  try {
    numerics::Cholesky c(m, "probe");
    FAIL("expected failure");
  } catch (const NotPositiveDefinite& e) {
    CHECK(e.pivot() == 2u);
    CHECK(std::string(e.what()).find("probe") != std::string::npos);
  }
  CMatrix g(2, 2);
  g << 4.0, cplx(1.0, 1.0), cplx(1.0, -1.0), 3.0;
  numerics::Cholesky c(g);
  CVector rhs(2);
  rhs << cplx(1.0, 2.0), cplx(-1.0, 0.5);
  CHECK((g * c.solve(rhs) - rhs).norm() < 1e-14);
  CHECK(c.log_det() == doctest::Approx(std::log(10.0)));
  CHECK((g * numerics::solve_hpd(numerics::HermitianForm(g), rhs) - rhs).norm() < 1e-14);
}

TEST_CASE("equilibrated condition ignores diagonal scaling") {
  CMatrix m(2, 2);
  m << 1e6, 0.0, 0.0, 1e-6;
  CHECK(numerics::equilibrated_condition(m) == doctest::Approx(1.0));
  CMatrix n(2, 2);
  n << 1.0, 0.5, 0.5, 1.0;
  CHECK(numerics::equilibrated_condition(n) == doctest::Approx(3.0));
}
