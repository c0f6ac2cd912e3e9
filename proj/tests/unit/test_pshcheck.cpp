#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "curvlab/pshcheck.hpp"

using namespace curvlab;
using pshcheck::GridFunction;
using pshcheck::HoloMap;
using pshcheck::TGridSpec;

namespace {

constexpr double kPi = std::numbers::pi;

CVector v1(cplx a) {
  CVector v(1);
  v << a;
  return v;
}

TGridSpec square(cplx center, double half_width, int points) {
  TGridSpec s;
  s.center = v1(center);
  s.half_width = half_width;
  s.points = points;
  return s;
}

numerics::DomainSpec plane_spec(double r, int q) {
  numerics::DomainSpec d;
  d.kind = numerics::DomainKind::plane_truncation;
  d.radii = {r};
  d.quad_order = {q};
  d.gaussian_decay = true;
  return d;
}

HoloMap constant_map(cplx c) { return HoloMap::polynomial(v1(c), CMatrix::Zero(1, 1), {CMatrix::Zero(1, 1)}); }
HoloMap identity_map() { return HoloMap::polynomial(v1(0.0), CMatrix::Identity(1, 1), {CMatrix::Zero(1, 1)}); }

}  // namespace

TEST_CASE("finite-difference Hessian of quadratics") {
  const auto spec = square({0.2, -0.1}, 1.0, 21);
  const double h = spec.spacing();
  const auto abs2 = pshcheck::sample(spec, [](const CVector& t) { return std::norm(t(0)); });
  for (const auto& m : pshcheck::fd_complex_hessian(abs2).hessian) CHECK(std::abs(m(0, 0) - 1.0) <= 10 * h * h);
  const auto harm = pshcheck::sample(spec, [](const CVector& t) { return (t(0) * t(0)).real(); });
  const auto field = pshcheck::fd_complex_hessian(harm);
  CHECK(field.nodes.size() == 19u * 19u);
  for (const auto& m : field.hessian) CHECK(std::abs(m(0, 0)) <= 10 * h * h);
}

TEST_CASE("two-parameter Hessian") {
  TGridSpec spec;
  spec.center = CVector::Zero(2);
  spec.half_width = 0.5;
  spec.points = 7;
  const auto g = pshcheck::sample(spec, [](const CVector& t) {
    return std::norm(t(0)) + 2.0 * std::norm(t(1)) + (std::conj(t(0)) * t(1)).real();
  });
  CMatrix expect(2, 2);
  expect << 1.0, 0.5, 0.5, 2.0;
  const auto field = pshcheck::fd_complex_hessian(g);
  CHECK(field.nodes.size() == 625u);
  for (const auto& m : field.hessian) CHECK((m - expect).norm() < 1e-9);
  CHECK(pshcheck::psh_report(g).passed);
}

TEST_CASE("grid too small") {
  TGridSpec s = square(0.0, 1.0, 2);
  GridFunction g{s, std::vector<double>(4, 0.0)};
  CHECK_THROWS_WITH_AS(pshcheck::fd_complex_hessian(g), doctest::Contains("grid too small"), InvalidArgument);
  CHECK_THROWS_AS(pshcheck::grid_nodes(s), InvalidArgument);
}

TEST_CASE("finite-difference error falls like h^2") {
  // exact Hessian of e^{|t|^2} / pi is e^{|t|^2}(1 + |t|^2) / pi
  const cplx t0(0.4, 0.3);
  const auto err = [&](double h) {
    const auto g = pshcheck::sample(square(t0, h, 3), [](const CVector& t) { return std::exp(std::norm(t(0))) / kPi; });
    const auto f = pshcheck::fd_complex_hessian(g);
    const double exact = std::exp(std::norm(t0)) * (1 + std::norm(t0)) / kPi;
    return std::abs(f.hessian.at(0)(0, 0).real() - exact);
  };
  const double ratio = err(0.1) / err(0.05);
  CHECK(ratio == doctest::Approx(4.0).epsilon(0.2));
}

TEST_CASE("psh report on Fock kernels and the negative control") {
  const auto w = weights::builtin("fock_shift", {0.0});
  const auto domain = plane_spec(8.0, 60);
  const auto grid = std::make_shared<const numerics::QuadGrid>(numerics::build_grid(domain));
  const bergman::Basis basis(1, 12);
  const auto spec = square(0.0, 1.0, 11);
  const auto k = pshcheck::kernel_along_map(w, basis, domain, grid, constant_map(0.0), spec);
  for (std::size_t i = 0; i < k.size(); ++i) {
    const double exact = std::exp(std::norm(k.base_point(i)(0))) / kPi;
    CHECK(k.values[i] == doctest::Approx(exact).epsilon(1e-4));
  }
  CHECK(pshcheck::psh_report(k).passed);
  const auto logk = pshcheck::log_of(k);
  const auto rep = pshcheck::psh_report(logk);
  CHECK(rep.passed);
  for (const auto& m : rep.field.hessian) CHECK(m(0, 0).real() == doctest::Approx(1.0).epsilon(1e-3));

  const auto neg = pshcheck::sample(spec, [](const CVector& t) { return -std::norm(t(0)); });
  const auto nrep = pshcheck::psh_report(neg);
  CHECK_FALSE(nrep.passed);
  CHECK(nrep.hessian_violation_nodes.size() == nrep.interior_nodes);
  CHECK(nrep.interior_nodes == 81u);
}

TEST_CASE("kernel along maps") {
  const auto domain = plane_spec(8.0, 60);
  const auto grid = std::make_shared<const numerics::QuadGrid>(numerics::build_grid(domain));
  const bergman::Basis basis(1, 12);
  const auto spec = square({0.1, 0.1}, 0.8, 5);

  const auto fock = weights::builtin("fock_shift", {0.0});
  const auto diag = pshcheck::kernel_along_map(fock, basis, domain, grid, identity_map(), spec);
  for (double v : diag.values) CHECK(v == doctest::Approx(1.0 / kPi).epsilon(1e-6));

  const auto product = weights::builtin("product");
  const auto p = pshcheck::kernel_along_map(product, basis, domain, grid, constant_map(0.0), spec);
  const double k0 = 1.0 / kPi;
  for (std::size_t i = 0; i < p.size(); ++i)
    CHECK(p.values[i] == doctest::Approx(k0 * std::exp(std::norm(p.base_point(i)(0)))).epsilon(1e-6));

  const auto both = pshcheck::kernel_along_maps(fock, basis, domain, grid, {identity_map(), constant_map(0.0)}, spec);
  REQUIRE(both.size() == 2u);
  CHECK(both[0].values == diag.values);

  CHECK_THROWS_AS(pshcheck::kernel_along_map(fock, basis, domain, grid, constant_map(7.95), spec), InvalidArgument);
}

TEST_CASE("Cauchy-Riemann residual") {
  CMatrix q = CMatrix::Zero(1, 1);
  q(0, 0) = cplx(0.5, 0.2);
  const auto poly = HoloMap::polynomial(v1({0.1, 0.0}), CMatrix::Identity(1, 1), {q});
  std::vector<CVector> probes{v1({0.3, 0.1}), v1({-0.5, 0.7})};
  CHECK(poly.cauchy_riemann_residual(probes) < 1e-6);
  CHECK(poly(v1(2.0))(0) == cplx(0.1 + 2.0, 0.0) + q(0, 0) * 4.0);
  const HoloMap conj_map("conj", 1, 1, [](const CVector& t) { return v1(std::conj(t(0))); });
  CHECK(conj_map.cauchy_riemann_residual(probes) > 0.5);
}

TEST_CASE("grid csv") {
  const auto g = pshcheck::sample(square(0.0, 1.0, 21), [](const CVector& t) { return std::norm(t(0)); });
  std::stringstream ss;
  pshcheck::write_csv(ss, g);
  std::string line;
  std::getline(ss, line);
  CHECK(line == "t_re,t_im,value");
  std::size_t rows = 0;
  while (std::getline(ss, line)) ++rows;
  CHECK(rows == 441u);
}
