// Acceptance suite: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "curvlab/curvature.hpp"
#include "curvlab/fibration.hpp"
#include "curvlab/parallel.hpp"
#include "curvlab/pshcheck.hpp"
#include "curvlab/runner.hpp"
#include "curvlab/weights.hpp"
#include "oracles.hpp"

#ifndef CURVLAB_ACCEPTANCE_DIR
#error "CURVLAB_ACCEPTANCE_DIR must name the acceptance config directory"
#endif

using namespace curvlab;
using bergman::Basis;
using bergman::BergmanFiber;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool passed = true;
  std::ostringstream detail;
  std::vector<std::string> failures;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      passed = false;
      failures.push_back(what);
    }
  }
  std::string text() const {
    std::string s = detail.str();
    for (const auto& f : failures) s += " [" + f + "]";
    return s;
  }
};

using Grid = std::shared_ptr<const numerics::QuadGrid>;

numerics::DomainSpec plane_spec(double r, int q) {
  numerics::DomainSpec d;
  d.kind = numerics::DomainKind::plane_truncation;
  d.radii = {r};
  d.quad_order = {q};
  d.gaussian_decay = true;
  return d;
}

Grid plane(double r, int q) { return std::make_shared<const numerics::QuadGrid>(numerics::build_grid(plane_spec(r, q))); }

CVector pt(std::initializer_list<cplx> xs) {
  CVector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (cplx x : xs) v(i++) = x;
  return v;
}

struct Builtin {
  std::string name;
  std::vector<double> params;
  std::string label() const {
    if (params.empty()) return name;
    std::ostringstream s;
    s << name << "(" << params[0] << ")";
    return s.str();
  }
  weights::WeightPtr make() const { return weights::builtin(name, params); }
};

const std::vector<Builtin>& all_builtins() {
  static const std::vector<Builtin> list{{"fock_shift", {0.0}}, {"fock_shift", {0.25}}, {"product", {}},
                                         {"coupled", {}},       {"product2", {}},        {"rank_one2", {}}};
  return list;
}

CVector base_point(int m) { return m == 1 ? pt({{0.2, -0.1}}) : pt({{0.2, -0.1}, {-0.3, 0.15}}); }

double frob_ratio(const CMatrix& a, const CMatrix& m) { return a.norm() / m.norm(); }

// ---------------------------------------------------------------------------

void flatness(Outcome& out) {
  parallel::set_threads(1);
  const auto start = std::chrono::steady_clock::now();
  const auto w = weights::builtin("fock_shift", {0.0});
  const auto grid = plane(6.0, 80);
  double worst = 0.0;
  for (const CVector& t : {pt({0.0}), pt({{0.3, -0.2}}), pt({{-0.5, 0.4}})}) {
    const BergmanFiber f(w, Basis(1, 8), grid, t);
    const auto a = curvature::curvature_direct(f.gram_family());
    const auto b = curvature::curvature_via_second_fundamental_form(f);
    worst = std::max({worst, frob_ratio(a.block(0, 0), a.metric()), frob_ratio(b.block(0, 0), a.metric())});
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.detail << "max |H|/|M| = " << worst << ", " << secs << " s single-threaded";
  out.require(worst <= 1e-3, "block norm above 1e-3 |M|");
  out.require(secs <= 30.0, "runtime above 30 s");
}

void conformal(Outcome& out) {
  const auto grid = plane(8.0, 80);
  for (double eps : {0.1, 0.25}) {
    const auto w = weights::builtin("fock_shift", {eps});
    for (const CVector& t : {pt({0.0}), pt({{0.4, 0.3}}), pt({{-0.6, -0.2}})}) {
      const BergmanFiber f(w, Basis(1, 8), grid, t);
      const double d = curvature::nakano_delta(curvature::curvature_direct(f.gram_family()));
      out.detail << "eps " << eps << ": delta " << d << "; ";
      out.require(std::abs(d - eps) <= 0.02 * eps, "delta off by more than 2%");
      out.require(d > 0.0, "delta not positive");
    }
  }
}

void routes(Outcome& out) {
  const auto grid = plane(9.0, 80);
  for (const auto& b : all_builtins()) {
    const auto w = b.make();
    const CVector t = base_point(w->base_dim());
    double prev = INFINITY;
    double last = 0.0;
    for (int n : {4, 6, 8, 10}) {
      const BergmanFiber f(w, Basis(1, n), grid, t);
      last = curvature::route_deviation(curvature::curvature_direct(f.gram_family()),
                                        curvature::curvature_via_second_fundamental_form(f));
      out.require(last <= prev + 1e-9, b.label() + " deviation grows at N = " + std::to_string(n));
      prev = last;
    }
    out.detail << b.label() << " " << last << "; ";
    out.require(last <= 1e-3, b.label() + " deviation above 1e-3 at N = 10");
  }
}

void hormander(Outcome& out) {
  const auto grid = plane(9.0, 80);
  for (const auto& b : all_builtins()) {
    const auto w = b.make();
    const BergmanFiber f(w, Basis(1, 8), grid, base_point(w->base_dim()));
    const auto tuples = curvature::random_tuples(w->base_dim(), f.basis().size(), 100, 20240401);
    const auto rep = curvature::hormander_check(f, tuples, 1e-8);
    out.detail << b.label() << " gap " << rep.max_relative_gap << "; ";
    out.require(rep.violations == 0, b.label() + " has violations");
    if (b.name == "fock_shift" && b.params[0] == 0.0) out.require(rep.max_relative_gap <= 1e-4, "fock_shift(0) not tight");
  }
}

void lower_bound(Outcome& out) {
  const auto grid = plane(9.0, 80);
  std::vector<Builtin> list = all_builtins();
  list.push_back({"fock_shift", {0.1}});
  for (const auto& b : list) {
    const auto w = b.make();
    const BergmanFiber f(w, Basis(1, 8), grid, base_point(w->base_dim()));
    const auto ca = curvature::curvature_direct(f.gram_family());
    const auto tuples = curvature::random_tuples(w->base_dim(), f.basis().size(), 100, 31);
    const auto rep = curvature::lower_bound_check(ca, f, tuples, 1e-6);
    out.detail << b.label() << " gap " << rep.max_relative_gap << "; ";
    out.require(rep.violations == 0, b.label() + " violates the lower bound");
    if (b.name == "fock_shift" && b.params[0] > 0.0) out.require(rep.max_relative_gap <= 1e-3, b.label() + " not tight");
  }
}

void schur(Outcome& out) {
  const auto probes = weights::random_probes(1, 1, 40, 1.0, 1.5, 6);
  const auto flat = weights::builtin("fock_shift", {0.0});
  const auto shifted = weights::builtin("fock_shift", {0.25});
  const auto coupled = weights::builtin("coupled");
  double flat_max = 0.0;
  double shift_dev = 0.0;
  double coupled_dev = 0.0;
  double oracle_dev = 0.0;
  for (const auto& p : probes) {
    flat_max = std::max(flat_max, std::abs(weights::schur_D(*flat, p.t, p.z).raw()(0, 0)));
    shift_dev = std::max(shift_dev, std::abs(weights::schur_D(*shifted, p.t, p.z).raw()(0, 0) - 0.25));
    const cplx d = weights::schur_D(*coupled, p.t, p.z).raw()(0, 0);
    coupled_dev = std::max(coupled_dev, std::abs(d - oracle::schur_coupled(p.t(0), p.z(0))));
    auto phi = [&](const Eigen::VectorXcd& x) { return coupled->value(x.head(1), x.tail(1)); };
    Eigen::VectorXcd x(2);
    x << p.t(0), p.z(0);
    oracle_dev = std::max(oracle_dev, std::abs(oracle::schur_by_elimination(phi, x, 1, 1e-2)(0, 0) - d));
  }
  out.detail << "fock(0) " << flat_max << ", fock(0.25) " << shift_dev << ", coupled closed form " << coupled_dev
             << ", coupled elimination " << oracle_dev;
  out.require(flat_max == 0.0, "fock_shift(0) not exactly 0");
  out.require(shift_dev <= 1e-12, "fock_shift(0.25) differs from 0.25");
  out.require(coupled_dev <= 1e-8 && oracle_dev <= 1e-8, "coupled differs from the oracle");
}

pshcheck::TGridSpec square(int m, double half, int points) {
  pshcheck::TGridSpec s;
  s.center = CVector::Zero(m);
  s.half_width = half;
  s.points = points;
  return s;
}

pshcheck::HoloMap poly_map(const std::string& name, cplx c0, cplx c1, cplx c2) {
  return pshcheck::HoloMap::polynomial(pt({c0}), CMatrix::Constant(1, 1, c1), {CMatrix::Constant(1, 1, c2)});
}

void kernel_values(Outcome& out) {
  const auto domain = plane_spec(10.0, 60);
  const auto grid = std::make_shared<const numerics::QuadGrid>(numerics::build_grid(domain));
  const auto w = weights::builtin("fock_shift", {0.0});
  const auto spec = square(1, 1.0 / std::sqrt(2.0), 21);
  const auto k = pshcheck::kernel_along_maps(w, Basis(1, 12), domain, grid,
                                             {poly_map("zero", 0.0, 0.0, 0.0), poly_map("identity", 0.0, 1.0, 0.0)},
                                             spec);
  double dev_zero = 0.0;
  double dev_diag = 0.0;
  for (std::size_t i = 0; i < k[0].size(); ++i) {
    const cplx t = k[0].base_point(i)(0);
    dev_zero = std::max(dev_zero, std::abs(k[0].values[i] - oracle::fock_kernel(0.0, t, 0.0)) /
                                      oracle::fock_kernel(0.0, t, 0.0));
    dev_diag = std::max(dev_diag, std::abs(k[1].values[i] - 1.0 / kPi) * kPi);
  }
  out.detail << "K_t(0,0) rel " << dev_zero << ", K_t(t,t) rel " << dev_diag;
  out.require(dev_zero <= 1e-4, "K_t(0,0) off the Fock oracle");
  out.require(dev_diag <= 1e-4, "K_t(t,t) off 1/pi");
}

void psh(Outcome& out) {
  const auto domain = plane_spec(8.0, 40);
  const auto grid = std::make_shared<const numerics::QuadGrid>(numerics::build_grid(domain));
  const std::vector<std::tuple<std::string, cplx, cplx, cplx>> maps{
      {"zero", 0.0, 0.0, 0.0},
      {"constant", {0.4, -0.3}, 0.0, 0.0},
      {"linear", {0.1, 0.2}, {0.8, -0.5}, 0.0},
      {"quadratic", {-0.2, 0.1}, {0.3, 0.4}, {0.7, 0.2}}};
  std::size_t runs = 0;
  for (const auto& b : all_builtins()) {
    const auto w = b.make();
    const int m = w->base_dim();
    auto spec = square(m, 0.7, 21);
    CVector dir = CVector::Zero(m);
    dir(0) = 1.0;
    if (m == 2) dir(1) = b.name == "rank_one2" ? -1.0 : 0.5;
    spec.directions = CMatrix(dir);
    const double dd = dir.squaredNorm();
    std::vector<pshcheck::HoloMap> holos;
    for (const auto& [name, c0, c1, c2] : maps) {
      holos.emplace_back(name, m, 1, [=](const CVector& t) {
        const cplx s = dir.dot(t) / dd;
        return pt({c0 + c1 * s + c2 * s * s});
      });
    }
    const auto values = pshcheck::kernel_along_maps(w, Basis(1, 8), domain, grid, holos, spec);
    for (std::size_t i = 0; i < values.size(); ++i) {
      const auto rk = pshcheck::psh_report(values[i]);
      const auto rl = pshcheck::psh_report(pshcheck::log_of(values[i]));
      const std::string tag = b.label() + "/" + std::get<0>(maps[i]);
      out.require(rk.passed, tag + " K not psh");
      out.require(rl.passed, tag + " log K not psh");
      if (b.name == "fock_shift" && b.params[0] == 0.0 && i == 0) {
        double dev = 0.0;
        for (const auto& h : rl.field.hessian) dev = std::max(dev, std::abs(h(0, 0).real() - 1.0));
        out.detail << "fock log-Hessian dev " << dev << "; ";
        out.require(dev <= 1e-3, "fock log-Hessian differs from 1");
      }
      ++runs;
    }
  }
  const auto neg = pshcheck::psh_report(
      pshcheck::sample(square(1, 0.7, 21), [](const CVector& t) { return -std::norm(t(0)); }));
  out.detail << runs << " grids certified; negative control flagged at " << neg.hessian_violation_nodes.size() << "/"
             << neg.interior_nodes << " nodes";
  out.require(!neg.passed && neg.hessian_violation_nodes.size() == neg.interior_nodes && neg.interior_nodes == 361,
              "negative control not flagged everywhere");
}

void duality(Outcome& out) {
  const auto grid = plane(8.0, 60);
  double worst = 0.0;
  for (const auto& b : all_builtins()) {
    const auto w = b.make();
    const BergmanFiber f(w, Basis(1, 6), grid, base_point(w->base_dim()));
    const auto ca = curvature::curvature_direct(f.gram_family());
    const auto rep = curvature::dual_curvature_check(ca, curvature::random_tuples(w->base_dim(), f.basis().size(), 50, 909));
    worst = std::max(worst, rep.max_residual);
    out.require(rep.passed, b.label() + " dual identity residual above 1e-10");
  }
  out.detail << "max residual " << worst;
}

void fibration_criterion(Outcome& out) {
  const auto grid = fibration::chart_grid(40);
  fibration::FibrationModel fs;
  fs.twist = 3;
  fs.potential = fibration::builtin_potential("fubini_study");
  const double gram_dev = (fibration::fiber_gram(fs, pt({0.0}), grid).gram - 0.5 * kPi * CMatrix::Identity(2, 2))
                              .cwiseAbs()
                              .maxCoeff();
  out.require(gram_dev <= 1e-6, "Fubini-Study Gram differs from pi/2 I");

  std::mt19937_64 rng(1010);
  std::normal_distribution<double> n01;
  double det_err = 0.0;
  for (int k = 0; k < 100; ++k) {
    Eigen::Matrix2cd a;
    for (int i = 0; i < 4; ++i) a(i / 2, i % 2) = cplx(n01(rng), n01(rng));
    const auto rep = fibration::det_transform_check(a);
    det_err = std::max(det_err, std::abs(rep.factor / a.determinant() - 1.0));
  }
  out.require(det_err <= 1e-10, "determinant factor off");

  for (int l = 0; l <= 6; ++l) {
    const auto r = fibration::rank_check(l);
    out.require(r.passed && r.section_dim == std::max(0, l - 1), "rank mismatch at l = " + std::to_string(l));
  }

  fibration::FibrationModel tw;
  tw.twist = 3;
  tw.potential = std::make_shared<fibration::ShiftedPotential>(fibration::builtin_potential("twisted"), 1.0 / 3, 0.0, 0.0);
  std::vector<CVector> nodes;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) nodes.push_back(pt({cplx(-0.5 + 0.25 * i, -0.5 + 0.25 * j)}));
  const auto rep = fibration::fibration_nakano(tw, nodes, 40);
  out.detail << "FS Gram dev " << gram_dev << ", det err " << det_err << ", twisted min delta " << rep.min_nakano_delta
             << ", route dev " << rep.max_route_deviation;
  out.require(rep.min_nakano_delta > 0.0, "twisted delta not positive");
  out.require(rep.max_route_deviation <= 1e-3, "route cross-check above 1e-3");
}

void determinism(Outcome& out) {
  const std::filesystem::path dir = CURVLAB_ACCEPTANCE_DIR;
  std::vector<std::filesystem::path> configs;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.path().extension() == ".json" && e.path().stem() != "ac11_determinism") configs.push_back(e.path());
  std::sort(configs.begin(), configs.end());
  for (const auto& path : configs) {
    const auto cfg = cli::load_config(path);
    std::string reference;
    for (unsigned threads : {1u, 4u}) {
      for (int rep = 0; rep < 2; ++rep) {
        parallel::set_threads(threads);
        const auto r = cli::run(cfg);
        std::string text = cli::canonical_report(r.report);
        for (const auto& f : r.files) text += "\n--" + f.suffix + "\n" + f.content;
        out.require(r.exit_code == 0, path.filename().string() + " exits " + std::to_string(r.exit_code));
        if (reference.empty()) reference = text;
        out.require(text == reference, path.filename().string() + " differs at " + std::to_string(threads) + " threads");
      }
    }
  }
  parallel::set_threads(1);
  out.detail << configs.size() << " configs identical across 1 and 4 threads, 2 repeats";
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
      {"flatness", flatness},       {"conformal", conformal},   {"route agreement", routes},
      {"hormander bound", hormander}, {"curvature lower bound", lower_bound}, {"schur matrix", schur},
      {"kernel values", kernel_values}, {"psh certification", psh}, {"duality", duality},
      {"fibration", fibration_criterion}, {"determinism", determinism}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome out;
    try {
      criteria[i].second(out);
    } catch (const std::exception& e) {
      out.require(false, std::string("threw: ") + e.what());
    }
    parallel::set_threads(1);
    std::printf("%s %2zu %s: %s\n", out.passed ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                out.text().c_str());
    std::fflush(stdout);
    failed += out.passed ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
