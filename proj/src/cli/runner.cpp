#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "curvlab/curvature.hpp"
#include "curvlab/fibration.hpp"
#include "curvlab/parallel.hpp"
#include "curvlab/pshcheck.hpp"
#include "curvlab/runner.hpp"
#include "curvlab/weights.hpp"

namespace curvlab::cli {

namespace {

json cjson(cplx z) { return json::array({z.real(), z.imag()}); }

json vjson(const CVector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(cjson(v(i)));
  return a;
}

json mjson(const CMatrix& m) {
  json a = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(vjson(m.row(r).transpose()));
  return a;
}

/// NaN and infinities become null so the report stays valid JSON.
json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::string point_text(const CVector& t) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    if (i) s += "; ";
    s += format_double(t(i).real()) + (t(i).imag() < 0 ? "" : "+") + format_double(t(i).imag()) + "i";
  }
  return s + ")";
}

/// t1_re, t1_im, t2_re, t2_im with empty cells past the base dimension.
std::vector<std::string> point_cells(const CVector& t, int width = 2) {
  std::vector<std::string> cells;
  for (int i = 0; i < width; ++i) {
    if (i < t.size()) {
      cells.push_back(format_double(t(i).real()));
      cells.push_back(format_double(t(i).imag()));
    } else {
      cells.emplace_back();
      cells.emplace_back();
    }
  }
  return cells;
}

template <class F>
auto in_context(const std::string& ctx, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const NumericalAbort& e) {
    throw NumericalAbort(ctx + ": " + e.what());
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(ctx + ": " + e.what());
  }
}

class Checks {
 public:
  void add(const std::string& name, bool passed, json detail = json::object()) {
    detail["name"] = name;
    detail["passed"] = passed;
    list_.push_back(std::move(detail));
    all_ = all_ && passed;
  }
  /// |value - expected| <= tolerance
  void near(const std::string& name, double value, double expected, double tolerance) {
    add(name, std::abs(value - expected) <= tolerance,
        {{"value", num(value)}, {"expected", expected}, {"tolerance", tolerance}});
  }
  /// value <= bound
  void at_most(const std::string& name, double value, double bound) {
    add(name, value <= bound, {{"value", num(value)}, {"bound", bound}});
  }
  const json& list() const { return list_; }
  bool all() const { return all_; }

 private:
  json list_ = json::array();
  bool all_ = true;
};

json inequality_json(curvature::InequalityReport r, unsigned long long seed) {
  r.seed = seed;
  return {{"samples", r.samples.size()},
          {"violations", r.violations},
          {"tolerance", r.tolerance},
          {"min_relative_slack", num(r.min_relative_slack)},
          {"max_relative_gap", num(r.max_relative_gap)},
          {"seed", r.seed},
          {"passed", r.passed}};
}

void add_samples(CsvTable& table, const std::string& weight, std::size_t point,
                 const std::string& check, const curvature::InequalityReport& r) {
  for (std::size_t s = 0; s < r.samples.size(); ++s) {
    const auto& x = r.samples[s];
    table.add({weight, std::to_string(point), check, std::to_string(s), format_double(x.lhs),
               format_double(x.rhs), format_double(x.scale), format_double(x.slack)});
  }
}

// ---------------------------------------------------------------------------

json run_curvature(const CurvatureConfig& c, const std::string& name, Checks& checks,
                   std::vector<OutputFile>& files) {
  CsvTable conv{{"weight", "point", "t1_re", "t1_im", "t2_re", "t2_im", "N", "nakano_delta",
                 "griffiths_delta", "route_deviation", "max_block_norm_direct",
                 "max_block_norm_sff", "block_asymmetry", "condition", "tail_bound"},
                {}};
  CsvTable samples{{"weight", "point", "check", "sample", "lhs", "rhs", "scale", "slack"}, {}};
  const int n_max = *std::max_element(c.max_degrees.begin(), c.max_degrees.end());
  std::vector<int> ascending = c.max_degrees;
  std::sort(ascending.begin(), ascending.end());
  ascending.erase(std::unique(ascending.begin(), ascending.end()), ascending.end());
  const bool plane = c.domain.kind == numerics::DomainKind::plane_truncation;

  json weights_out = json::array();
  for (std::size_t wi = 0; wi < c.weights.size(); ++wi) {
    const WeightEntry& entry = c.weights[wi];
    const std::string wkey = "weights[" + std::to_string(wi) + "]";
    const std::string label = entry.label();
    const auto w = in_context(wkey, [&] { return weights::builtin(entry.name, entry.params); });
    const auto domain = c.domain.spec(entry.fiber_dim, c.quad_order);
    const auto grid = in_context("domain", [&] {
      return std::make_shared<const numerics::QuadGrid>(numerics::build_grid(domain));
    });
    json wout = {{"weight", label}, {"strictness_margin", w->strictness_margin()},
                 {"points", json::array()}};
    for (std::size_t pi = 0; pi < c.base_points[wi].size(); ++pi) {
      const CVector& t = c.base_points[wi][pi];
      const std::string where = wkey + " " + label + " at t=" + point_text(t);
      const std::string tag = "[" + label + "][t" + std::to_string(pi) + "]";
      json pout = {{"t", vjson(t)}, {"degrees", json::array()}};
      std::map<int, double> deviation_by_n;
      std::optional<bergman::BergmanFiber> top_fiber;
      std::optional<curvature::CurvatureAssembly> top_direct;
      std::optional<curvature::CurvatureAssembly> top_sff;
      std::optional<curvature::PositivityReport> top_rep;
      for (const int n : c.max_degrees) {
        const std::string ctx = where + ", max_degree=" + std::to_string(n);
        in_context(ctx, [&] {
          bergman::BergmanFiber fiber(w, bergman::Basis(entry.fiber_dim, n), grid, t);
          auto direct = curvature::curvature_direct(fiber.gram_family());
          auto rep = curvature::positivity_report(direct, n, c.quad_order);
          double norm_sff = std::nan("");
          std::optional<curvature::CurvatureAssembly> sff;
          if (c.both_routes) {
            sff = curvature::curvature_via_second_fundamental_form(fiber);
            rep.route_deviation = curvature::route_deviation(direct, *sff);
            norm_sff = curvature::max_block_norm(*sff);
            deviation_by_n[n] = rep.route_deviation;
          }
          const double norm_direct = curvature::max_block_norm(direct);
          double tail = std::nan("");
          if (plane) {
            tail = numerics::gaussian_tail_bound(c.domain.radius, n);
            if (!(tail < 1e-12)) {
              std::ostringstream msg;
              msg << "tail bound e^{-R^2} R^{2N+2} = " << tail << " >= 1e-12 at R = "
                  << c.domain.radius << ", N = " << n;
              numerics::record_warning(msg.str());
            }
          }
          pout["degrees"].push_back({{"N", n},
                                     {"nakano_delta", num(rep.nakano_delta)},
                                     {"griffiths_delta", num(rep.griffiths_delta)},
                                     {"route_deviation", num(c.both_routes ? rep.route_deviation : std::nan(""))},
                                     {"max_block_norm_direct", num(norm_direct)},
                                     {"max_block_norm_sff", num(norm_sff)},
                                     {"block_asymmetry", num(rep.block_asymmetry)},
                                     {"condition", num(direct.family.condition)},
                                     {"tail_bound", num(tail)}});
          std::vector<std::string> row = {label, std::to_string(pi)};
          for (auto& cell : point_cells(t)) row.push_back(cell);
          for (double x : {rep.nakano_delta, rep.griffiths_delta,
                           c.both_routes ? rep.route_deviation : std::nan(""), norm_direct,
                           norm_sff, rep.block_asymmetry, direct.family.condition, tail}) {
            row.push_back(format_double(x));
          }
          row.insert(row.begin() + 6, std::to_string(n));
          conv.add(std::move(row));
          if (n == n_max && !top_fiber) {
            top_fiber.emplace(std::move(fiber));
            top_direct = std::move(direct);
            top_sff = std::move(sff);
            top_rep = rep;
          }
          return 0;
        });
      }

      const auto& rep = *top_rep;
      const auto& direct = *top_direct;
      checks.at_most("block_symmetry" + tag, direct.block_asymmetry(), 1e-10);
      if (top_sff) checks.at_most("block_symmetry_sff" + tag, top_sff->block_asymmetry(), 1e-10);
      checks.add("nakano_le_griffiths" + tag, rep.nakano_delta <= rep.griffiths_delta + 1e-10,
                 {{"nakano_delta", num(rep.nakano_delta)}, {"griffiths_delta", num(rep.griffiths_delta)}});
      const WeightExpect& ex = entry.expect;
      if (ex.nakano_delta) {
        checks.near("nakano_delta" + tag, rep.nakano_delta, *ex.nakano_delta,
                    std::max(ex.nakano_abs_tol, ex.nakano_rel_tol * std::abs(*ex.nakano_delta)));
      }
      if (ex.griffiths_delta) {
        checks.near("griffiths_delta" + tag, rep.griffiths_delta, *ex.griffiths_delta,
                    ex.griffiths_abs_tol);
      }
      if (ex.max_block_norm) {
        checks.at_most("max_block_norm_direct" + tag, curvature::max_block_norm(direct), *ex.max_block_norm);
        if (top_sff) {
          checks.at_most("max_block_norm_sff" + tag, curvature::max_block_norm(*top_sff),
                         *ex.max_block_norm);
        }
      }
      if (c.expect_strict_positive && w->strictness_margin() > 0.0) {
        checks.add("strict_positivity" + tag, rep.nakano_delta > 0.0,
                   {{"nakano_delta", num(rep.nakano_delta)}, {"strictness_margin", w->strictness_margin()}});
      }
      if (c.expect_route_deviation) {
        checks.at_most("route_deviation" + tag, deviation_by_n.at(n_max), *c.expect_route_deviation);
      }
      if (c.expect_route_monotone) {
        bool mono = true;
        json seq = json::array();
        for (std::size_t k = 0; k < ascending.size(); ++k) {
          seq.push_back({{"N", ascending[k]}, {"route_deviation", num(deviation_by_n.at(ascending[k]))}});
          if (k > 0 && !(deviation_by_n.at(ascending[k]) <=
                         deviation_by_n.at(ascending[k - 1]) + c.route_noise)) {
            mono = false;
          }
        }
        checks.add("route_monotone" + tag, mono, {{"sequence", seq}, {"noise", c.route_noise}});
      }

      const auto rank = top_fiber->basis().size();
      const int m = entry.base_dim;
      if (c.hormander) {
        const auto tuples = curvature::random_tuples(m, rank, static_cast<std::size_t>(c.samples->count), c.samples->seed);
        const auto r = in_context(where, [&] { return curvature::hormander_check(*top_fiber, tuples, c.hormander_tol); });
        pout["hormander"] = inequality_json(r, c.samples->seed);
        add_samples(samples, label, pi, "hormander", r);
        checks.add("hormander" + tag, r.violations == 0,
                   {{"violations", r.violations}, {"min_relative_slack", num(r.min_relative_slack)}});
        if (ex.hormander_gap) checks.at_most("hormander_equality" + tag, r.max_relative_gap, *ex.hormander_gap);
      }
      if (c.lower_bound) {
        const auto tuples = curvature::random_tuples(m, rank, static_cast<std::size_t>(c.samples->count), c.samples->seed);
        const auto r = in_context(where, [&] {
          return curvature::lower_bound_check(direct, *top_fiber, tuples, c.lower_bound_tol);
        });
        pout["lower_bound"] = inequality_json(r, c.samples->seed);
        add_samples(samples, label, pi, "lower_bound", r);
        checks.add("lower_bound" + tag, r.violations == 0,
                   {{"violations", r.violations}, {"min_relative_slack", num(r.min_relative_slack)}});
        if (ex.lower_bound_gap) checks.at_most("lower_bound_equality" + tag, r.max_relative_gap, *ex.lower_bound_gap);
      }
      if (c.dual) {
        const auto tuples = curvature::random_tuples(m, rank, static_cast<std::size_t>(c.dual_samples), c.samples->seed);
        const auto r = curvature::dual_curvature_check(direct, tuples, c.dual_tol);
        pout["dual"] = {{"samples", r.residuals.size()}, {"max_residual", num(r.max_residual)},
                        {"threshold", r.threshold}, {"seed", c.samples->seed}};
        checks.add("dual_identity" + tag, r.passed,
                   {{"max_residual", num(r.max_residual)}, {"threshold", r.threshold}});
      }
      if (c.export_blocks) {
        auto dump = [&](const curvature::CurvatureAssembly& ca, const std::string& route) {
          for (int j = 0; j < ca.m; ++j) {
            for (int k = 0; k < ca.m; ++k) {
              std::ostringstream out;
              curvature::write_matrix(out, ca.block(j, k));
              files.push_back({".w" + std::to_string(wi) + ".p" + std::to_string(pi) + "." + route +
                                   ".H" + std::to_string(j + 1) + std::to_string(k + 1) + ".txt",
                               out.str()});
            }
          }
        };
        dump(direct, "direct");
        if (top_sff) dump(*top_sff, "sff");
      }
      wout["points"].push_back(std::move(pout));
    }
    weights_out.push_back(std::move(wout));
  }
  files.push_back({".convergence.csv", conv.str()});
  files.push_back({".samples.csv", samples.str()});
  (void)name;
  return {{"weights", weights_out}};
}

// ---------------------------------------------------------------------------

pshcheck::HoloMap slice_map(const MapEntry& e, const WeightEntry& w) {
  const CVector center = w.slice_center;
  const CVector dir = w.slice_direction;
  const double dd = dir.squaredNorm();
  const cplx c0 = e.constant(0);
  const cplx c1 = e.linear(0, 0);
  const cplx c2 = e.quadratic[0](0, 0);
  return pshcheck::HoloMap(e.name, w.base_dim, 1, [=](const CVector& t) {
    const cplx s = dir.dot(t - center) / dd;
    CVector z(1);
    z(0) = c0 + c1 * s + c2 * s * s;
    return z;
  });
}

json psh_json(const pshcheck::PshReport& r, bool list_nodes) {
  json out = {{"spacing", r.spacing},
              {"tol_grid", num(r.tol_grid)},
              {"error_constant", num(r.error_constant)},
              {"min_hessian_eig", num(r.min_hessian_eig)},
              {"min_mean_value_defect", num(r.min_mean_value_defect)},
              {"interior_nodes", r.interior_nodes},
              {"violation_count", r.violations.size()},
              {"hessian_violation_nodes", r.hessian_violation_nodes.size()},
              {"passed", r.passed}};
  if (list_nodes) {
    json v = json::array();
    for (const auto& x : r.violations) {
      v.push_back({{"node", x.node}, {"t", vjson(x.t)}, {"kind", x.kind}, {"value", num(x.value)}});
    }
    out["violations"] = v;
  }
  return out;
}

std::vector<std::string> hessian_cells(const pshcheck::PshReport& r, std::size_t nodes) {
  std::vector<std::string> cells(nodes);
  for (std::size_t k = 0; k < r.field.nodes.size(); ++k) {
    cells[r.field.nodes[k]] = format_double(r.field.min_eig[k]);
  }
  return cells;
}

void add_psh_check(Checks& checks, const std::string& name, const pshcheck::PshReport& r) {
  checks.add(name, r.passed,
             {{"min_hessian_eig", num(r.min_hessian_eig)},
              {"tol_grid", num(r.tol_grid)},
              {"min_mean_value_defect", num(r.min_mean_value_defect)},
              {"violations", r.violations.size()}});
}

json run_kernel_psh(const KernelPshConfig& c, Checks& checks, std::vector<OutputFile>& files) {
  json pairs_out = json::array();
  for (std::size_t wi = 0; wi < c.weights.size(); ++wi) {
    const WeightEntry& entry = c.weights[wi];
    const std::string wkey = "weights[" + std::to_string(wi) + "]";
    const std::string label = entry.label();
    const auto w = in_context(wkey, [&] { return weights::builtin(entry.name, entry.params); });
    const auto domain = c.domain.spec(1, c.quad_order);
    const auto grid = in_context("domain", [&] {
      return std::make_shared<const numerics::QuadGrid>(numerics::build_grid(domain));
    });
    const bergman::Basis basis(1, c.max_degree);
    pshcheck::TGridSpec tg;
    tg.center = entry.slice_center;
    tg.half_width = c.half_width;
    tg.points = c.points;
    tg.directions = CMatrix(entry.base_dim, 1);
    tg.directions.col(0) = entry.slice_direction;

    std::vector<pshcheck::HoloMap> holos;
    for (const MapEntry& me : c.maps) holos.push_back(slice_map(me, entry));
    const auto grids = in_context(wkey + " " + label, [&] {
      return pshcheck::kernel_along_maps(w, basis, domain, grid, holos, tg);
    });
    for (std::size_t mi = 0; mi < c.maps.size(); ++mi) {
      const MapEntry& me = c.maps[mi];
      const std::string tag = "[" + label + "][" + me.name + "]";
      const auto& holo = holos[mi];
      const auto& g = grids[mi];
      const auto rk = pshcheck::psh_report(g);
      add_psh_check(checks, "psh_kernel" + tag, rk);
      json pout = {{"weight", label}, {"map", me.name}, {"kernel", psh_json(rk, !rk.passed)},
                   {"min_value", *std::min_element(g.values.begin(), g.values.end())},
                   {"max_value", *std::max_element(g.values.begin(), g.values.end())}};
      std::optional<pshcheck::GridFunction> lg;
      std::optional<pshcheck::PshReport> rl;
      if (c.log) {
        lg = pshcheck::log_of(g);
        rl = pshcheck::psh_report(*lg);
        add_psh_check(checks, "psh_log_kernel" + tag, *rl);
        pout["log_kernel"] = psh_json(*rl, !rl->passed);
      }
      for (const PairExpect& pe : c.expect) {
        if (pe.weight != wi || pe.map != me.name) continue;
        if (pe.kernel_fock_shift) {
          double worst = 0.0;
          for (std::size_t k = 0; k < g.size(); ++k) {
            const CVector t = g.base_point(k);
            const cplx z = holo(t)(0);
            const double oracle =
                std::exp(std::norm(z - t(0)) + *pe.kernel_fock_shift * std::norm(t(0))) / std::numbers::pi;
            worst = std::max(worst, std::abs(g.values[k] - oracle) / std::max(1.0, oracle));
          }
          checks.at_most("kernel_oracle" + tag, worst, pe.kernel_tol);
          pout["kernel_oracle_error"] = worst;
        }
        if (pe.log_hessian) {
          double worst = 0.0;
          for (const CMatrix& h : rl->field.hessian) {
            const double dev = (h - *pe.log_hessian * CMatrix::Identity(h.rows(), h.cols())).cwiseAbs().maxCoeff();
            worst = std::max(worst, dev);
          }
          checks.at_most("log_hessian" + tag, worst, pe.log_hessian_tol);
          pout["log_hessian_error"] = worst;
        }
      }

      CsvTable table{{"t1_re", "t1_im", "t2_re", "t2_im", "s_re", "s_im", "value", "hessian_min",
                      "log_value", "log_hessian_min"},
                     {}};
      const auto hk = hessian_cells(rk, g.size());
      const auto hl = rl ? hessian_cells(*rl, g.size()) : std::vector<std::string>(g.size());
      for (std::size_t k = 0; k < g.size(); ++k) {
        auto row = point_cells(g.base_point(k));
        const CVector s = g.grid_point(k);
        row.push_back(format_double(s(0).real()));
        row.push_back(format_double(s(0).imag()));
        row.push_back(format_double(g.values[k]));
        row.push_back(hk[k]);
        row.push_back(lg ? format_double(lg->values[k]) : std::string());
        row.push_back(hl[k]);
        table.add(std::move(row));
      }
      files.push_back({".grid.w" + std::to_string(wi) + "." + me.name + ".csv", table.str()});
      pairs_out.push_back(std::move(pout));
    }
  }

  json out = {{"pairs", pairs_out}};
  if (c.negative_control || c.expect_negative_flagged) {
    pshcheck::TGridSpec tg;
    tg.center = CVector::Zero(1);
    tg.half_width = c.half_width;
    tg.points = c.points;
    const auto g = pshcheck::sample(tg, [](const CVector& t) { return -t.squaredNorm(); });
    const auto r = pshcheck::psh_report(g);
    out["negative_control"] = psh_json(r, true);
    if (c.negative_control) add_psh_check(checks, "psh_negative_control", r);
    if (c.expect_negative_flagged) {
      checks.add("negative_control_flagged", r.hessian_violation_nodes.size() == r.interior_nodes && r.interior_nodes > 0,
                 {{"flagged", r.hessian_violation_nodes.size()}, {"interior_nodes", r.interior_nodes}});
    }
    CsvTable table{{"t_re", "t_im", "value", "hessian_min"}, {}};
    const auto h = hessian_cells(r, g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
      const CVector t = g.base_point(k);
      table.add({format_double(t(0).real()), format_double(t(0).imag()), format_double(g.values[k]), h[k]});
    }
    files.push_back({".grid.negative_control.csv", table.str()});
  }
  return out;
}

// ---------------------------------------------------------------------------

json run_fibration(const FibrationConfig& c, Checks& checks, std::vector<OutputFile>& files) {
  json out = json::object();
  CsvTable nodes{{"t_re", "t_im", "nakano_delta", "griffiths_delta", "route_deviation", "condition"}, {}};
  CsvTable ranks{{"twist", "section_dim", "symmetric_rank", "expected", "passed"}, {}};

  fibration::FibrationModel fm;
  fm.twist = c.twist;
  const bool needs_potential = c.gram || c.chart_independence || c.nakano || c.pluriharmonic_invariance;
  if (needs_potential) {
    auto base = in_context("potential", [&] {
      return fibration::builtin_potential(c.potential, c.potential_params);
    });
    if (c.conformal != 0.0 || c.harmonic_linear != 0.0 || c.harmonic_quadratic != 0.0) {
      base = std::make_shared<fibration::ShiftedPotential>(base, c.conformal / c.twist,
                                                            c.harmonic_linear, c.harmonic_quadratic);
    }
    fm.potential = base;
    out["potential"] = base->name();
  }
  const auto grid = fibration::chart_grid(c.quad_order);

  if (c.gram || c.chart_independence) {
    json grams = json::array();
    for (std::size_t pi = 0; pi < c.base_points.size(); ++pi) {
      const CVector& t = c.base_points[pi];
      const std::string tag = "[t" + std::to_string(pi) + "]";
      const auto gf = in_context("base_points[" + std::to_string(pi) + "] t=" + point_text(t),
                                 [&] { return fibration::fiber_gram(fm, t, grid); });
      json g = {{"t", vjson(t)}, {"gram", mjson(gf.gram)}, {"condition", num(gf.condition)}};
      if (c.gram && c.expect_gram_scale) {
        const CMatrix target = *c.expect_gram_scale * CMatrix::Identity(gf.gram.rows(), gf.gram.cols());
        checks.at_most("gram_oracle" + tag, (gf.gram - target).cwiseAbs().maxCoeff(), c.gram_tol);
      }
      if (c.chart_independence) {
        const CMatrix opp = fibration::opposite_chart_gram(fm, t, *grid);
        const double dev = (opp - gf.gram).cwiseAbs().maxCoeff() / gf.gram.cwiseAbs().maxCoeff();
        g["opposite_chart_deviation"] = num(dev);
        checks.at_most("chart_independence" + tag, dev, c.chart_tol);
      }
      grams.push_back(std::move(g));
    }
    out["grams"] = grams;
  }

  if (c.det_transform) {
    std::mt19937_64 rng(c.det_samples->seed);
    std::normal_distribution<double> gauss;
    double worst = 0.0;
    double worst_chart = 0.0;
    std::size_t failures = 0;
    for (int s = 0; s < c.det_samples->count; ++s) {
      Eigen::Matrix2cd a;
      for (int i = 0; i < 2; ++i) {
        for (int k = 0; k < 2; ++k) {
          const double re = gauss(rng);
          const double im = gauss(rng);
          a(i, k) = {re, im};
        }
      }
      const auto r = fibration::det_transform_check(a, c.det_tol);
      worst = std::max({worst, r.relative_error, r.form_residual});
      worst_chart = std::max(worst_chart, r.chart_residual);
      if (!r.passed) ++failures;
    }
    json fixed = json::array();
    Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
    Eigen::Matrix2cd diag;
    diag << 2.0, 0.0, 0.0, 3.0;
    Eigen::Matrix2cd shear;
    shear << 1.0, 1.0, 0.0, 1.0;
    for (const auto& [label, a] : {std::pair{"identity", id}, std::pair{"diag(2,3)", diag}, std::pair{"shear", shear}}) {
      const auto r = fibration::det_transform_check(a, c.det_tol);
      fixed.push_back({{"matrix", label}, {"factor", cjson(r.factor)}, {"determinant", cjson(r.determinant)}, {"passed", r.passed}});
      if (!r.passed) ++failures;
    }
    out["det_transform"] = {{"samples", c.det_samples->count}, {"seed", c.det_samples->seed},
                            {"max_relative_error", worst}, {"max_chart_residual", worst_chart},
                            {"fixed", fixed}};
    checks.add("det_transform", failures == 0,
               {{"failures", failures}, {"max_relative_error", worst}, {"tolerance", c.det_tol}});
  }

  if (c.rank) {
    json levels = json::array();
    bool ok = true;
    for (const int l : c.rank_levels) {
      const auto r = fibration::rank_check(l);
      ok = ok && r.passed;
      levels.push_back({{"twist", l}, {"section_dim", r.section_dim}, {"symmetric_rank", r.symmetric_rank},
                        {"expected", r.expected}, {"passed", r.passed}});
      ranks.add({std::to_string(l), std::to_string(r.section_dim), std::to_string(r.symmetric_rank),
                 std::to_string(r.expected), r.passed ? "true" : "false"});
    }
    out["rank"] = levels;
    checks.add("rank", ok);
  }

  if (c.nakano || c.pluriharmonic_invariance) {
    const auto rep = in_context("fibration", [&] {
      return fibration::fibration_nakano(fm, c.base_points, c.quad_order);
    });
    json per = json::array();
    for (const auto& n : rep.nodes) {
      per.push_back({{"t", vjson(n.t)}, {"nakano_delta", num(n.nakano_delta)},
                     {"griffiths_delta", num(n.griffiths_delta)},
                     {"route_deviation", num(n.route_deviation)}, {"condition", num(n.condition)}});
      nodes.add({format_double(n.t(0).real()), format_double(n.t(0).imag()),
                 format_double(n.nakano_delta), format_double(n.griffiths_delta),
                 format_double(n.route_deviation), format_double(n.condition)});
    }
    out["nakano"] = {{"nodes", per}, {"min_nakano_delta", num(rep.min_nakano_delta)},
                     {"max_route_deviation", num(rep.max_route_deviation)}};
    if (c.expect_nakano_delta) {
      double worst = 0.0;
      for (const auto& n : rep.nodes) worst = std::max(worst, std::abs(n.nakano_delta - *c.expect_nakano_delta));
      checks.at_most("fibration_nakano_delta", worst, c.nakano_tol);
    }
    if (c.expect_nakano_positive) {
      std::size_t bad = 0;
      for (const auto& n : rep.nodes) bad += n.nakano_delta > 0.0 ? 0 : 1;
      checks.add("fibration_nakano_positive", bad == 0,
                 {{"nonpositive_nodes", bad}, {"min_nakano_delta", num(rep.min_nakano_delta)}});
    }
    if (c.expect_route_deviation) {
      checks.at_most("fibration_route_deviation", rep.max_route_deviation, *c.expect_route_deviation);
    }
    if (c.pluriharmonic_invariance) {
      fibration::FibrationModel shifted = fm;
      shifted.potential = std::make_shared<fibration::ShiftedPotential>(fm.potential, 0.0, c.probe_linear,
                                                                        c.probe_quadratic);
      const auto rs = in_context("pluriharmonic_probe", [&] {
        return fibration::fibration_nakano(shifted, c.base_points, c.quad_order);
      });
      double worst = 0.0;
      for (std::size_t k = 0; k < rep.nodes.size(); ++k) {
        worst = std::max(worst, std::abs(rep.nodes[k].nakano_delta - rs.nodes[k].nakano_delta));
      }
      out["pluriharmonic_invariance"] = {{"max_delta_change", worst}};
      checks.at_most("pluriharmonic_invariance", worst, c.invariance_tol);
    }
  }
  files.push_back({".nodes.csv", nodes.str()});
  files.push_back({".rank.csv", ranks.str()});
  return out;
}

// ---------------------------------------------------------------------------

/// Schur matrix by block elimination on a finite-difference complex Hessian
/// built from weight values only (central differences, Richardson in h).
CMatrix fd_schur(const weights::WeightModel& w, const CVector& t, const CVector& z, double h) {
  const int m = w.base_dim();
  const int n = w.fiber_dim();
  const int d = m + n;
  CVector p(d);
  p << t, z;
  auto f = [&](const Eigen::VectorXd& dx) {
    CVector q = p;
    for (int k = 0; k < d; ++k) q(k) += cplx(dx(2 * k), dx(2 * k + 1));
    return w.value(q.head(m), q.tail(n));
  };
  auto real_hessian = [&](double step) {
    Eigen::MatrixXd r(2 * d, 2 * d);
    const double f0 = f(Eigen::VectorXd::Zero(2 * d));
    for (int a = 0; a < 2 * d; ++a) {
      Eigen::VectorXd ea = Eigen::VectorXd::Zero(2 * d);
      ea(a) = step;
      r(a, a) = (f(ea) - 2.0 * f0 + f(-ea)) / (step * step);
      for (int b = a + 1; b < 2 * d; ++b) {
        Eigen::VectorXd eb = Eigen::VectorXd::Zero(2 * d);
        eb(b) = step;
        r(a, b) = (f(ea + eb) - f(ea - eb) - f(eb - ea) + f(-ea - eb)) / (4.0 * step * step);
        r(b, a) = r(a, b);
      }
    }
    return r;
  };
  const Eigen::MatrixXd r = (4.0 * real_hessian(h / 2) - real_hessian(h)) / 3.0;
  CMatrix hc(d, d);
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) {
      hc(a, b) = 0.25 * cplx(r(2 * a, 2 * b) + r(2 * a + 1, 2 * b + 1),
                             r(2 * a, 2 * b + 1) - r(2 * a + 1, 2 * b));
    }
  }
  const CMatrix tb = hc.topLeftCorner(m, m);
  const CMatrix bb = hc.topRightCorner(m, n);
  const CMatrix zb = hc.bottomRightCorner(n, n);
  return tb - bb * zb.ldlt().solve(bb.adjoint());
}

json run_validate(const ValidateConfig& c, Checks& checks, std::vector<OutputFile>& files) {
  CsvTable table{{"weight", "probe", "t1_re", "t1_im", "t2_re", "t2_im", "z_re", "z_im",
                  "full_min_eig", "schur_min_eig", "schur_fd_deviation", "degenerate"},
                 {}};
  json out = json::array();
  for (std::size_t wi = 0; wi < c.weights.size(); ++wi) {
    const WeightEntry& entry = c.weights[wi];
    const std::string label = entry.label();
    const std::string tag = "[" + label + "]";
    const auto w = in_context("weights[" + std::to_string(wi) + "]",
                              [&] { return weights::builtin(entry.name, entry.params); });
    const auto probes = weights::random_probes(entry.base_dim, entry.fiber_dim,
                                               static_cast<std::size_t>(c.probes.count), c.t_radius,
                                               c.z_radius, c.probes.seed);
    const auto dr = weights::validate_derivatives(*w, probes, 1e-4, c.derivative_tol);
    json dev = json::object();
    for (const auto& [k, v] : dr.max_deviation) dev[k] = num(v);
    checks.add("derivatives" + tag, dr.passed, {{"max_deviation", dev}, {"threshold", dr.threshold}});
    const auto pr = weights::check_psh(*w, probes);
    checks.add("schur_psh" + tag, pr.passed,
               {{"violations", pr.violations}, {"degenerate_probes", pr.degenerate_count}});

    double worst_fd = 0.0;
    double worst_const = 0.0;
    for (std::size_t k = 0; k < probes.size(); ++k) {
      const auto& pt = probes[k];
      const CMatrix d = in_context("probe " + std::to_string(k) + " t=" + point_text(pt.t), [&] {
        return weights::schur_D(*w, pt.t, pt.z).symmetrized();
      });
      const CMatrix dfd = fd_schur(*w, pt.t, pt.z, 1e-2);
      const double fd_dev = (d - dfd).cwiseAbs().maxCoeff();
      worst_fd = std::max(worst_fd, fd_dev);
      if (entry.expect.schur_constant) {
        const CMatrix target = *entry.expect.schur_constant * CMatrix::Identity(d.rows(), d.cols());
        worst_const = std::max(worst_const, (d - target).cwiseAbs().maxCoeff());
      }
      auto row = std::vector<std::string>{label, std::to_string(k)};
      for (auto& cell : point_cells(pt.t)) row.push_back(cell);
      row.push_back(format_double(pt.z(0).real()));
      row.push_back(format_double(pt.z(0).imag()));
      row.push_back(format_double(pr.probes[k].full_min_eig));
      row.push_back(format_double(pr.probes[k].schur_min_eig));
      row.push_back(format_double(fd_dev));
      row.push_back(pr.probes[k].degenerate ? "true" : "false");
      table.add(std::move(row));
    }
    checks.at_most("schur_fd_oracle" + tag, worst_fd, c.schur_fd_tol);
    if (entry.expect.schur_constant) {
      checks.at_most("schur_constant" + tag, worst_const, entry.expect.schur_tol);
    }
    out.push_back({{"weight", label}, {"probes", probes.size()}, {"seed", c.probes.seed},
                   {"derivative_deviation", dev}, {"schur_fd_deviation", worst_fd},
                   {"degenerate_probes", pr.degenerate_count}, {"psh_violations", pr.violations}});
  }
  files.push_back({".probes.csv", table.str()});
  return {{"weights", out}};
}

// ---------------------------------------------------------------------------

json run_determinism(const DeterminismConfig& c, Checks& checks) {
  json out = json::array();
  const unsigned saved = parallel::threads();
  for (const auto& path : c.configs) {
    Config sub = in_context("configs: " + path.string(), [&] { return load_config(path); });
    if (sub.determinism) throw InvalidArgument("configs: " + path.string() + " is itself a determinism campaign");
    std::string reference;
    bool identical = true;
    int first_exit = -1;
    std::size_t runs = 0;
    for (int r = 0; r < c.repeats; ++r) {
      for (const int k : c.threads) {
        parallel::set_threads(static_cast<unsigned>(k));
        const RunResult res = run(sub);
        std::string text = canonical_report(res.report);
        for (const auto& f : res.files) text += "\n--" + f.suffix + "\n" + f.content;
        if (runs == 0) {
          reference = std::move(text);
          first_exit = res.exit_code;
        } else if (text != reference) {
          identical = false;
        }
        ++runs;
      }
    }
    parallel::set_threads(saved);
    const std::string rel = path.filename().string();
    out.push_back({{"config", rel}, {"runs", runs}, {"identical", identical},
                   {"exit_code", first_exit}, {"bytes", reference.size()}});
    checks.add("deterministic[" + rel + "]", identical, {{"runs", runs}});
  }
  json threads = json::array();
  for (int k : c.threads) threads.push_back(k);
  return {{"configs", out}, {"threads", threads}, {"repeats", c.repeats}};
}

}  // namespace

RunResult run(const Config& cfg) {
  const auto start = std::chrono::steady_clock::now();
  numerics::take_warnings();
  RunResult result;
  json& rep = result.report;
  rep["tool"] = kToolName;
  rep["version"] = kToolVersion;
  rep["command"] = cfg.command;
  rep["name"] = cfg.name;
  rep["config"] = cfg.echo;
  Checks checks;
  try {
    json results;
    if (cfg.curvature) results = run_curvature(*cfg.curvature, cfg.name, checks, result.files);
    else if (cfg.kernel_psh) results = run_kernel_psh(*cfg.kernel_psh, checks, result.files);
    else if (cfg.fibration) results = run_fibration(*cfg.fibration, checks, result.files);
    else if (cfg.validate) results = run_validate(*cfg.validate, checks, result.files);
    else if (cfg.determinism) results = run_determinism(*cfg.determinism, checks);
    rep["results"] = results;
    rep["status"] = checks.all() ? "passed" : "failed";
    result.exit_code = checks.all() ? kExitPass : kExitCheckFailed;
  } catch (const NumericalAbort& e) {
    rep["status"] = "aborted";
    rep["error"] = e.what();
    result.exit_code = kExitNumericalAbort;
    result.files.clear();
  } catch (const InvalidArgument& e) {
    rep["status"] = "config_error";
    rep["error"] = e.what();
    result.exit_code = kExitConfigError;
    result.files.clear();
  }
  rep["checks"] = checks.list();
  json warnings = json::array();
  for (auto& w : numerics::take_warnings()) warnings.push_back(w);
  rep["warnings"] = warnings;
  rep["exit_code"] = result.exit_code;
  rep["wall_time"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace curvlab::cli
