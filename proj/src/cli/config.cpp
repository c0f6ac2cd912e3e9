#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "curvlab/config.hpp"
#include "curvlab/weights.hpp"

namespace curvlab::cli {

namespace {

/// Strict view of one JSON object: every read is echoed (defaults included)
/// and unread keys are errors.
class Obj {
 public:
  Obj(const json& j, std::string path, json& echo) : j_(j), path_(std::move(path)), echo_(echo) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    if (!echo_.is_object()) echo_ = json::object();
  }

  std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }
  bool has(const std::string& k) const { return j_.contains(k); }

  const json& raw(const std::string& k) {
    if (!has(k)) throw ConfigError(key(k), "required key is missing");
    used_.insert(k);
    echo_[k] = j_.at(k);
    return j_.at(k);
  }

  double number(const std::string& k) {
    const json& v = raw(k);
    if (!v.is_number()) throw ConfigError(key(k), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(key(k), "must be finite");
    return x;
  }
  double number(const std::string& k, double def) {
    if (!has(k)) {
      echo_[k] = def;
      return def;
    }
    return number(k);
  }
  long long integer(const std::string& k) {
    const json& v = raw(k);
    if (!v.is_number_integer()) throw ConfigError(key(k), "expected an integer");
    return v.get<long long>();
  }
  long long integer(const std::string& k, long long def) {
    if (!has(k)) {
      echo_[k] = def;
      return def;
    }
    return integer(k);
  }
  bool boolean(const std::string& k, bool def) {
    if (!has(k)) {
      echo_[k] = def;
      return def;
    }
    const json& v = raw(k);
    if (!v.is_boolean()) throw ConfigError(key(k), "expected true or false");
    return v.get<bool>();
  }
  std::string string(const std::string& k) {
    const json& v = raw(k);
    if (!v.is_string()) throw ConfigError(key(k), "expected a string");
    return v.get<std::string>();
  }
  std::string string(const std::string& k, const std::string& def) {
    if (!has(k)) {
      echo_[k] = def;
      return def;
    }
    return string(k);
  }
  std::optional<double> optional_number(const std::string& k) {
    if (!has(k)) return std::nullopt;
    return number(k);
  }

  Obj object(const std::string& k) {
    const json& v = raw(k);
    echo_[k] = json::object();
    return Obj(v, key(k), echo_[k]);
  }
  /// Object that may be absent; reads then see an empty object.
  Obj object_or_empty(const std::string& k) {
    if (has(k)) return object(k);
    echo_[k] = json::object();
    return Obj(empty_, key(k), echo_[k]);
  }

  const json& array(const std::string& k) {
    const json& v = raw(k);
    if (!v.is_array()) throw ConfigError(key(k), "expected an array");
    return v;
  }
  json& echo(const std::string& k) { return echo_[k]; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) throw ConfigError(key(it.key()), "unknown key");
    }
  }

 private:
  static inline const json empty_ = json::object();
  const json& j_;
  std::string path_;
  json& echo_;
  std::set<std::string> used_;
};

std::string index_key(const std::string& base, std::size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

cplx parse_complex(const json& v, const std::string& key) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  throw ConfigError(key, "expected a complex number [re, im] or a real number");
}

/// A point in C^m: [re, im] for m = 1, or a list of complex numbers.
CVector parse_point(const json& v, const std::string& key) {
  if (!v.is_array() || v.empty()) throw ConfigError(key, "expected a point");
  if (v[0].is_number()) {
    CVector p(1);
    p(0) = parse_complex(v, key);
    return p;
  }
  CVector p(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) p(static_cast<Eigen::Index>(i)) = parse_complex(v[i], index_key(key, i));
  return p;
}

std::vector<CVector> parse_points(const json& v, const std::string& key) {
  if (!v.is_array() || v.empty()) throw ConfigError(key, "expected a non-empty list of points");
  std::vector<CVector> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(parse_point(v[i], index_key(key, i)));
  return out;
}

CMatrix parse_matrix(const json& v, const std::string& key, Eigen::Index rows, Eigen::Index cols) {
  if (!v.is_array() || static_cast<Eigen::Index>(v.size()) != rows) {
    throw ConfigError(key, "expected " + std::to_string(rows) + " rows");
  }
  CMatrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = v[static_cast<std::size_t>(r)];
    const std::string rk = index_key(key, static_cast<std::size_t>(r));
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw ConfigError(rk, "expected " + std::to_string(cols) + " entries");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = parse_complex(row[static_cast<std::size_t>(c)], index_key(rk, static_cast<std::size_t>(c)));
    }
  }
  return m;
}

int positive_int(Obj& o, const std::string& k, long long lo, std::optional<long long> def = {}) {
  const long long v = def ? o.integer(k, *def) : o.integer(k);
  if (v < lo) {
    throw ConfigError(o.key(k), "must be at least " + std::to_string(lo) + " (got " +
                                    std::to_string(v) + ")");
  }
  if (v > 1'000'000) throw ConfigError(o.key(k), "unreasonably large");
  return static_cast<int>(v);
}

double positive_number(Obj& o, const std::string& k, std::optional<double> def = {}) {
  const double v = def ? o.number(k, *def) : o.number(k);
  if (!(v > 0.0)) throw ConfigError(o.key(k), "must be positive");
  return v;
}

Sampling parse_sampling(Obj o) {
  Sampling s;
  const long long seed = o.integer("seed");
  if (seed < 0) throw ConfigError(o.key("seed"), "must be nonnegative");
  s.seed = static_cast<unsigned long long>(seed);
  s.count = positive_int(o, "count", 1);
  o.finish();
  return s;
}

WeightExpect parse_weight_expect(Obj o) {
  WeightExpect e;
  e.nakano_delta = o.optional_number("nakano_delta");
  e.nakano_rel_tol = o.number("nakano_rel_tol", e.nakano_rel_tol);
  e.nakano_abs_tol = o.number("nakano_abs_tol", e.nakano_abs_tol);
  e.griffiths_delta = o.optional_number("griffiths_delta");
  e.griffiths_abs_tol = o.number("griffiths_abs_tol", e.griffiths_abs_tol);
  e.max_block_norm = o.optional_number("max_block_norm");
  e.hormander_gap = o.optional_number("hormander_gap");
  e.lower_bound_gap = o.optional_number("lower_bound_gap");
  e.schur_constant = o.optional_number("schur_constant");
  e.schur_tol = o.number("schur_tol", e.schur_tol);
  o.finish();
  return e;
}

/// Shared part of a weight entry; `extra` consumes campaign-specific keys.
template <class Extra>
std::vector<WeightEntry> parse_weights(Obj& root, Extra extra) {
  const json& arr = root.array("weights");
  if (arr.empty()) throw ConfigError("weights", "at least one weight is required");
  json& echo_arr = root.echo("weights");
  echo_arr = json::array();
  std::vector<WeightEntry> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    echo_arr.push_back(json::object());
    Obj o(arr[i], index_key("weights", i), echo_arr.back());
    WeightEntry w;
    w.name = o.string("name");
    const weights::BuiltinInfo* info = nullptr;
    for (const auto& b : weights::builtin_catalog()) {
      if (b.name == w.name) info = &b;
    }
    if (!info) {
      std::string names;
      for (const auto& b : weights::builtin_catalog()) names += (names.empty() ? "" : ", ") + b.name;
      throw ConfigError(o.key("name"), "unknown weight '" + w.name + "' (built-ins: " + names + ")");
    }
    if (o.has("params")) {
      const json& p = o.array("params");
      for (std::size_t k = 0; k < p.size(); ++k) {
        if (!p[k].is_number()) throw ConfigError(index_key(o.key("params"), k), "expected a number");
        w.params.push_back(p[k].get<double>());
      }
    } else {
      o.echo("params") = json::array();
    }
    if (w.params.size() != info->param_count) {
      throw ConfigError(o.key("params"), "weight '" + w.name + "' takes " +
                                             std::to_string(info->param_count) + " parameter(s)");
    }
    w.base_dim = info->base_dim;
    w.fiber_dim = info->fiber_dim;
    w.expect = parse_weight_expect(o.object_or_empty("expect"));
    extra(o, w);
    o.finish();
    out.push_back(std::move(w));
  }
  return out;
}

DomainConfig parse_domain(Obj o) {
  DomainConfig d;
  const std::string kind = o.string("kind");
  try {
    d.kind = numerics::domain_kind_from_string(kind);
  } catch (const InvalidArgument&) {
    throw ConfigError(o.key("kind"), "expected disc, polydisc or plane_truncation");
  }
  d.radius = positive_number(o, "radius");
  d.gaussian_decay = o.boolean("gaussian_decay", false);
  if (d.kind == numerics::DomainKind::plane_truncation && !d.gaussian_decay) {
    throw ConfigError(o.key("gaussian_decay"),
                      "plane_truncation requires gaussian_decay = true for the weight");
  }
  o.finish();
  return d;
}

int parse_quad_order(Obj& o) { return positive_int(o, "quad_order", 4); }

std::vector<int> parse_degrees(Obj& o) {
  const json& v = o.raw("max_degree");
  std::vector<int> out;
  auto one = [&](const json& x, const std::string& key) {
    if (!x.is_number_integer() || x.get<long long>() < 0 || x.get<long long>() > 40) {
      throw ConfigError(key, "expected an integer in [0, 40]");
    }
    out.push_back(x.get<int>());
  };
  if (v.is_array()) {
    if (v.empty()) throw ConfigError(o.key("max_degree"), "empty list");
    for (std::size_t i = 0; i < v.size(); ++i) one(v[i], index_key(o.key("max_degree"), i));
  } else {
    one(v, o.key("max_degree"));
  }
  return out;
}

CurvatureConfig parse_curvature(Obj& root) {
  CurvatureConfig c;
  std::vector<std::optional<std::vector<CVector>>> own_points;
  c.weights = parse_weights(root, [&](Obj& o, WeightEntry&) {
    if (o.has("base_points")) {
      own_points.push_back(parse_points(o.raw("base_points"), o.key("base_points")));
    } else {
      own_points.push_back(std::nullopt);
    }
  });
  c.domain = parse_domain(root.object("domain"));
  c.max_degrees = parse_degrees(root);
  c.quad_order = parse_quad_order(root);
  std::vector<CVector> shared;
  if (root.has("base_points")) shared = parse_points(root.raw("base_points"), "base_points");
  for (std::size_t i = 0; i < c.weights.size(); ++i) {
    std::vector<CVector> pts;
    const auto& src = own_points[i] ? *own_points[i] : shared;
    for (const CVector& p : src) {
      if (p.size() == c.weights[i].base_dim) pts.push_back(p);
    }
    if (pts.empty()) {
      throw ConfigError(index_key("weights", i) + ".base_points",
                        "no base point of dimension " + std::to_string(c.weights[i].base_dim) +
                            " for weight " + c.weights[i].name);
    }
    c.base_points.push_back(std::move(pts));
  }
  const std::string routes = root.string("routes", "both");
  if (routes != "both" && routes != "direct") throw ConfigError("routes", "expected both or direct");
  c.both_routes = routes == "both";

  if (root.has("checks")) {
    const json& checks = root.array("checks");
    for (std::size_t i = 0; i < checks.size(); ++i) {
      const std::string k = index_key("checks", i);
      if (!checks[i].is_string()) throw ConfigError(k, "expected a check name");
      const std::string name = checks[i].get<std::string>();
      if (name == "hormander") c.hormander = true;
      else if (name == "lower_bound") c.lower_bound = true;
      else if (name == "dual") c.dual = true;
      else throw ConfigError(k, "unknown check '" + name + "' (hormander, lower_bound, dual)");
    }
  } else {
    root.echo("checks") = json::array();
  }
  if (c.hormander || c.lower_bound || c.dual) {
    if (!root.has("samples")) throw ConfigError("samples", "sampling checks require a seeded samples block");
    c.samples = parse_sampling(root.object("samples"));
  }
  c.dual_samples = positive_int(root, "dual_samples", 1, 50);
  c.export_blocks = root.boolean("export_blocks", false);

  Obj tol = root.object_or_empty("tolerances");
  c.hormander_tol = tol.number("hormander", c.hormander_tol);
  c.lower_bound_tol = tol.number("lower_bound", c.lower_bound_tol);
  c.dual_tol = tol.number("dual", c.dual_tol);
  c.route_noise = tol.number("route_noise", c.route_noise);
  tol.finish();

  Obj ex = root.object_or_empty("expect");
  c.expect_route_deviation = ex.optional_number("route_deviation");
  c.expect_route_monotone = ex.boolean("route_monotone", false);
  c.expect_strict_positive = ex.boolean("strict_positive", false);
  ex.finish();
  if ((c.expect_route_deviation || c.expect_route_monotone) && !c.both_routes) {
    throw ConfigError("expect.route_deviation", "route expectations need routes = both");
  }
  return c;
}

MapEntry parse_map(Obj o, int m, int n) {
  MapEntry e;
  e.name = o.string("name");
  e.constant = CVector::Zero(n);
  e.linear = CMatrix::Zero(n, m);
  e.quadratic.assign(static_cast<std::size_t>(n), CMatrix::Zero(m, m));
  if (o.has("constant")) {
    e.constant = parse_point(o.raw("constant"), o.key("constant"));
    if (e.constant.size() != n) throw ConfigError(o.key("constant"), "wrong dimension");
  }
  if (o.has("linear")) e.linear = parse_matrix(o.raw("linear"), o.key("linear"), n, m);
  if (o.has("quadratic")) {
    const json& q = o.array("quadratic");
    if (static_cast<int>(q.size()) != n) throw ConfigError(o.key("quadratic"), "one matrix per output coordinate");
    for (int l = 0; l < n; ++l) {
      e.quadratic[static_cast<std::size_t>(l)] =
          parse_matrix(q[static_cast<std::size_t>(l)], index_key(o.key("quadratic"), static_cast<std::size_t>(l)), m, m);
    }
  }
  o.finish();
  return e;
}

KernelPshConfig parse_kernel_psh(Obj& root) {
  KernelPshConfig c;
  c.weights = parse_weights(root, [&](Obj& o, WeightEntry& w) {
    w.slice_center = CVector::Zero(w.base_dim);
    w.slice_direction = CVector::Zero(w.base_dim);
    w.slice_direction(0) = 1.0;
    if (o.has("slice")) {
      Obj s = o.object("slice");
      if (s.has("center")) w.slice_center = parse_point(s.raw("center"), s.key("center"));
      w.slice_direction = parse_point(s.raw("direction"), s.key("direction"));
      s.finish();
      if (w.slice_center.size() != w.base_dim || w.slice_direction.size() != w.base_dim) {
        throw ConfigError(o.key("slice"), "center and direction need dimension " + std::to_string(w.base_dim));
      }
      if (w.slice_direction.norm() == 0.0) throw ConfigError(s.key("direction"), "must be nonzero");
    } else if (w.base_dim > 1) {
      throw ConfigError(o.key("slice"), "weights with several base coordinates need a slice");
    }
  });
  c.domain = parse_domain(root.object("domain"));
  const auto degrees = parse_degrees(root);
  if (degrees.size() != 1) throw ConfigError("max_degree", "kernel-psh takes a single degree");
  c.max_degree = degrees[0];
  c.quad_order = parse_quad_order(root);
  {
    Obj g = root.object("grid");
    c.half_width = positive_number(g, "half_width");
    c.points = positive_int(g, "points", 5, 21);
    g.finish();
  }
  const json& maps = root.array("maps");
  if (maps.empty()) throw ConfigError("maps", "at least one map is required");
  json& echo_maps = root.echo("maps");
  echo_maps = json::array();
  std::set<std::string> names;
  for (std::size_t i = 0; i < maps.size(); ++i) {
    echo_maps.push_back(json::object());
    // maps are written in the slice parameter s (one complex variable)
    c.maps.push_back(parse_map(Obj(maps[i], index_key("maps", i), echo_maps.back()), 1, 1));
    if (!names.insert(c.maps.back().name).second) {
      throw ConfigError(index_key("maps", i) + ".name", "duplicate map name");
    }
  }
  for (std::size_t i = 0; i < c.weights.size(); ++i) {
    if (c.weights[i].fiber_dim != 1) {
      throw ConfigError(index_key("weights", i), "kernel-psh maps target one fiber coordinate");
    }
  }
  c.log = root.boolean("log", true);
  c.negative_control = root.boolean("negative_control", false);

  Obj ex = root.object_or_empty("expect");
  c.expect_negative_flagged = ex.boolean("negative_control_flagged", false);
  if (ex.has("pairs")) {
    const json& pairs = ex.array("pairs");
    json& echo_pairs = ex.echo("pairs");
    echo_pairs = json::array();
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      echo_pairs.push_back(json::object());
      Obj p(pairs[i], index_key("expect.pairs", i), echo_pairs.back());
      PairExpect pe;
      const long long w = p.integer("weight");
      if (w < 0 || w >= static_cast<long long>(c.weights.size())) {
        throw ConfigError(p.key("weight"), "weight index out of range");
      }
      pe.weight = static_cast<std::size_t>(w);
      pe.map = p.string("map");
      if (!names.count(pe.map)) throw ConfigError(p.key("map"), "no map named '" + pe.map + "'");
      pe.kernel_fock_shift = p.optional_number("kernel_fock_shift");
      pe.kernel_tol = p.number("kernel_tol", pe.kernel_tol);
      pe.log_hessian = p.optional_number("log_hessian");
      pe.log_hessian_tol = p.number("log_hessian_tol", pe.log_hessian_tol);
      p.finish();
      if (pe.kernel_fock_shift && c.weights[pe.weight].name != "fock_shift") {
        throw ConfigError(p.key("kernel_fock_shift"), "the Fock oracle applies to fock_shift only");
      }
      if (pe.log_hessian && !c.log) throw ConfigError(p.key("log_hessian"), "needs log = true");
      c.expect.push_back(pe);
    }
  } else {
    ex.echo("pairs") = json::array();
  }
  ex.finish();
  return c;
}

FibrationConfig parse_fibration(Obj& root) {
  FibrationConfig c;
  c.twist = positive_int(root, "twist", 0);
  {
    Obj p = root.object("potential");
    c.potential = p.string("name");
    if (c.potential != "fubini_study" && c.potential != "twisted") {
      throw ConfigError(p.key("name"), "unknown potential '" + c.potential + "' (fubini_study, twisted)");
    }
    if (p.has("params")) {
      const json& a = p.array("params");
      for (std::size_t k = 0; k < a.size(); ++k) {
        if (!a[k].is_number()) throw ConfigError(index_key(p.key("params"), k), "expected a number");
        c.potential_params.push_back(a[k].get<double>());
      }
    } else {
      p.echo("params") = json::array();
    }
    c.conformal = p.number("conformal", 0.0);
    if (p.has("pluriharmonic")) {
      Obj h = p.object("pluriharmonic");
      c.harmonic_linear = h.has("linear") ? parse_complex(h.raw("linear"), h.key("linear")) : 0.0;
      c.harmonic_quadratic = h.has("quadratic") ? parse_complex(h.raw("quadratic"), h.key("quadratic")) : 0.0;
      h.finish();
    }
    p.finish();
  }
  c.quad_order = parse_quad_order(root);
  if (root.has("base_points")) {
    c.base_points = parse_points(root.raw("base_points"), "base_points");
  } else if (root.has("grid")) {
    Obj g = root.object("grid");
    const CVector center = g.has("center") ? parse_point(g.raw("center"), g.key("center")) : CVector::Zero(1);
    const double hw = positive_number(g, "half_width");
    const int pts = positive_int(g, "points", 2);
    g.finish();
    for (int i = 0; i < pts; ++i) {
      for (int k = 0; k < pts; ++k) {
        const double x = -hw + 2.0 * hw * i / (pts - 1);
        const double y = -hw + 2.0 * hw * k / (pts - 1);
        CVector t(1);
        t(0) = center(0) + cplx(x, y);
        c.base_points.push_back(t);
      }
    }
  } else {
    CVector t = CVector::Zero(1);
    c.base_points.push_back(t);
    root.echo("base_points") = json::array({json::array({0.0, 0.0})});
  }
  for (std::size_t i = 0; i < c.base_points.size(); ++i) {
    if (c.base_points[i].size() != 1) {
      throw ConfigError(index_key("base_points", i), "fibrations use one base coordinate");
    }
  }

  const json& checks = root.array("checks");
  if (checks.empty()) throw ConfigError("checks", "at least one check is required");
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const std::string k = index_key("checks", i);
    if (!checks[i].is_string()) throw ConfigError(k, "expected a check name");
    const std::string n = checks[i].get<std::string>();
    if (n == "gram") c.gram = true;
    else if (n == "chart_independence") c.chart_independence = true;
    else if (n == "det_transform") c.det_transform = true;
    else if (n == "rank") c.rank = true;
    else if (n == "nakano") c.nakano = true;
    else if (n == "pluriharmonic_invariance") c.pluriharmonic_invariance = true;
    else {
      throw ConfigError(k, "unknown check '" + n +
                               "' (gram, chart_independence, det_transform, rank, nakano, "
                               "pluriharmonic_invariance)");
    }
  }
  if (c.det_transform) {
    if (!root.has("det_samples")) throw ConfigError("det_samples", "det_transform requires a seeded det_samples block");
    c.det_samples = parse_sampling(root.object("det_samples"));
  }
  if (c.rank) {
    const json& lv = root.array("rank_levels");
    for (std::size_t i = 0; i < lv.size(); ++i) {
      if (!lv[i].is_number_integer() || lv[i].get<long long>() < 0 || lv[i].get<long long>() > 64) {
        throw ConfigError(index_key("rank_levels", i), "expected an integer in [0, 64]");
      }
      c.rank_levels.push_back(lv[i].get<int>());
    }
  }
  if ((c.gram || c.chart_independence || c.nakano || c.pluriharmonic_invariance) && c.twist < 2) {
    throw ConfigError("twist", "the section space is zero for twist < 2; only rank checks apply");
  }
  if (c.pluriharmonic_invariance) {
    Obj pr = root.object_or_empty("pluriharmonic_probe");
    if (pr.has("linear")) c.probe_linear = parse_complex(pr.raw("linear"), pr.key("linear"));
    else pr.echo("linear") = json::array({c.probe_linear.real(), c.probe_linear.imag()});
    if (pr.has("quadratic")) c.probe_quadratic = parse_complex(pr.raw("quadratic"), pr.key("quadratic"));
    else pr.echo("quadratic") = json::array({c.probe_quadratic.real(), c.probe_quadratic.imag()});
    pr.finish();
  }

  Obj ex = root.object_or_empty("expect");
  c.expect_gram_scale = ex.optional_number("gram_scale");
  c.gram_tol = ex.number("gram_tol", c.gram_tol);
  c.chart_tol = ex.number("chart_tol", c.chart_tol);
  c.det_tol = ex.number("det_tol", c.det_tol);
  c.invariance_tol = ex.number("invariance_tol", c.invariance_tol);
  c.expect_nakano_delta = ex.optional_number("nakano_delta");
  c.nakano_tol = ex.number("nakano_tol", c.nakano_tol);
  c.expect_nakano_positive = ex.boolean("nakano_positive", false);
  c.expect_route_deviation = ex.optional_number("route_deviation");
  ex.finish();
  return c;
}

ValidateConfig parse_validate(Obj& root) {
  ValidateConfig c;
  c.weights = parse_weights(root, [](Obj&, WeightEntry&) {});
  c.probes = parse_sampling(root.object("probes"));
  c.t_radius = positive_number(root, "t_radius", 1.0);
  c.z_radius = positive_number(root, "z_radius", 1.5);
  Obj tol = root.object_or_empty("tolerances");
  c.derivative_tol = tol.number("derivatives", c.derivative_tol);
  c.schur_fd_tol = tol.number("schur_fd", c.schur_fd_tol);
  tol.finish();
  return c;
}

DeterminismConfig parse_determinism(Obj& root, const std::filesystem::path& dir) {
  DeterminismConfig c;
  const json& cfgs = root.array("configs");
  if (cfgs.empty()) throw ConfigError("configs", "at least one config is required");
  for (std::size_t i = 0; i < cfgs.size(); ++i) {
    if (!cfgs[i].is_string()) throw ConfigError(index_key("configs", i), "expected a path");
    c.configs.push_back(dir / cfgs[i].get<std::string>());
  }
  const json& th = root.array("threads");
  for (std::size_t i = 0; i < th.size(); ++i) {
    if (!th[i].is_number_integer() || th[i].get<long long>() < 1 || th[i].get<long long>() > 256) {
      throw ConfigError(index_key("threads", i), "expected a thread count in [1, 256]");
    }
    c.threads.push_back(th[i].get<int>());
  }
  if (c.threads.empty()) throw ConfigError("threads", "at least one thread count is required");
  c.repeats = positive_int(root, "repeats", 1, 2);
  return c;
}

}  // namespace

std::string WeightEntry::label() const {
  std::ostringstream s;
  s << name;
  if (!params.empty()) {
    s << "(";
    for (std::size_t i = 0; i < params.size(); ++i) s << (i ? "," : "") << params[i];
    s << ")";
  }
  return s.str();
}

numerics::DomainSpec DomainConfig::spec(int fiber_dim, int quad_order) const {
  numerics::DomainSpec d;
  d.kind = fiber_dim > 1 && kind == numerics::DomainKind::disc ? numerics::DomainKind::polydisc : kind;
  d.radii.assign(static_cast<std::size_t>(fiber_dim), radius);
  d.quad_order.assign(static_cast<std::size_t>(fiber_dim), quad_order);
  d.gaussian_decay = gaussian_decay;
  return d;
}

Config parse_config(const json& doc, const std::filesystem::path& source_dir) {
  Config cfg;
  cfg.source_dir = source_dir;
  cfg.echo = json::object();
  Obj root(doc, "", cfg.echo);
  cfg.command = root.string("command");
  cfg.name = root.string("name", "run");
  if (cfg.name.empty() || cfg.name.find_first_of("/\\") != std::string::npos) {
    throw ConfigError("name", "must be a non-empty file-name stem");
  }
  if (root.has("output")) cfg.output = root.string("output");
  if (cfg.command == "curvature") {
    cfg.curvature = parse_curvature(root);
  } else if (cfg.command == "kernel-psh") {
    cfg.kernel_psh = parse_kernel_psh(root);
  } else if (cfg.command == "fibration") {
    cfg.fibration = parse_fibration(root);
  } else if (cfg.command == "validate") {
    cfg.validate = parse_validate(root);
  } else if (cfg.command == "determinism") {
    cfg.determinism = parse_determinism(root, source_dir);
  } else {
    throw ConfigError("command", "unknown command '" + cfg.command +
                                     "' (curvature, kernel-psh, fibration, validate, determinism)");
  }
  root.finish();
  return cfg;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(doc, path.parent_path());
}

}  // namespace curvlab::cli
