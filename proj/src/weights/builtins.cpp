#include <algorithm>
#include <sstream>

#include "curvlab/weights.hpp"

namespace curvlab::weights {

const std::vector<BuiltinInfo>& builtin_catalog() {
  static const std::vector<BuiltinInfo> catalog = {
      {"fock_shift", 1, 1, 1, "|z - t|^2 + eps |t|^2"},
      {"product", 0, 1, 1, "|z|^2 + |t|^2"},
      {"coupled", 0, 1, 1, "(1 + |t|^2) |z|^2"},
      {"product2", 0, 2, 1, "|z|^2 + |t1|^2 + |t2|^2"},
      {"rank_one2", 0, 2, 1, "|z|^2 + |t1 + t2|^2 / 2"},
  };
  return catalog;
}

namespace {

WeightPtr make(const std::string& name, const std::vector<double>& params) {
  if (name == "fock_shift") {
    const double eps = params[0];
    if (!(eps >= 0.0)) throw InvalidArgument("fock_shift: eps must be nonnegative");
    CMatrix a(2, 2);
    a << 1.0 + eps, -1.0, -1.0, 1.0;
    std::ostringstream label;
    label << "fock_shift(" << eps << ")";
    return std::make_shared<QuadraticWeight>(label.str(), 1, 1, a, eps);
  }
  if (name == "product") {
    return std::make_shared<QuadraticWeight>("product", 1, 1, CMatrix::Identity(2, 2), 1.0);
  }
  if (name == "coupled") return std::make_shared<CoupledWeight>();
  if (name == "product2") {
    return std::make_shared<QuadraticWeight>("product2", 2, 1, CMatrix::Identity(3, 3), 1.0);
  }
  if (name == "rank_one2") {
    CMatrix a = CMatrix::Zero(3, 3);
    a.topLeftCorner(2, 2).setConstant(0.5);
    a(2, 2) = 1.0;
    return std::make_shared<QuadraticWeight>("rank_one2", 2, 1, a, 0.0);
  }
  throw InvalidArgument("unknown weight '" + name + "'");
}

}  // namespace

WeightPtr builtin(const std::string& name, const std::vector<double>& params) {
  const auto& catalog = builtin_catalog();
  auto it = std::find_if(catalog.begin(), catalog.end(),
                         [&](const BuiltinInfo& info) { return info.name == name; });
  if (it == catalog.end()) throw InvalidArgument("unknown weight '" + name + "'");
  if (params.size() != it->param_count) {
    throw InvalidArgument("weight '" + name + "' takes " + std::to_string(it->param_count) +
                          " parameter(s), got " + std::to_string(params.size()));
  }
  WeightPtr w = make(name, params);
  const auto probes = random_probes(w->base_dim(), w->fiber_dim(), 8, 1.0, 2.0, 0x5eedULL);
  const DerivativeReport check = validate_derivatives(*w, probes);
  if (!check.passed) {
    throw NumericalAbort("builtin '" + name + "' failed its derivative self-check on " +
                         check.failed_partials.front());
  }
  return w;
}

}  // namespace curvlab::weights
