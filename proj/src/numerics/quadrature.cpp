#include <cmath>
#include <numbers>
#include <sstream>

#include <gsl/gsl_integration.h>

#include "curvlab/numerics.hpp"
#include "curvlab/parallel.hpp"

namespace curvlab::numerics {

std::string to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::disc: return "disc";
    case DomainKind::polydisc: return "polydisc";
    case DomainKind::plane_truncation: return "plane_truncation";
  }
  return "disc";
}

DomainKind domain_kind_from_string(const std::string& name) {
  if (name == "disc") return DomainKind::disc;
  if (name == "polydisc") return DomainKind::polydisc;
  if (name == "plane_truncation") return DomainKind::plane_truncation;
  throw InvalidArgument("unknown domain kind '" + name + "'");
}

void DomainSpec::validate() const {
  if (radii.empty()) throw InvalidArgument("domain: radii must be non-empty");
  if (quad_order.size() != radii.size()) {
    throw InvalidArgument("domain: quad_order needs one entry per coordinate");
  }
  if (kind == DomainKind::disc && radii.size() != 1) {
    throw InvalidArgument("domain: a disc has exactly one coordinate");
  }
  for (std::size_t c = 0; c < radii.size(); ++c) {
    if (!(radii[c] > 0.0) || !std::isfinite(radii[c])) {
      throw InvalidArgument("domain: radii[" + std::to_string(c) + "] must be positive");
    }
    if (quad_order[c] < 4) {
      throw InvalidArgument("domain: quad_order[" + std::to_string(c) +
                            "] = " + std::to_string(quad_order[c]) + " is below 4");
    }
  }
  if (kind == DomainKind::plane_truncation && !gaussian_decay) {
    throw InvalidArgument(
        "domain: plane_truncation requires the gaussian_decay declaration");
  }
}

double QuadGrid::total_weight() const {
  std::vector<cplx> ones(size(), cplx(1.0, 0.0));
  return integrate(ones, *this).real();
}

namespace {

struct Rule1d {
  std::vector<double> x;
  std::vector<double> w;
};

Rule1d gauss_legendre(int order, double a, double b) {
  gsl_integration_glfixed_table* table = gsl_integration_glfixed_table_alloc(order);
  if (table == nullptr) throw NumericalAbort("Gauss-Legendre table allocation failed");
  Rule1d rule;
  rule.x.resize(order);
  rule.w.resize(order);
  for (int i = 0; i < order; ++i) {
    gsl_integration_glfixed_point(a, b, static_cast<std::size_t>(i), &rule.x[i], &rule.w[i],
                                  table);
  }
  gsl_integration_glfixed_table_free(table);
  return rule;
}

// Planar polar rule for one coordinate: radial nodes ascending, angles
// 2*pi*k/K, weights r * w_r * 2*pi/K.
struct PolarRule {
  std::vector<cplx> nodes;
  std::vector<double> weights;
};

PolarRule polar_disc(double radius, int order) {
  const Rule1d radial = gauss_legendre(order, 0.0, radius);
  const int angles = 2 * order;
  const double dtheta = 2.0 * std::numbers::pi / angles;
  PolarRule rule;
  rule.nodes.reserve(static_cast<std::size_t>(order) * angles);
  rule.weights.reserve(rule.nodes.capacity());
  for (int i = 0; i < order; ++i) {
    for (int k = 0; k < angles; ++k) {
      rule.nodes.push_back(std::polar(radial.x[i], k * dtheta));
      rule.weights.push_back(radial.w[i] * radial.x[i] * dtheta);
    }
  }
  return rule;
}

}  // namespace

QuadGrid build_grid(const DomainSpec& domain) {
  domain.validate();
  std::vector<PolarRule> factors;
  for (std::size_t c = 0; c < domain.dimension(); ++c) {
    factors.push_back(polar_disc(domain.radii[c], domain.quad_order[c]));
  }
  QuadGrid grid;
  grid.dim = factors.size();
  std::size_t count = 1;
  for (const auto& f : factors) count *= f.weights.size();
  grid.nodes.resize(count * grid.dim);
  grid.weights.resize(count);
  // Last coordinate varies fastest.
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t rest = i;
    double w = 1.0;
    for (std::size_t c = grid.dim; c-- > 0;) {
      const std::size_t n = factors[c].weights.size();
      const std::size_t idx = rest % n;
      rest /= n;
      grid.nodes[i * grid.dim + c] = factors[c].nodes[idx];
      w *= factors[c].weights[idx];
    }
    grid.weights[i] = w;
  }
  return grid;
}

QuadGrid build_plane_chart_grid(int radial_order, int angular_count) {
  if (radial_order < 4 || angular_count < 4) {
    throw InvalidArgument("chart grid: orders must be at least 4");
  }
  // s = r^2 / (1 + r^2): r dr = ds / (2 (1 - s)^2)
  const Rule1d radial = gauss_legendre(radial_order, 0.0, 1.0);
  const double dtheta = 2.0 * std::numbers::pi / angular_count;
  QuadGrid grid;
  grid.dim = 1;
  for (int i = 0; i < radial_order; ++i) {
    const double s = radial.x[i];
    const double r = std::sqrt(s / (1.0 - s));
    const double jac = 0.5 / ((1.0 - s) * (1.0 - s));
    for (int k = 0; k < angular_count; ++k) {
      grid.nodes.push_back(std::polar(r, k * dtheta));
      grid.weights.push_back(radial.w[i] * jac * dtheta);
    }
  }
  return grid;
}

double gaussian_tail_bound(double radius, int max_degree) {
  return std::exp(-radius * radius + (2.0 * max_degree + 2.0) * std::log(radius));
}

double gaussian_cutoff_radius(int max_degree, double target) {
  double radius = 1.0;
  while (gaussian_tail_bound(radius, max_degree) >= target ||
         radius * radius < 2.0 * max_degree + 2.0) {
    radius += 0.25;
  }
  return radius;
}

cplx integrate(std::span<const cplx> values, const QuadGrid& grid) {
  if (values.size() != grid.size()) {
    throw InvalidArgument("integrate: " + std::to_string(values.size()) +
                          " values for " + std::to_string(grid.size()) + " nodes");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i].real()) || !std::isfinite(values[i].imag())) {
      std::ostringstream msg;
      msg << "integrate: non-finite value at node " << i << " (";
      for (std::size_t c = 0; c < grid.dim; ++c) {
        const cplx z = grid.node(i)[c];
        msg << (c ? ", " : "") << z.real() << (z.imag() < 0 ? "" : "+") << z.imag() << "i";
      }
      msg << ")";
      throw InvalidArgument(msg.str());
    }
  }
  return parallel::reduce_blocks<cplx>(
      values.size(),
      [&](std::size_t lo, std::size_t hi) {
        cplx acc = 0.0;
        for (std::size_t i = lo; i < hi; ++i) acc += grid.weights[i] * values[i];
        return acc;
      },
      [](const cplx& a, const cplx& b) { return a + b; });
}

cplx integrate(const std::function<cplx(std::span<const cplx>)>& f, const QuadGrid& grid) {
  std::vector<cplx> values(grid.size());
  parallel::parallel_for(grid.size(), [&](std::size_t i) { values[i] = f(grid.node(i)); });
  return integrate(values, grid);
}

}  // namespace curvlab::numerics
