#include <charconv>
#include <cmath>
#include <ostream>

#include "curvlab/pshcheck.hpp"

namespace curvlab::pshcheck {

HoloMap::HoloMap(std::string name, int base_dim, int fiber_dim, Evaluator f)
    : name_(std::move(name)), m_(base_dim), n_(fiber_dim), f_(std::move(f)) {
  if (base_dim < 1 || fiber_dim < 1 || !f_) throw InvalidArgument("HoloMap: invalid definition");
}

HoloMap HoloMap::polynomial(CVector constant, CMatrix linear, std::vector<CMatrix> quadratic) {
  const auto n = static_cast<int>(constant.size());
  const auto m = static_cast<int>(linear.cols());
  if (linear.rows() != n || (!quadratic.empty() && static_cast<int>(quadratic.size()) != n)) {
    throw InvalidArgument("HoloMap::polynomial: coefficient shapes disagree");
  }
  for (auto& q : quadratic) {
    if (q.rows() != m || q.cols() != m) throw InvalidArgument("HoloMap::polynomial: quadratic shape");
    q = 0.5 * (q + q.transpose()).eval();
  }
  std::string name = "poly(deg " + std::string(quadratic.empty() ? "1" : "2") + ")";
  return HoloMap(name, m, n, [constant, linear, quadratic](const CVector& t) {
    CVector out = constant + linear * t;
    for (std::size_t l = 0; l < quadratic.size(); ++l) {
      out(static_cast<Eigen::Index>(l)) += (t.transpose() * quadratic[l] * t)(0, 0);
    }
    return out;
  });
}

double HoloMap::cauchy_riemann_residual(const std::vector<CVector>& probes, double h) const {
  double worst = 0.0;
  for (const CVector& t : probes) {
    for (int j = 0; j < m_; ++j) {
      CVector dx = CVector::Zero(m_);
      dx(j) = h;
      CVector dy = CVector::Zero(m_);
      dy(j) = cplx(0.0, h);
      const CVector fx = (f_(t + dx) - f_(t - dx)) / (2.0 * h);
      const CVector fy = (f_(t + dy) - f_(t - dy)) / (2.0 * h);
      worst = std::max(worst, (0.5 * (fx + cplx(0.0, 1.0) * fy)).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------

int TGridSpec::grid_dim() const {
  return directions.size() == 0 ? static_cast<int>(center.size())
                                : static_cast<int>(directions.cols());
}

std::vector<int> GridFunction::axes(std::size_t node) const {
  const int axes_count = 2 * grid_dim();
  std::vector<int> out(axes_count);
  for (int a = axes_count; a-- > 0;) {
    out[a] = static_cast<int>(node % points());
    node /= points();
  }
  return out;
}

std::size_t GridFunction::flat(const std::vector<int>& axes) const {
  std::size_t idx = 0;
  for (int a : axes) idx = idx * points() + static_cast<std::size_t>(a);
  return idx;
}

namespace {

CVector grid_point_of(const TGridSpec& spec, const std::vector<int>& axes) {
  const double h = spec.spacing();
  const double mid = 0.5 * (spec.points - 1);
  CVector s(spec.grid_dim());
  for (int d = 0; d < spec.grid_dim(); ++d) {
    s(d) = cplx(h * (axes[2 * d] - mid), h * (axes[2 * d + 1] - mid));
  }
  return s;
}

CVector embed(const TGridSpec& spec, const CVector& s) {
  if (spec.directions.size() == 0) return spec.center + s;
  return spec.center + spec.directions * s;
}

void validate_spec(const TGridSpec& spec) {
  if (spec.center.size() < 1 || spec.center.size() > 2) {
    throw InvalidArgument("t_grid: base dimension must be 1 or 2");
  }
  if (spec.points < 3) throw InvalidArgument("t_grid: points must be at least 3 per axis");
  if (!(spec.half_width > 0.0)) throw InvalidArgument("t_grid: half_width must be positive");
  if (spec.directions.size() != 0 && spec.directions.rows() != spec.center.size()) {
    throw InvalidArgument("t_grid: directions must have one row per base coordinate");
  }
  if (spec.grid_dim() < 1 || spec.grid_dim() > 2) {
    throw InvalidArgument("t_grid: grid dimension must be 1 or 2");
  }
}

}  // namespace

CVector GridFunction::grid_point(std::size_t node) const {
  return grid_point_of(spec, axes(node));
}

CVector GridFunction::base_point(std::size_t node) const {
  return embed(spec, grid_point(node));
}

std::vector<CVector> grid_nodes(const TGridSpec& spec) {
  validate_spec(spec);
  GridFunction shape{spec, {}};
  std::size_t count = 1;
  for (int a = 0; a < 2 * spec.grid_dim(); ++a) count *= static_cast<std::size_t>(spec.points);
  std::vector<CVector> nodes;
  nodes.reserve(count);
  for (std::size_t i = 0; i < count; ++i) nodes.push_back(shape.base_point(i));
  return nodes;
}

GridFunction sample(const TGridSpec& spec, const std::function<double(const CVector&)>& g) {
  GridFunction out{spec, {}};
  for (const CVector& t : grid_nodes(spec)) out.values.push_back(g(t));
  return out;
}

GridFunction log_of(const GridFunction& g) {
  GridFunction out = g;
  for (double& v : out.values) {
    if (!(v > 0.0)) throw InvalidArgument("log_of: nonpositive grid value");
    v = std::log(v);
  }
  return out;
}

void write_csv(std::ostream& out, const GridFunction& g) {
  const auto m = g.spec.center.size();
  auto fmt = [](double x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
  };
  if (m == 1) {
    out << "t_re,t_im,value\n";
  } else {
    out << "t1_re,t1_im,t2_re,t2_im,value\n";
  }
  for (std::size_t i = 0; i < g.size(); ++i) {
    const CVector t = g.base_point(i);
    for (Eigen::Index c = 0; c < t.size(); ++c) out << fmt(t(c).real()) << ',' << fmt(t(c).imag()) << ',';
    out << fmt(g.values[i]) << '\n';
  }
}

}  // namespace curvlab::pshcheck
