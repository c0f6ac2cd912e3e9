#include <array>
#include <algorithm>

#include "curvlab/bergman.hpp"

namespace curvlab::bergman {

namespace {
// All multi-indices of length n and total degree d, first exponent descending.
void append_degree(int n, int d, std::vector<int>& prefix, std::vector<std::vector<int>>& out) {
  if (static_cast<int>(prefix.size()) == n - 1) {
    prefix.push_back(d);
    out.push_back(prefix);
    prefix.pop_back();
    return;
  }
  for (int k = d; k >= 0; --k) {
    prefix.push_back(k);
    append_degree(n, d - k, prefix, out);
    prefix.pop_back();
  }
}
}  // namespace

Basis::Basis(int fiber_dim, int max_degree) : n_(fiber_dim), degree_(max_degree) {
  if (fiber_dim < 1 || fiber_dim > 2) throw InvalidArgument("Basis: fiber dimension must be 1 or 2");
  if (max_degree < 0) throw InvalidArgument("Basis: max degree must be nonnegative");
  std::vector<int> prefix;
  for (int d = 0; d <= max_degree; ++d) append_degree(n_, d, prefix, indices_);
}

std::size_t Basis::index_of(const std::vector<int>& alpha) const {
  auto it = std::find(indices_.begin(), indices_.end(), alpha);
  return static_cast<std::size_t>(it - indices_.begin());
}

void Basis::evaluate(std::span<const cplx> z, std::span<cplx> out) const {
  if (static_cast<int>(z.size()) != n_ || out.size() != size()) {
    throw InvalidArgument("Basis::evaluate: size mismatch");
  }
  // powers[c * stride + k] = z_c^k
  const std::size_t stride = static_cast<std::size_t>(degree_) + 1;
  std::array<cplx, 128> local;
  std::vector<cplx> heap;
  cplx* powers = local.data();
  if (stride * static_cast<std::size_t>(n_) > local.size()) {
    heap.resize(stride * static_cast<std::size_t>(n_));
    powers = heap.data();
  }
  for (int c = 0; c < n_; ++c) {
    cplx* p = powers + static_cast<std::size_t>(c) * stride;
    p[0] = 1.0;
    for (std::size_t k = 1; k < stride; ++k) p[k] = p[k - 1] * z[static_cast<std::size_t>(c)];
  }
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    cplx v = 1.0;
    for (int c = 0; c < n_; ++c) {
      v *= powers[static_cast<std::size_t>(c) * stride + static_cast<std::size_t>(indices_[i][c])];
    }
    out[i] = v;
  }
}

CVector Basis::evaluate(const CVector& z) const {
  CVector out(static_cast<Eigen::Index>(size()));
  evaluate(std::span<const cplx>(z.data(), z.size()), std::span<cplx>(out.data(), out.size()));
  return out;
}

}  // namespace curvlab::bergman
