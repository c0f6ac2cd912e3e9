#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include "curvlab/curvature.hpp"

namespace curvlab::curvature {

namespace {
std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}
}  // namespace

void write_matrix(std::ostream& out, const CMatrix& m) {
  out << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ' ';
      out << format_double(m(i, j).real()) << ',' << format_double(m(i, j).imag());
    }
    out << '\n';
  }
}

CMatrix read_matrix(std::istream& in) {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  if (!(in >> rows >> cols) || rows < 0 || cols < 0) {
    throw InvalidArgument("read_matrix: bad header");
  }
  CMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      std::string token;
      if (!(in >> token)) throw InvalidArgument("read_matrix: truncated input");
      const auto comma = token.find(',');
      if (comma == std::string::npos) throw InvalidArgument("read_matrix: entry without comma");
      double re = 0.0;
      double im = 0.0;
      const auto r1 = std::from_chars(token.data(), token.data() + comma, re);
      const auto r2 = std::from_chars(token.data() + comma + 1, token.data() + token.size(), im);
      if (r1.ec != std::errc() || r2.ec != std::errc()) {
        throw InvalidArgument("read_matrix: malformed entry '" + token + "'");
      }
      m(i, j) = cplx(re, im);
    }
  }
  return m;
}

}  // namespace curvlab::curvature
