#include "gsplab/chain.hpp"

#include <cmath>
#include <string>

namespace gsplab {

namespace {

long checked_pow(int base, int exponent, long cap, const char* what) {
  long value = 1;
  for (int i = 0; i < exponent; ++i) {
    if (value > cap / base) {
      throw std::invalid_argument(std::string(what) + ": dimension " +
                                  std::to_string(base) + "^" +
                                  std::to_string(exponent) +
                                  " exceeds the desk-scale cap " +
                                  std::to_string(cap));
    }
    value *= base;
  }
  return value;
}

}  // namespace

ChainGeometry::ChainGeometry(int sites, int local_dim, long dim_cap)
    : d_(sites), n_(local_dim), cap_(dim_cap) {
  if (d_ < 2) throw std::invalid_argument("ChainGeometry: need at least 2 sites");
  if (n_ < 2) throw std::invalid_argument("ChainGeometry: local dimension must be >= 2");
  if (cap_ < 4) throw std::invalid_argument("ChainGeometry: cap too small");
  dim_ = checked_pow(n_, d_, cap_, "ChainGeometry");
}

long ChainGeometry::dim_of(int width) const {
  if (width < 0 || width > d_)
    throw std::invalid_argument("ChainGeometry::dim_of: width out of range");
  return checked_pow(n_, width, cap_, "ChainGeometry::dim_of");
}

SupportInterval clip_interval(int lo, int hi, const ChainGeometry& geo) {
  SupportInterval s{std::max(lo, 1), std::min(hi, geo.sites())};
  if (s.lo > s.hi)
    throw std::invalid_argument("clip_interval: interval [" + std::to_string(lo) +
                                ", " + std::to_string(hi) +
                                "] does not intersect the chain");
  return s;
}

LocalOperator::LocalOperator(SupportInterval support, Matrix matrix, int local_dim)
    : support_(support), matrix_(std::move(matrix)), n_(local_dim) {
  if (support_.lo < 1 || support_.lo > support_.hi)
    throw std::invalid_argument("LocalOperator: invalid support interval");
  if (n_ < 2) throw std::invalid_argument("LocalOperator: local dimension must be >= 2");
  long expect = 1;
  for (int i = 0; i < support_.width(); ++i) expect *= n_;
  if (matrix_.rows() != matrix_.cols() || matrix_.rows() != expect)
    throw std::invalid_argument(
        "LocalOperator: matrix dimension inconsistent with support width");
}

namespace {
constexpr double kFlagTol = 1e-10;
}

bool LocalOperator::is_hermitian() const {
  if (!hermitian_)
    hermitian_ = (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff() <= kFlagTol;
  return *hermitian_;
}

bool LocalOperator::is_unitary() const {
  if (!unitary_) {
    Matrix g = matrix_.adjoint() * matrix_;
    g.diagonal().array() -= 1.0;
    unitary_ = g.cwiseAbs().maxCoeff() <= kFlagTol;
  }
  return *unitary_;
}

LocalOperator& LocalOperator::declare_hermitian() {
  if (!is_hermitian())
    throw std::invalid_argument("LocalOperator: declared hermitian but is not");
  return *this;
}

LocalOperator& LocalOperator::declare_unitary() {
  if (!is_unitary())
    throw std::invalid_argument("LocalOperator: declared unitary but is not");
  return *this;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Matrix embed(const LocalOperator& op, const ChainGeometry& geo) {
  const SupportInterval s = op.support();
  if (op.local_dim() != geo.local_dim())
    throw std::invalid_argument("embed: local dimension mismatch");
  if (s.lo < 1 || s.hi > geo.sites())
    throw std::invalid_argument("embed: support out of range");

  const long dl = geo.dim_of(s.lo - 1);
  const long da = geo.dim_of(s.width());
  const long dr = geo.dim_of(geo.sites() - s.hi);
  const long dim = geo.dim();

  const Matrix& a = op.matrix();
  Matrix out = Matrix::Zero(dim, dim);
  for (long il = 0; il < dl; ++il) {
    const long base = il * da * dr;
    for (long r = 0; r < da; ++r)
      for (long c = 0; c < da; ++c) {
        const Complex v = a(r, c);
        if (v == Complex(0, 0)) continue;
        for (long ir = 0; ir < dr; ++ir)
          out(base + r * dr + ir, base + c * dr + ir) = v;
      }
  }
  return out;
}

int support_distance(SupportInterval a, SupportInterval b) {
  const int gap = std::max(b.lo - a.hi, a.lo - b.hi);
  return std::max(gap, 0);
}

int support_distance(const LocalOperator& a, const LocalOperator& b) {
  return support_distance(a.support(), b.support());
}

Matrix commutator(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols())
    throw std::invalid_argument("commutator: dimension mismatch");
  return a * b - b * a;
}

double operator_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  if (!a.allFinite()) throw std::invalid_argument("operator_norm: non-finite entries");
  // sqrt of the top eigenvalue of A^H A; BDCSVD can misplace the leading
  // singular value by ~1e-5 on heavily degenerate spectra (e.g. projectors),
  // which the norm-cap checks cannot tolerate.
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a.adjoint() * a,
                                               Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("operator_norm: eigensolver did not converge");
  return std::sqrt(std::max(0.0, solver.eigenvalues().maxCoeff()));
}

}  // namespace gsplab
