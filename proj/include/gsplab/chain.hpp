#pragma once

#include <complex>
#include <optional>
#include <stdexcept>

#include <Eigen/Dense>

namespace gsplab {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr long kDefaultDimCap = 4096;

/// Open chain of `d` sites with uniform local dimension `n`. Site 1 maps to
/// the most significant digit of the tensor-product index, site d to the
/// least significant one; this convention is fixed for the whole library.
class ChainGeometry {
 public:
  ChainGeometry(int sites, int local_dim, long dim_cap = kDefaultDimCap);

  int sites() const { return d_; }
  int local_dim() const { return n_; }
  long dim() const { return dim_; }
  long dim_cap() const { return cap_; }

  /// n^width, with overflow checking.
  long dim_of(int width) const;

 private:
  int d_;
  int n_;
  long dim_;
  long cap_;
};

/// Contiguous, 1-based, inclusive site interval. Every interval handed to or
/// produced by this library has already been intersected with [1, d].
struct SupportInterval {
  int lo = 1;
  int hi = 1;

  int width() const { return hi - lo + 1; }
  bool contains(int site) const { return lo <= site && site <= hi; }
  bool contains(SupportInterval other) const {
    return lo <= other.lo && other.hi <= hi;
  }
  bool operator==(const SupportInterval&) const = default;
};

/// Intersects [lo, hi] with [1, d]. Throws if the result is empty.
SupportInterval clip_interval(int lo, int hi, const ChainGeometry& geo);

/// A dense operator kernel together with the contiguous interval of sites it
/// acts on. The matrix dimension is local_dim^width(support).
class LocalOperator {
 public:
  LocalOperator(SupportInterval support, Matrix matrix, int local_dim);

  const SupportInterval& support() const { return support_; }
  const Matrix& matrix() const { return matrix_; }
  int local_dim() const { return n_; }

  /// Lazily computed and cached; max-entry tolerance 1e-10.
  bool is_hermitian() const;
  bool is_unitary() const;

  /// Declare the flag up front; verified immediately, throws on violation.
  LocalOperator& declare_hermitian();
  LocalOperator& declare_unitary();

 private:
  SupportInterval support_;
  Matrix matrix_;
  int n_;
  mutable std::optional<bool> hermitian_;
  mutable std::optional<bool> unitary_;
};

/// Kronecker product with the left factor on the most significant index.
Matrix kron(const Matrix& a, const Matrix& b);

/// A_support ⊗ I on all complement sites, as a full n^d x n^d matrix.
Matrix embed(const LocalOperator& op, const ChainGeometry& geo);

/// Distance between supports: 0 when the intervals share a site, otherwise
/// the index gap min |x - y| over x in supp(a), y in supp(b).
int support_distance(SupportInterval a, SupportInterval b);
int support_distance(const LocalOperator& a, const LocalOperator& b);

/// AB - BA. Throws on dimension mismatch.
Matrix commutator(const Matrix& a, const Matrix& b);

/// Largest singular value. Throws on non-finite entries.
double operator_norm(const Matrix& a);

}  // namespace gsplab
