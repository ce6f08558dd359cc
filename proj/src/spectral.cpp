#include "gsplab/spectral.hpp"

#include <cmath>
#include <ostream>

namespace gsplab {

namespace {

void check_hermitian(const Matrix& h, const char* what) {
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  if ((h - h.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw std::invalid_argument(std::string(what) + ": input is not Hermitian");
}

/// V^dag A V, entrywise weight, V . V^dag.
template <typename Weight>
Matrix eigenbasis_map(const EigenSystem& es, const Matrix& a, Weight&& weight) {
  if (a.rows() != es.eigenvectors.rows() || a.cols() != es.eigenvectors.rows())
    throw std::invalid_argument("eigenbasis map: dimension mismatch");
  const Matrix& v = es.eigenvectors;
  Matrix w = v.adjoint() * a * v;
  const auto& lam = es.eigenvalues;
  for (Eigen::Index m = 0; m < w.rows(); ++m)
    for (Eigen::Index k = 0; k < w.cols(); ++k) w(m, k) *= weight(lam(m), lam(k));
  return v * w * v.adjoint();
}

}  // namespace

EigenSystem diagonalize(const Matrix& h, double degeneracy_tol) {
  if (h.rows() != h.cols() || h.rows() == 0)
    throw std::invalid_argument("diagonalize: matrix must be square and non-empty");
  check_hermitian(h, "diagonalize");

  Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("diagonalize: eigensolver did not converge");

  EigenSystem es;
  es.shift = solver.eigenvalues()(0);
  es.eigenvalues = solver.eigenvalues().array() - es.shift;
  es.eigenvectors = solver.eigenvectors();

  const Eigen::Index dim = es.eigenvalues.size();
  const double spread = es.eigenvalues(dim - 1);
  double tol = degeneracy_tol;
  if (tol < 0) tol = 1e-8 * spread;

  int n = 1;
  while (n < dim && es.eigenvalues(n) <= tol) ++n;
  if (n == dim)
    throw std::runtime_error("diagonalize: spectrum is fully degenerate, no gap");
  es.degeneracy = n;
  es.gap = es.eigenvalues(n);

  // Residual and orthonormality checks.
  const double h_scale = std::max(1.0, h.norm());
  if ((h * es.eigenvectors -
       es.eigenvectors * (es.eigenvalues.array() + es.shift).matrix().asDiagonal())
          .norm() > 1e-9 * h_scale)
    throw std::runtime_error("diagonalize: eigenpair residual too large");
  Matrix g = es.eigenvectors.adjoint() * es.eigenvectors;
  g.diagonal().array() -= 1.0;
  if (g.cwiseAbs().maxCoeff() > 1e-10)
    throw std::runtime_error("diagonalize: eigenvectors are not orthonormal");

  return es;
}

GroundProjection ground_projection(const EigenSystem& es, ProjectionMode mode) {
  const int n = es.degeneracy;
  const auto ground = es.eigenvectors.leftCols(n);
  Matrix p = ground * ground.adjoint();
  if (mode == ProjectionMode::kTraceNormalized) p /= static_cast<double>(n);
  return GroundProjection{std::move(p), n, mode};
}

Matrix gaussian_filter(const EigenSystem& es, double q, int n_override) {
  if (q < 0) throw std::invalid_argument("gaussian_filter: q must be >= 0");
  const double inv_n = 1.0 / (n_override > 0 ? n_override : es.degeneracy);
  Eigen::VectorXd weights =
      (-0.5 * q * es.eigenvalues.array().square()).exp() * inv_n;
  return es.eigenvectors * weights.asDiagonal() * es.eigenvectors.adjoint();
}

Matrix heisenberg_evolve(const EigenSystem& es, const Matrix& a, double t) {
  if (t == 0.0) return a;
  return eigenbasis_map(es, a, [t](double lm, double lk) {
    return std::exp(Complex(0, (lm - lk) * t));
  });
}

Matrix gaussian_smear(const EigenSystem& es, const Matrix& a, double q) {
  if (q < 0) throw std::invalid_argument("gaussian_smear: q must be >= 0");
  if (q == 0.0) return a;
  return eigenbasis_map(es, a, [q](double lm, double lk) {
    const double diff = lm - lk;
    return Complex(std::exp(-0.5 * q * diff * diff), 0);
  });
}

std::vector<double> annihilation_residuals(const EigenSystem& es,
                                           const Matrix& recentered_block, double q) {
  const Matrix smeared = gaussian_smear(es, recentered_block, q);
  std::vector<double> out;
  out.reserve(es.degeneracy);
  for (int k = 0; k < es.degeneracy; ++k)
    out.push_back((smeared * es.ground_vector(k)).norm());
  return out;
}

double annihilation_residual(const EigenSystem& es, const Matrix& recentered_block,
                             double q) {
  if (es.degeneracy > 1)
    throw std::invalid_argument(
        "annihilation_residual: degenerate ground space, use annihilation_residuals");
  return annihilation_residuals(es, recentered_block, q)[0];
}

void write_spectrum_csv(std::ostream& out, const EigenSystem& es) {
  out << "index,eigenvalue\n";
  char buf[64];
  for (Eigen::Index i = 0; i < es.eigenvalues.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.12g", es.eigenvalues(i));
    out << i << ',' << buf << '\n';
  }
}

}  // namespace gsplab
