#pragma once

#include <iosfwd>
#include <vector>

#include "gsplab/chain.hpp"

namespace gsplab {

/// Full spectral decomposition of a Hermitian matrix. Eigenvalues are
/// ascending and shifted so that the ground energy is exactly 0; the original
/// ground energy is kept in `shift`.
struct EigenSystem {
  Eigen::VectorXd eigenvalues;  // shifted, eigenvalues(0) == 0
  Matrix eigenvectors;          // orthonormal columns
  int degeneracy = 1;           // N, eigenvalues within tolerance of the ground
  double gap = 0.0;             // eigenvalues(N)
  double shift = 0.0;

  Vector ground_vector(int k = 0) const { return eigenvectors.col(k); }
};

/// Negative sentinel: use 1e-8 * (lambda_max - lambda_0).
inline constexpr double kDefaultDegeneracyTol = -1.0;

/// Dense Hermitian eigendecomposition. Throws on non-Hermitian input, solver
/// failure, or a fully degenerate spectrum (no gap).
EigenSystem diagonalize(const Matrix& h, double degeneracy_tol = kDefaultDegeneracyTol);

enum class ProjectionMode { kProjection, kTraceNormalized };

/// Ground-state projection. Projection mode: P^2 = P, norm 1. Trace-normalized
/// mode: P / N, unit trace.
struct GroundProjection {
  Matrix matrix;
  int degeneracy = 1;
  ProjectionMode mode = ProjectionMode::kTraceNormalized;
};

GroundProjection ground_projection(const EigenSystem& es, ProjectionMode mode);

/// Gaussian spectral filter rho^q = (1/N) sum_lambda exp(-lambda^2 q / 2) P(lambda),
/// evaluated in closed form in the eigenbasis. q = 0 gives I/N. Throws on q < 0.
/// `n_override` replaces the 1/N prefactor when positive.
Matrix gaussian_filter(const EigenSystem& es, double q, int n_override = 0);

/// exp(iHt) A exp(-iHt): eigenbasis entry (m, k) picks up exp(i (l_m - l_k) t).
Matrix heisenberg_evolve(const EigenSystem& es, const Matrix& a, double t);

/// Gaussian time average of the Heisenberg evolution: eigenbasis entry (m, k)
/// is damped by exp(-q (l_m - l_k)^2 / 2). q = 0 returns a unchanged.
Matrix gaussian_smear(const EigenSystem& es, const Matrix& a, double q);

/// || gaussian_smear(block) psi_0 ||. Requires a non-degenerate ground state;
/// use annihilation_residuals for N > 1.
double annihilation_residual(const EigenSystem& es, const Matrix& recentered_block,
                             double q);

/// One residual per ground basis vector.
std::vector<double> annihilation_residuals(const EigenSystem& es,
                                           const Matrix& recentered_block, double q);

/// Columns: index, eigenvalue (shifted).
void write_spectrum_csv(std::ostream& out, const EigenSystem& es);

}  // namespace gsplab
