#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gsplab/localization.hpp"

namespace gsplab {

/// Symmetric trapezoid grid for integrals against the normalized Gaussian
/// exp(-t^2 / 2q) / sqrt(2 pi q). The step resolves oscillations up to
/// `bandwidth` without aliasing (nodes get denser as the integrand's spectral
/// content grows); min_nodes is a floor on the total node count.
struct QuadratureGrid {
  Eigen::VectorXd nodes;    // ascending, symmetric about 0
  Eigen::VectorXd weights;  // Gaussian factor and normalization included
};

QuadratureGrid gaussian_quadrature_grid(double q, double bandwidth, int min_nodes);

/// Orthogonal projector onto the span of eigenvectors of a Hermitian matrix
/// with |lambda| <= threshold. An empty window yields the zero operator.
Matrix spectral_window(const Matrix& m, double threshold);

/// Rule for the spectral-window threshold of L and R. The default scales the
/// measured ground-state residual ||M_X psi_0||; the floor keeps exact kernels
/// inside the window.
struct ThresholdRule {
  enum class Kind { kResidualFactor, kAbsolute, kInfinite };
  Kind kind = Kind::kResidualFactor;
  double value = 10.0;
  static constexpr double kFloor = 1e-12;

  double resolve(double psi_residual) const;
};

/// A spectral-window projector restricted to its support, with diagnostics.
struct WindowFactor {
  LocalOperator op;
  double threshold = 0.0;
  double psi_residual = 0.0;  // ||(X - I) psi_0||
  int window_dim = 0;         // projector rank
};

/// L from M_L (supported on [1, j]) and R from M_R (supported on [j+1, d]).
std::pair<WindowFactor, WindowFactor> build_LR(const LocalizedBlocks& blocks,
                                               const EigenSystem& es,
                                               const ChainGeometry& geo,
                                               const ThresholdRule& rule = {});

/// U(t) = exp(i (M_L + M_B + M_R) t) exp(-i (M_L + M_R) t), each factor via
/// an eigendecomposition of its Hermitian generator.
Matrix ordered_unitary(const LocalizedBlocks& blocks, double t);

/// K-step ordered product of exp(i M^_B(t_i) dt), t_i = i dt, dt = t / K,
/// earliest factor leftmost. For localized = false the generator is
/// M_B(t_i) = exp(iDt_i) M_B exp(-iDt_i) with D = M_L + M_R; for
/// localized = true it is the channel projection of M_B(t_i) onto `window`.
Matrix product_integral(const LocalizedBlocks& blocks, const ChainGeometry& geo,
                        double t, int K, bool localized, SupportInterval window,
                        ReferenceState reference = ReferenceState::kMaximallyMixed,
                        const Vector* ground_state = nullptr);

/// Norms of the cleanup steps applied to the quadrature output.
struct BCorrections {
  double hermitize = 0.0;
  double clamp = 0.0;
  double rescale = 0.0;
  double total = 0.0;  // ||B_raw - B||
};

struct BuildBResult {
  LocalOperator b;      // Hermitian, positive semidefinite, norm <= 1
  LocalOperator b_raw;  // quadrature output before cleanup
  BCorrections corrections;
};

/// Quadrature of the localized ordered product over t against the Gaussian
/// weight, prefactor 1/(N sqrt(2 pi q)), then Hermitization, positive-part
/// clamp and norm rescale. The quadrature grid is bandwidth-derived from the
/// block spectra; quad_nodes is its floor.
BuildBResult build_B(const LocalizedBlocks& blocks, const ChainGeometry& geo,
                     double q, int K, SupportInterval window, int quad_nodes = 64,
                     int degeneracy = 1,
                     ReferenceState reference = ReferenceState::kMaximallyMixed,
                     const Vector* ground_state = nullptr);

struct BLRConfig {
  double kappa = 1.0;              // q = kappa * 2 l / gap^2 unless overridden
  std::optional<double> q_override;
  int quad_nodes = 64;
  int k_steps = 256;
  ThresholdRule threshold{};
  ReferenceState reference = ReferenceState::kMaximallyMixed;
};

struct StageDiagnostic {
  std::string stage;
  std::string op;
  double norm_error = 0.0;
  SupportInterval support;
};

struct BLRFactors {
  LocalOperator L, R, B;
  int j = 0;
  int l = 0;
  double q = 0.0;
  double kappa = 1.0;
  double threshold_L = 0.0, threshold_R = 0.0;
  BCorrections b_corrections;
  double error = 0.0;        // ||P0 - B L R|| against the trace-normalized P0
  double stage_bound = 0.0;  // telescoped sum of stage errors; error <= stage_bound
  double ordering_gap = 0.0; // ||BLR - LRB||
  std::vector<StageDiagnostic> diagnostics;
};

/// Full pipeline: partition, recenter, smear, localize, spectral windows,
/// ordered-product B, final error and the stage-error audit.
BLRFactors assemble_blr(const NNIHamiltonian& h, const EigenSystem& es, int j, int l,
                        const BLRConfig& config = {});

/// Columns: stage, operator, norm_error, support_lo, support_hi.
void write_stage_csv(std::ostream& out, const BLRFactors& factors);

}  // namespace gsplab
