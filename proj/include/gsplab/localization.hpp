#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "gsplab/hamiltonian.hpp"
#include "gsplab/spectral.hpp"

namespace gsplab {

/// Conditional expectation onto operators supported on `target`, realized as
/// the partial trace weighted by a reference state on the complement sites.
/// The complement index orders the sites left of the target before the sites
/// right of it, both in chain order.
struct LocalizationChannel {
  SupportInterval target;
  Matrix reference_state;  // density matrix on the complement
};

enum class ReferenceState { kMaximallyMixed, kGroundReduced };

LocalizationChannel maximally_mixed_channel(SupportInterval target,
                                            const ChainGeometry& geo);
LocalizationChannel ground_reduced_channel(SupportInterval target,
                                           const ChainGeometry& geo,
                                           const Vector& ground_state);
LocalizationChannel make_channel(SupportInterval target, const ChainGeometry& geo,
                                 ReferenceState kind,
                                 const Vector* ground_state = nullptr);

/// Pi(A): contractive, unital, Hermiticity-preserving, idempotent for a fixed
/// channel; Pi(A) = A whenever supp(A) is inside the target.
LocalOperator localize(const Matrix& a, const LocalizationChannel& channel,
                       const ChainGeometry& geo);

/// Local kernel of an operator known to be supported on `support` (the
/// maximally mixed partial trace is exact in that case).
LocalOperator restrict_to_support(const Matrix& a, SupportInterval support,
                                  const ChainGeometry& geo);

/// Smeared and localized three-block decomposition around cut j:
/// M_X = H_X + Theta_X with Theta_X = Pi_X(smear(H_X) - H_X), every H_X
/// recentered against the ground state first.
struct LocalizedBlocks {
  LocalOperator theta_L, theta_B, theta_R;
  Matrix m_L, m_B, m_R;                      // full space, Hermitian
  Matrix h_L, h_B, h_R;                      // recentered partition blocks
  Matrix smeared_L, smeared_B, smeared_R;    // Gaussian-smeared blocks
  SupportInterval window_L, window_B, window_R;
  int j = 0;
  int l = 0;
  double q = 0.0;
};

struct LocalizationOptions {
  ReferenceState reference = ReferenceState::kMaximallyMixed;
  // Override the default localization windows
  //   L: [j-2l-2, j], B: [j-2l-2, j+2l+3], R: [j+1, j+2l+3] (all clipped);
  // useful for decay-in-width experiments on short chains.
  std::optional<SupportInterval> window_L, window_B, window_R;
};

LocalizedBlocks build_localized_blocks(const NNIHamiltonian& h, const EigenSystem& es,
                                       int j, int l, double q,
                                       const LocalizationOptions& options = {});

// ---------------------------------------------------------------------------
// Empirical light cone
// ---------------------------------------------------------------------------

/// || [A(t), B_p] || on a (time, probe) grid; distances are measured between
/// the supports of A and each probe.
struct LRConeProfile {
  std::vector<double> times;
  std::vector<int> distances;
  Eigen::MatrixXd norms;  // times.size() x probes.size()
};

LRConeProfile lr_cone_profile(const NNIHamiltonian& h, const EigenSystem& es,
                              const LocalOperator& a,
                              const std::vector<LocalOperator>& probes,
                              const std::vector<double>& times);

/// Columns: time, distance, commutator_norm.
void write_lr_cone_csv(std::ostream& out, const LRConeProfile& profile);

/// Least squares of log||[A(t),B]|| against (distance, time) for the envelope
/// prefactor * exp(-decay * (dist - velocity * t)); only entries > 1e-12 are
/// used. Throws when the profile is degenerate.
struct LRConstants {
  double prefactor = 0.0;  // C
  double decay = 0.0;      // a
  double velocity = 0.0;   // v
  double residual = 0.0;   // rms residual of the log fit
  int points_used = 0;
};

LRConstants fit_lr_constants(const LRConeProfile& profile);

}  // namespace gsplab
