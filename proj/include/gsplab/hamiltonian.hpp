#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gsplab/chain.hpp"

namespace gsplab {

/// Nearest-neighbor Hamiltonian H = sum_k H_{k,k+1} with bond terms
/// H_{k,k+1} = H_k + H_{k+1} + Phi_{k,k+1}. `site_terms[j-1]` holds the full
/// physical single-site operator of site j; when a bond term is formed, an
/// interior site contributes half of its term to each adjacent bond and an
/// end site contributes all of it to its unique bond.
struct NNIHamiltonian {
  ChainGeometry geo;
  std::vector<LocalOperator> site_terms;         // d entries, term j on [j, j]
  std::vector<LocalOperator> interaction_terms;  // d-1 entries, term k on [k, k+1]
};

/// Transverse-field Ising chain: Phi_{k,k+1} = -coupling sz⊗sz, site term
/// -field sx. Requires d >= 3.
NNIHamiltonian build_tfim(int d, double coupling, double field,
                          long dim_cap = kDefaultDimCap);

/// Seeded chain with random Hermitian site terms and interactions, all
/// normalized to unit operator norm.
NNIHamiltonian build_random_chain(int d, int n, std::uint64_t seed,
                                  long dim_cap = kDefaultDimCap);

/// Non-interacting chain with site term diag(0, 1, ..., n-1) and zero
/// interactions.
NNIHamiltonian build_free_chain(int d, int n, long dim_cap = kDefaultDimCap);

/// Bond term H_{k,k+1} on [k, k+1], 1 <= k <= d-1, with the boundary
/// convention above.
LocalOperator bond_term(const NNIHamiltonian& h, int k);

/// Full n^d x n^d matrix, sum of embedded bond terms.
Matrix assemble(const NNIHamiltonian& h);

/// J = max over bonds of the interaction norm and of both interaction /
/// site-term commutator norms.
double interaction_strength(const NNIHamiltonian& h);

/// Three-block split of H at cut j with half-width l: H_L sums bonds
/// k <= j-l-2, H_B sums j-l-1 <= k <= j+l+1, H_R sums k >= j+l+2. Valid for
/// 1+l <= j <= d-2-l.
struct PartitionedHamiltonian {
  Matrix h_left, h_bulk, h_right;
  int j = 0;
  int l = 0;
  // Site ranges implied by the bond index ranges, clipped; an empty block
  // keeps a degenerate single-site interval at the chain edge.
  SupportInterval left_support, bulk_support, right_support;
  bool left_empty = false, right_empty = false;
};

PartitionedHamiltonian partition(const NNIHamiltonian& h, int j, int l);

/// block - <psi0, block psi0> I. Throws when |norm(psi0) - 1| > 1e-8.
Matrix recenter(const Matrix& block, const Vector& ground_state);

// ---------------------------------------------------------------------------
// Model specification file: flat key=value lines, '#' comments.
// Keys: model=tfim|random|free, d=, n=, coupling=, field=, seed=.
// ---------------------------------------------------------------------------

struct ModelSpec {
  std::string model = "tfim";
  int d = 8;
  int n = 2;
  double coupling = 1.0;
  double field = 2.0;
  std::uint64_t seed = 0;
};

ModelSpec parse_model_spec(std::istream& in);
ModelSpec load_model_spec(const std::string& path);
NNIHamiltonian build_model(const ModelSpec& spec, long dim_cap = kDefaultDimCap);

}  // namespace gsplab
