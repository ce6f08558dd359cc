#pragma once

#include <iosfwd>
#include <vector>

#include "gsplab/hamiltonian.hpp"

namespace gsplab {

/// Singular values of one bipartite cut together with the smallest rank whose
/// tail Euclidean norm is <= epsilon.
struct CutSpectrum {
  int cut = 0;
  double epsilon = 0.0;
  int rank = 0;
  std::vector<double> singular_values;  // descending
};

/// Reshape the state to n^j x n^(d-j) (site 1 most significant), SVD, and
/// truncate. 1 <= j <= d-1.
CutSpectrum cut_rank(const Vector& state, const ChainGeometry& geo, int j,
                     double epsilon);

/// Cut rank of an operator kernel: the kernel is treated as a vector on the
/// doubled chain of local dimension n^2 (row and column indices interleaved
/// sitewise), then cut at j.
CutSpectrum operator_cut_rank(const Matrix& a, const ChainGeometry& geo, int j,
                              double epsilon);

/// epsilon-ranks over a list of cuts.
struct RankProfile {
  std::vector<int> cuts;
  double epsilon = 0.0;
  std::vector<int> ranks;
  std::vector<std::vector<double>> singular_values;  // per cut, descending
};

RankProfile state_rank_profile(const Vector& state, const ChainGeometry& geo,
                               double epsilon);
RankProfile operator_rank_profile(const Matrix& a, const ChainGeometry& geo,
                                  double epsilon);

/// Columns: d, cut, epsilon, rank.
void write_rank_csv(std::ostream& out, int d, const RankProfile& profile);

/// Columns: d, cut, index, singular_value (descending per cut).
void write_singular_values_csv(std::ostream& out, int d, const RankProfile& profile);

/// Open-boundary tensor train produced by a left-to-right reshape/SVD sweep
/// with per-cut truncation budget epsilon / sqrt(d-1). Core j is stored as a
/// (r_{j-1} * n) x r_j matrix with row index k_{j-1} * n + i_j.
struct TTRepresentation {
  int d = 0;
  int n = 0;
  std::vector<Matrix> cores;
  std::vector<int> bond_dims;  // r_1 .. r_{d-1}
};

TTRepresentation tt_decompose(const Vector& state, const ChainGeometry& geo,
                              double epsilon);
Vector tt_reconstruct(const TTRepresentation& tt);

/// Middle-cut epsilon-rank of the trace-normalized ground projection kernel,
/// for each chain length in d_list.
struct RankScanRow {
  int d = 0;
  int cut = 0;
  double epsilon = 0.0;
  int rank = 0;
};

std::vector<RankScanRow> rank_saturation_scan(const ModelSpec& spec, double epsilon,
                                              const std::vector<int>& d_list,
                                              long dim_cap = kDefaultDimCap);

}  // namespace gsplab
