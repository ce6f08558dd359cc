#include "gsplab/tensor_ranks.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "gsplab/spectral.hpp"

namespace gsplab {

namespace {

/// Smallest r such that the Euclidean norm of sigma_{r+1}, ... is <= epsilon.
/// epsilon = 0 means numerical rank: singular values below the usual
/// max_dim * eps * sigma_max floor count as zero.
int truncation_rank(const Eigen::VectorXd& sigma, double epsilon, long max_dim) {
  const int count = static_cast<int>(sigma.size());
  if (count == 0) return 0;
  const double floor =
      max_dim * std::numeric_limits<double>::epsilon() * sigma(0);
  const double effective = std::max(epsilon, floor);
  double tail = 0.0;
  int rank = count;
  // Walk from the smallest singular value upward.
  for (int r = count; r >= 1; --r) {
    const double next = tail + sigma(r - 1) * sigma(r - 1);
    if (std::sqrt(next) <= effective) {
      tail = next;
      rank = r - 1;
    } else {
      break;
    }
  }
  return rank;
}

CutSpectrum spectrum_of_unfolding(const Matrix& unfolding, int cut, double epsilon) {
  Eigen::BDCSVD<Matrix> svd(unfolding);
  CutSpectrum out;
  out.cut = cut;
  out.epsilon = epsilon;
  const auto& sigma = svd.singularValues();
  out.singular_values.assign(sigma.data(), sigma.data() + sigma.size());
  out.rank = truncation_rank(sigma, epsilon,
                             std::max(unfolding.rows(), unfolding.cols()));
  return out;
}

/// Row-major unfolding of a state: row index = leading `rows_width` sites.
Matrix unfold_state(const Vector& state, long rows, long cols) {
  Matrix m(rows, cols);
  for (long r = 0; r < rows; ++r)
    for (long c = 0; c < cols; ++c) m(r, c) = state(r * cols + c);
  return m;
}

}  // namespace

CutSpectrum cut_rank(const Vector& state, const ChainGeometry& geo, int j,
                     double epsilon) {
  if (j < 1 || j > geo.sites() - 1)
    throw std::invalid_argument("cut_rank: cut out of range");
  if (state.size() != geo.dim())
    throw std::invalid_argument("cut_rank: state dimension mismatch");
  const long rows = geo.dim_of(j);
  const long cols = geo.dim_of(geo.sites() - j);
  return spectrum_of_unfolding(unfold_state(state, rows, cols), j, epsilon);
}

CutSpectrum operator_cut_rank(const Matrix& a, const ChainGeometry& geo, int j,
                              double epsilon) {
  if (j < 1 || j > geo.sites() - 1)
    throw std::invalid_argument("operator_cut_rank: cut out of range");
  if (a.rows() != geo.dim() || a.cols() != geo.dim())
    throw std::invalid_argument("operator_cut_rank: operator dimension mismatch");

  // Kernel unfolding across the cut: rows group (row, col) indices of the
  // first j sites, columns those of the rest. Equivalent, up to a row/column
  // permutation, to cutting the sitewise-interleaved doubled chain at j.
  const long dl = geo.dim_of(j);
  const long dr = geo.dim_of(geo.sites() - j);
  Matrix m(dl * dl, dr * dr);
  for (long xh = 0; xh < dl; ++xh)
    for (long xl = 0; xl < dr; ++xl)
      for (long yh = 0; yh < dl; ++yh)
        for (long yl = 0; yl < dr; ++yl)
          m(xh * dl + yh, xl * dr + yl) = a(xh * dr + xl, yh * dr + yl);
  return spectrum_of_unfolding(m, j, epsilon);
}

RankProfile state_rank_profile(const Vector& state, const ChainGeometry& geo,
                               double epsilon) {
  RankProfile profile;
  profile.epsilon = epsilon;
  for (int j = 1; j <= geo.sites() - 1; ++j) {
    CutSpectrum cs = cut_rank(state, geo, j, epsilon);
    profile.cuts.push_back(j);
    profile.ranks.push_back(cs.rank);
    profile.singular_values.push_back(std::move(cs.singular_values));
  }
  return profile;
}

RankProfile operator_rank_profile(const Matrix& a, const ChainGeometry& geo,
                                  double epsilon) {
  RankProfile profile;
  profile.epsilon = epsilon;
  for (int j = 1; j <= geo.sites() - 1; ++j) {
    CutSpectrum cs = operator_cut_rank(a, geo, j, epsilon);
    profile.cuts.push_back(j);
    profile.ranks.push_back(cs.rank);
    profile.singular_values.push_back(std::move(cs.singular_values));
  }
  return profile;
}

void write_rank_csv(std::ostream& out, int d, const RankProfile& profile) {
  out << "d,cut,epsilon,rank\n";
  char buf[64];
  for (std::size_t i = 0; i < profile.cuts.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.12g", profile.epsilon);
    out << d << ',' << profile.cuts[i] << ',' << buf << ',' << profile.ranks[i]
        << '\n';
  }
}

void write_singular_values_csv(std::ostream& out, int d, const RankProfile& profile) {
  out << "d,cut,index,singular_value\n";
  char buf[64];
  for (std::size_t i = 0; i < profile.cuts.size(); ++i)
    for (std::size_t k = 0; k < profile.singular_values[i].size(); ++k) {
      std::snprintf(buf, sizeof(buf), "%.12g", profile.singular_values[i][k]);
      out << d << ',' << profile.cuts[i] << ',' << k << ',' << buf << '\n';
    }
}

TTRepresentation tt_decompose(const Vector& state, const ChainGeometry& geo,
                              double epsilon) {
  const int d = geo.sites();
  const int n = geo.local_dim();
  if (state.size() != geo.dim())
    throw std::invalid_argument("tt_decompose: state dimension mismatch");

  const double budget = epsilon / std::sqrt(double(d - 1));
  TTRepresentation tt;
  tt.d = d;
  tt.n = n;

  // Working matrix starts as the full state seen as (1*n) x n^(d-1); after
  // the cut at j it becomes (r_j * n) x n^(d-j-1).
  Matrix work = unfold_state(state, n, geo.dim() / n);
  for (int j = 1; j <= d - 1; ++j) {
    Eigen::BDCSVD<Matrix> svd(work, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sigma = svd.singularValues();
    int r = truncation_rank(sigma, budget, std::max(work.rows(), work.cols()));
    if (r == 0) r = 1;  // keep a zero core rather than an empty one
    tt.cores.push_back(svd.matrixU().leftCols(r));
    tt.bond_dims.push_back(r);

    // Carry sigma * V^dag: r x n^(d-j).
    const Matrix rest =
        sigma.head(r).asDiagonal() * svd.matrixV().leftCols(r).adjoint();
    const long cols_next = rest.cols() / n;
    Matrix next(static_cast<long>(r) * n, cols_next);
    for (long k = 0; k < r; ++k)
      for (long i = 0; i < n; ++i)
        for (long c = 0; c < cols_next; ++c)
          next(k * n + i, c) = rest(k, i * cols_next + c);
    work = std::move(next);
  }
  tt.cores.push_back(work);  // (r_{d-1} * n) x 1
  return tt;
}

Vector tt_reconstruct(const TTRepresentation& tt) {
  const int n = tt.n;
  // psi_j[(alpha, i), k] = sum_m psi_{j-1}[alpha, m] U_j[(m, i), k]
  Matrix psi = tt.cores[0];  // n x r_1, alpha empty
  for (int j = 1; j < tt.d; ++j) {
    const Matrix& core = tt.cores[j];
    const long r_in = core.rows() / n;
    const long r_out = core.cols();
    // Reshape the core to r_in x (n * r_out) then contract.
    Matrix flat(r_in, n * r_out);
    for (long m = 0; m < r_in; ++m)
      for (long i = 0; i < n; ++i)
        for (long k = 0; k < r_out; ++k) flat(m, i * r_out + k) = core(m * n + i, k);
    Matrix grown = psi * flat;  // rows x (n * r_out)
    Matrix next(psi.rows() * n, r_out);
    for (long a = 0; a < psi.rows(); ++a)
      for (long i = 0; i < n; ++i)
        for (long k = 0; k < r_out; ++k) next(a * n + i, k) = grown(a, i * r_out + k);
    psi = std::move(next);
  }
  return psi.col(0);
}

std::vector<RankScanRow> rank_saturation_scan(const ModelSpec& spec, double epsilon,
                                              const std::vector<int>& d_list,
                                              long dim_cap) {
  std::vector<RankScanRow> rows;
  for (int d : d_list) {
    ModelSpec point = spec;
    point.d = d;
    const NNIHamiltonian h = build_model(point, dim_cap);
    EigenSystem es = diagonalize(assemble(h));
    const Matrix p0 = ground_projection(es, ProjectionMode::kTraceNormalized).matrix;
    es.eigenvectors.resize(0, 0);  // large-d scans are memory-bound
    const int cut = d / 2;
    const CutSpectrum cs = operator_cut_rank(p0, h.geo, cut, epsilon);
    rows.push_back(RankScanRow{d, cut, epsilon, cs.rank});
  }
  return rows;
}

}  // namespace gsplab
