#include "gsplab/localization.hpp"

#include <cmath>
#include <ostream>
#include <set>

namespace gsplab {

namespace {

struct SplitDims {
  long left, target, right;
  long complement() const { return left * right; }
};

SplitDims split_dims(SupportInterval target, const ChainGeometry& geo) {
  return SplitDims{geo.dim_of(target.lo - 1), geo.dim_of(target.width()),
                   geo.dim_of(geo.sites() - target.hi)};
}

void check_density(const Matrix& rho, const char* what) {
  if (rho.rows() != rho.cols())
    throw std::invalid_argument(std::string(what) + ": reference state not square");
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument(std::string(what) + ": reference state not Hermitian");
  if (std::abs(rho.trace().real() - 1.0) > 1e-10 ||
      std::abs(rho.trace().imag()) > 1e-10)
    throw std::invalid_argument(std::string(what) + ": reference state trace != 1");
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho);
  if (es.eigenvalues()(0) < -1e-10)
    throw std::invalid_argument(std::string(what) + ": reference state not PSD");
}

}  // namespace

LocalizationChannel maximally_mixed_channel(SupportInterval target,
                                            const ChainGeometry& geo) {
  const SplitDims dims = split_dims(target, geo);
  const long dc = dims.complement();
  return LocalizationChannel{target, Matrix::Identity(dc, dc) / double(dc)};
}

LocalizationChannel ground_reduced_channel(SupportInterval target,
                                           const ChainGeometry& geo,
                                           const Vector& ground_state) {
  const SplitDims dims = split_dims(target, geo);
  if (ground_state.size() != geo.dim())
    throw std::invalid_argument("ground_reduced_channel: state dimension mismatch");
  const long dc = dims.complement();
  Matrix rho = Matrix::Zero(dc, dc);
  // complement index c = il * right + ir; full index (il, s, ir)
  for (long il = 0; il < dims.left; ++il)
    for (long ir = 0; ir < dims.right; ++ir) {
      const long c = il * dims.right + ir;
      for (long jl = 0; jl < dims.left; ++jl)
        for (long jr = 0; jr < dims.right; ++jr) {
          const long cc = jl * dims.right + jr;
          Complex sum(0, 0);
          for (long s = 0; s < dims.target; ++s)
            sum += ground_state((il * dims.target + s) * dims.right + ir) *
                   std::conj(ground_state((jl * dims.target + s) * dims.right + jr));
          rho(c, cc) = sum;
        }
    }
  check_density(rho, "ground_reduced_channel");
  return LocalizationChannel{target, std::move(rho)};
}

LocalizationChannel make_channel(SupportInterval target, const ChainGeometry& geo,
                                 ReferenceState kind, const Vector* ground_state) {
  if (kind == ReferenceState::kMaximallyMixed)
    return maximally_mixed_channel(target, geo);
  if (!ground_state)
    throw std::invalid_argument("make_channel: ground state required for reduced reference");
  return ground_reduced_channel(target, geo, *ground_state);
}

LocalOperator localize(const Matrix& a, const LocalizationChannel& channel,
                       const ChainGeometry& geo) {
  if (a.rows() != geo.dim() || a.cols() != geo.dim())
    throw std::invalid_argument("localize: operator dimension mismatch");
  const SupportInterval target = channel.target;
  if (target.lo < 1 || target.hi > geo.sites())
    throw std::invalid_argument("localize: target outside the chain");
  const SplitDims dims = split_dims(target, geo);
  const long dc = dims.complement();
  if (channel.reference_state.rows() != dc)
    throw std::invalid_argument("localize: reference state dimension mismatch");

  const Matrix& rho = channel.reference_state;
  auto full_index = [&](long c, long s) {
    const long il = c / dims.right;
    const long ir = c % dims.right;
    return (il * dims.target + s) * dims.right + ir;
  };

  Matrix out = Matrix::Zero(dims.target, dims.target);
  for (long xc = 0; xc < dc; ++xc)
    for (long yc = 0; yc < dc; ++yc) {
      const Complex w = rho(yc, xc);
      if (w == Complex(0, 0)) continue;
      for (long s = 0; s < dims.target; ++s) {
        const long row = full_index(xc, s);
        for (long sp = 0; sp < dims.target; ++sp)
          out(s, sp) += w * a(row, full_index(yc, sp));
      }
    }
  return LocalOperator(target, std::move(out), geo.local_dim());
}

LocalOperator restrict_to_support(const Matrix& a, SupportInterval support,
                                  const ChainGeometry& geo) {
  return localize(a, maximally_mixed_channel(support, geo), geo);
}

LocalizedBlocks build_localized_blocks(const NNIHamiltonian& h, const EigenSystem& es,
                                       int j, int l, double q,
                                       const LocalizationOptions& options) {
  const ChainGeometry& geo = h.geo;
  const PartitionedHamiltonian parts = partition(h, j, l);
  const Vector psi0 = es.ground_vector();

  const SupportInterval window_L =
      options.window_L.value_or(clip_interval(j - 2 * l - 2, j, geo));
  const SupportInterval window_B =
      options.window_B.value_or(clip_interval(j - 2 * l - 2, j + 2 * l + 3, geo));
  const SupportInterval window_R =
      options.window_R.value_or(clip_interval(j + 1, j + 2 * l + 3, geo));

  Matrix h_L = recenter(parts.h_left, psi0);
  Matrix h_B = recenter(parts.h_bulk, psi0);
  Matrix h_R = recenter(parts.h_right, psi0);

  Matrix smeared_L = gaussian_smear(es, h_L, q);
  Matrix smeared_B = gaussian_smear(es, h_B, q);
  Matrix smeared_R = gaussian_smear(es, h_R, q);

  auto localize_block = [&](const Matrix& smeared, const Matrix& recentered,
                            SupportInterval window) {
    const LocalizationChannel channel =
        make_channel(window, geo, options.reference, &psi0);
    return localize(smeared - recentered, channel, geo);
  };
  LocalOperator theta_L = localize_block(smeared_L, h_L, window_L);
  LocalOperator theta_B = localize_block(smeared_B, h_B, window_B);
  LocalOperator theta_R = localize_block(smeared_R, h_R, window_R);

  Matrix m_L = h_L + embed(theta_L, geo);
  Matrix m_B = h_B + embed(theta_B, geo);
  Matrix m_R = h_R + embed(theta_R, geo);

  return LocalizedBlocks{std::move(theta_L),   std::move(theta_B),
                         std::move(theta_R),   std::move(m_L),
                         std::move(m_B),       std::move(m_R),
                         std::move(h_L),       std::move(h_B),
                         std::move(h_R),       std::move(smeared_L),
                         std::move(smeared_B), std::move(smeared_R),
                         window_L,             window_B,
                         window_R,             j,
                         l,                    q};
}

LRConeProfile lr_cone_profile(const NNIHamiltonian& h, const EigenSystem& es,
                              const LocalOperator& a,
                              const std::vector<LocalOperator>& probes,
                              const std::vector<double>& times) {
  const ChainGeometry& geo = h.geo;
  LRConeProfile profile;
  profile.times = times;
  profile.distances.reserve(probes.size());
  for (const auto& probe : probes)
    profile.distances.push_back(support_distance(a, probe));
  profile.norms.resize(times.size(), probes.size());

  std::vector<Matrix> embedded;
  embedded.reserve(probes.size());
  for (const auto& probe : probes) embedded.push_back(embed(probe, geo));

  const Matrix a_full = embed(a, geo);
  for (std::size_t ti = 0; ti < times.size(); ++ti) {
    const Matrix at = heisenberg_evolve(es, a_full, times[ti]);
    for (std::size_t pi = 0; pi < probes.size(); ++pi)
      profile.norms(ti, pi) = operator_norm(commutator(at, embedded[pi]));
  }
  return profile;
}

void write_lr_cone_csv(std::ostream& out, const LRConeProfile& profile) {
  out << "time,distance,commutator_norm\n";
  char buf[64];
  for (Eigen::Index ti = 0; ti < profile.norms.rows(); ++ti)
    for (Eigen::Index pi = 0; pi < profile.norms.cols(); ++pi) {
      std::snprintf(buf, sizeof(buf), "%.12g", profile.times[ti]);
      out << buf << ',' << profile.distances[pi] << ',';
      std::snprintf(buf, sizeof(buf), "%.12g", profile.norms(ti, pi));
      out << buf << '\n';
    }
}

LRConstants fit_lr_constants(const LRConeProfile& profile) {
  constexpr double kFloor = 1e-12;
  std::vector<double> dist, time, logval;
  std::set<int> dist_seen;
  std::set<double> time_seen;
  for (Eigen::Index ti = 0; ti < profile.norms.rows(); ++ti)
    for (Eigen::Index pi = 0; pi < profile.norms.cols(); ++pi) {
      const double y = profile.norms(ti, pi);
      if (y <= kFloor) continue;
      dist.push_back(profile.distances[pi]);
      time.push_back(profile.times[ti]);
      logval.push_back(std::log(y));
      dist_seen.insert(profile.distances[pi]);
      time_seen.insert(profile.times[ti]);
    }
  if (logval.empty()) throw std::invalid_argument("fit_lr_constants: degenerate profile");
  if (dist_seen.size() < 3 || time_seen.size() < 3)
    throw std::invalid_argument(
        "fit_lr_constants: need >= 3 distances and >= 3 times with nonzero entries");

  // log y = b0 - b1 * dist + b2 * t, with decay = b1, velocity = b2 / b1.
  const int m = static_cast<int>(logval.size());
  Eigen::MatrixXd design(m, 3);
  Eigen::VectorXd rhs(m);
  for (int i = 0; i < m; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = -dist[i];
    design(i, 2) = time[i];
    rhs(i) = logval[i];
  }
  const Eigen::VectorXd beta = design.colPivHouseholderQr().solve(rhs);

  LRConstants fit;
  fit.prefactor = std::exp(beta(0));
  fit.decay = beta(1);
  fit.velocity = (beta(1) != 0.0) ? beta(2) / beta(1) : 0.0;
  fit.residual = std::sqrt((design * beta - rhs).squaredNorm() / m);
  fit.points_used = m;
  return fit;
}

}  // namespace gsplab
