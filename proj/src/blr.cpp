#include "gsplab/blr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace gsplab {

namespace {

/// Raw (unshifted) Hermitian eigendecomposition used for propagators.
struct Eigenbasis {
  Eigen::VectorXd values;
  Matrix vectors;

  explicit Eigenbasis(const Matrix& h) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
    if (solver.info() != Eigen::Success)
      throw std::runtime_error("Eigenbasis: eigensolver did not converge");
    values = solver.eigenvalues();
    vectors = solver.eigenvectors();
  }

  Vector phases(double t) const {
    return (Complex(0, t) * values.cast<Complex>()).array().exp();
  }

  /// exp(iHt)
  Matrix exp_it(double t) const {
    return vectors * phases(t).asDiagonal() * vectors.adjoint();
  }
};

/// exp(i H t) for a small Hermitian block.
Matrix exp_i_hermitian(const Matrix& h, double t) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("exp_i_hermitian: eigensolver did not converge");
  Vector phases = (Complex(0, t) * solver.eigenvalues().cast<Complex>()).array().exp();
  return solver.eigenvectors() * phases.asDiagonal() * solver.eigenvectors().adjoint();
}

Matrix matrix_power(const Matrix& base, long k) {
  Matrix result = Matrix::Identity(base.rows(), base.cols());
  Matrix factor = base;
  while (k > 0) {
    if (k & 1) result = result * factor;
    k >>= 1;
    if (k > 0) factor = factor * factor;
  }
  return result;
}

}  // namespace

QuadratureGrid gaussian_quadrature_grid(double q, double bandwidth, int min_nodes) {
  if (q <= 0) throw std::invalid_argument("gaussian_quadrature_grid: q must be > 0");
  if (min_nodes < 1)
    throw std::invalid_argument("gaussian_quadrature_grid: need at least one node");

  // Truncate where the Gaussian tail is ~1e-11; space nodes so that aliases
  // of e^{i bandwidth t} land ~1e-9 down the Gaussian in frequency space.
  const double half_width = 7.0 * std::sqrt(q);
  const double step_cap = 2.0 * M_PI / (bandwidth + 6.5 / std::sqrt(q));
  long half = std::max<long>({1, std::lround(std::ceil(half_width / step_cap)),
                              (min_nodes + 1) / 2});
  if (half > 200000)
    throw std::runtime_error("gaussian_quadrature_grid: bandwidth demands too many nodes");
  const double step = half_width / half;

  QuadratureGrid grid;
  grid.nodes.resize(2 * half + 1);
  grid.weights.resize(2 * half + 1);
  const double scale = step / std::sqrt(2.0 * M_PI * q);
  for (long r = -half; r <= half; ++r) {
    const double t = r * step;
    grid.nodes(r + half) = t;
    grid.weights(r + half) =
        scale * std::exp(-t * t / (2.0 * q)) * ((std::abs(r) == half) ? 0.5 : 1.0);
  }
  return grid;
}

Matrix spectral_window(const Matrix& m, double threshold) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("spectral_window: matrix must be square");
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() >
      1e-10 * std::max(1.0, m.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("spectral_window: matrix is not Hermitian");

  Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("spectral_window: eigensolver did not converge");

  std::vector<Eigen::Index> selected;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i)
    if (std::abs(solver.eigenvalues()(i)) <= threshold) selected.push_back(i);
  if (selected.empty()) return Matrix::Zero(m.rows(), m.cols());

  Matrix basis(m.rows(), selected.size());
  for (std::size_t k = 0; k < selected.size(); ++k)
    basis.col(k) = solver.eigenvectors().col(selected[k]);
  // Eigenvector blocks of clustered eigenvalues can lose orthonormality at
  // the 1e-9 level; re-orthonormalize so the projector honors its norm cap.
  const Eigen::HouseholderQR<Matrix> qr(basis);
  basis = qr.householderQ() * Matrix::Identity(m.rows(), selected.size());
  return basis * basis.adjoint();
}

double ThresholdRule::resolve(double psi_residual) const {
  switch (kind) {
    case Kind::kResidualFactor:
      return std::max(value * psi_residual, kFloor);
    case Kind::kAbsolute:
      return value;
    case Kind::kInfinite:
      return std::numeric_limits<double>::infinity();
  }
  throw std::logic_error("ThresholdRule: unknown kind");
}

std::pair<WindowFactor, WindowFactor> build_LR(const LocalizedBlocks& blocks,
                                               const EigenSystem& es,
                                               const ChainGeometry& geo,
                                               const ThresholdRule& rule) {
  const Vector psi0 = es.ground_vector();
  const SupportInterval supp_L{1, blocks.j};
  const SupportInterval supp_R{blocks.j + 1, geo.sites()};

  auto make_factor = [&](const Matrix& m_full, SupportInterval support) {
    const double residual = (m_full * psi0).norm();
    const double tau = rule.resolve(residual);
    const LocalOperator local = restrict_to_support(m_full, support, geo);
    Matrix projector = spectral_window(local.matrix(), tau);
    const int dim = static_cast<int>(std::lround(projector.trace().real()));
    LocalOperator op(support, std::move(projector), geo.local_dim());
    const double psi_residual = (embed(op, geo) * psi0 - psi0).norm();
    return WindowFactor{std::move(op), tau, psi_residual, dim};
  };

  return {make_factor(blocks.m_L, supp_L), make_factor(blocks.m_R, supp_R)};
}

Matrix ordered_unitary(const LocalizedBlocks& blocks, double t) {
  const Eigen::Index dim = blocks.m_L.rows();
  if (t == 0.0) return Matrix::Identity(dim, dim);
  const Eigenbasis sum_basis(blocks.m_L + blocks.m_B + blocks.m_R);
  const Eigenbasis lr_basis(blocks.m_L + blocks.m_R);
  return sum_basis.exp_it(t) * lr_basis.exp_it(-t);
}

Matrix product_integral(const LocalizedBlocks& blocks, const ChainGeometry& geo,
                        double t, int K, bool localized, SupportInterval window,
                        ReferenceState reference, const Vector* ground_state) {
  if (K < 1) throw std::invalid_argument("product_integral: K must be >= 1");
  const Eigen::Index dim = blocks.m_L.rows();
  if (t == 0.0) return Matrix::Identity(dim, dim);

  const Eigenbasis lr_basis(blocks.m_L + blocks.m_R);
  const Matrix g = lr_basis.vectors.adjoint() * blocks.m_B * lr_basis.vectors;
  auto heisenberg_mb = [&](double tau) -> Matrix {
    Matrix rotated = g;
    for (Eigen::Index m = 0; m < rotated.rows(); ++m)
      for (Eigen::Index k = 0; k < rotated.cols(); ++k)
        rotated(m, k) *= std::exp(Complex(0, (lr_basis.values(m) - lr_basis.values(k)) * tau));
    return lr_basis.vectors * rotated * lr_basis.vectors.adjoint();
  };

  const double dt = t / K;
  if (!localized) {
    Matrix product = Matrix::Identity(dim, dim);
    for (int i = 0; i < K; ++i) product = product * exp_i_hermitian(heisenberg_mb(i * dt), dt);
    return product;
  }

  const LocalizationChannel channel = make_channel(window, geo, reference, ground_state);
  const long wdim = geo.dim_of(window.width());
  Matrix product = Matrix::Identity(wdim, wdim);
  for (int i = 0; i < K; ++i) {
    const Matrix gen = localize(heisenberg_mb(i * dt), channel, geo).matrix();
    product = product * exp_i_hermitian(gen, dt);
  }
  return embed(LocalOperator(window, std::move(product), geo.local_dim()), geo);
}

namespace {

/// Cleanup of the quadrature output: Hermitize, clamp to the positive part,
/// rescale to unit norm, recording the size of every correction.
BuildBResult finalize_b(Matrix raw, SupportInterval window, const ChainGeometry& geo) {
  Matrix herm = 0.5 * (raw + raw.adjoint());
  BCorrections corr;
  corr.hermitize = operator_norm(raw - herm);

  Eigen::SelfAdjointEigenSolver<Matrix> solver(herm);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("build_B: eigensolver did not converge");
  Eigen::VectorXd lam = solver.eigenvalues();
  corr.clamp = std::max(0.0, -lam.minCoeff());
  lam = lam.cwiseMax(0.0);

  const double top = lam.maxCoeff();
  corr.rescale = std::max(0.0, top - 1.0);
  if (top > 1.0) lam /= top;

  Matrix cleaned =
      solver.eigenvectors() * lam.asDiagonal() * solver.eigenvectors().adjoint();
  corr.total = operator_norm(raw - cleaned);

  const int n = geo.local_dim();
  return BuildBResult{LocalOperator(window, std::move(cleaned), n),
                      LocalOperator(window, std::move(raw), n), corr};
}

}  // namespace

BuildBResult build_B(const LocalizedBlocks& blocks, const ChainGeometry& geo,
                     double q, int K, SupportInterval window, int quad_nodes,
                     int degeneracy, ReferenceState reference,
                     const Vector* ground_state) {
  if (q < 0) throw std::invalid_argument("build_B: q must be >= 0");
  if (K < 1) throw std::invalid_argument("build_B: K must be >= 1");
  if (degeneracy < 1) throw std::invalid_argument("build_B: degeneracy must be >= 1");

  const long wdim = geo.dim_of(window.width());
  const double inv_n = 1.0 / degeneracy;

  if (q == 0.0) {
    // Gaussian weight collapses to t = 0; the ordered exponential is I.
    return finalize_b(inv_n * Matrix::Identity(wdim, wdim), window, geo);
  }

  const Eigenbasis lr_basis(blocks.m_L + blocks.m_R);
  const Eigenbasis mb_basis(blocks.m_B);
  // Frequencies in the ordered products are differences of block eigenvalues;
  // this covers e^{iSt} e^{-iDt} and the K-step products around it.
  const double bandwidth = 2.0 * lr_basis.values.cwiseAbs().maxCoeff() +
                           2.0 * mb_basis.values.cwiseAbs().maxCoeff();
  const QuadratureGrid grid = gaussian_quadrature_grid(q, bandwidth, quad_nodes);
  const long count = grid.nodes.size();

  const bool full_window = (window.lo == 1 && window.hi == geo.sites());
  Matrix acc = Matrix::Zero(wdim, wdim);

  if (full_window) {
    // Pi is the identity, so each step factor conjugates exp(i M_B dt) by the
    // free propagator and the K-step product telescopes to
    // (exp(i M_B dt) exp(i D dt))^K exp(-i D t); evaluate that exactly.
    const Matrix overlap = mb_basis.vectors.adjoint() * lr_basis.vectors;
    for (long gi = 0; gi < count; ++gi) {
      const double t = grid.nodes(gi);
      Matrix p;
      if (t == 0.0) {
        p = Matrix::Identity(wdim, wdim);
      } else {
        const double dt = t / K;
        const Matrix core = mb_basis.phases(dt).asDiagonal() * overlap *
                            lr_basis.phases(dt).asDiagonal();
        const Matrix step = mb_basis.vectors * core * lr_basis.vectors.adjoint();
        p = matrix_power(step, K);
        p = (p * lr_basis.vectors) * lr_basis.phases(-t).asDiagonal() *
            lr_basis.vectors.adjoint();
      }
      acc += grid.weights(gi) * p;
    }
  } else {
    // Proper sub-window: the product lives on the window, but each generator
    // needs the full-space Heisenberg rotation. Nodes of equal sign share one
    // step grid (sub-steps capped at max|t| / K) so the ordered products
    // extend from node to node instead of restarting at every node.
    const Matrix g = lr_basis.vectors.adjoint() * blocks.m_B * lr_basis.vectors;
    const LocalizationChannel channel =
        make_channel(window, geo, reference, ground_state);

    auto local_generator = [&](double tau) -> Matrix {
      Matrix rotated = g;
      for (Eigen::Index m = 0; m < rotated.rows(); ++m)
        for (Eigen::Index k = 0; k < rotated.cols(); ++k)
          rotated(m, k) *=
              std::exp(Complex(0, (lr_basis.values(m) - lr_basis.values(k)) * tau));
      return localize(lr_basis.vectors * rotated * lr_basis.vectors.adjoint(),
                      channel, geo)
          .matrix();
    };

    const double t_max = grid.nodes(count - 1);
    const double step_cap = t_max / K;
    const long zero_index = (count - 1) / 2;  // grid is symmetric about 0
    acc += grid.weights(zero_index) * Matrix::Identity(wdim, wdim);

    for (int sign : {+1, -1}) {
      double tau = 0.0;
      Matrix product = Matrix::Identity(wdim, wdim);
      for (long offset = 1; offset <= zero_index; ++offset) {
        const double target = grid.nodes(zero_index + sign * offset);
        const long steps = std::max<long>(
            1, std::lround(std::ceil(std::abs(target - tau) / step_cap)));
        const double dt = (target - tau) / steps;
        for (long s = 0; s < steps; ++s)
          product = product * exp_i_hermitian(local_generator(tau + s * dt), dt);
        tau = target;
        acc += grid.weights(zero_index + sign * offset) * product;
      }
    }
  }

  acc *= inv_n;
  return finalize_b(std::move(acc), window, geo);
}

namespace {

/// (1/(N sqrt(2 pi q))) int exp(iSt) exp(-iDt) exp(-t^2/2q) dt on shared
/// eigenbases, bandwidth-resolved quadrature grid.
Matrix ordered_filter(const Eigenbasis& s_basis, const Eigenbasis& d_basis,
                      double q, int quad_nodes, int degeneracy) {
  const Eigen::Index n = s_basis.vectors.rows();
  if (q == 0.0) return Matrix::Identity(n, n) / degeneracy;
  const double bandwidth = s_basis.values.cwiseAbs().maxCoeff() +
                           d_basis.values.cwiseAbs().maxCoeff();
  const QuadratureGrid grid = gaussian_quadrature_grid(q, bandwidth, quad_nodes);
  const Matrix overlap = s_basis.vectors.adjoint() * d_basis.vectors;
  const Eigen::Index dim = overlap.rows();
  Matrix acc = Matrix::Zero(dim, dim);
  for (long gi = 0; gi < grid.nodes.size(); ++gi) {
    const double t = grid.nodes(gi);
    const Matrix core =
        s_basis.phases(t).asDiagonal() * overlap * d_basis.phases(-t).asDiagonal();
    acc += grid.weights(gi) * (s_basis.vectors * core * d_basis.vectors.adjoint());
  }
  return acc / degeneracy;
}

}  // namespace

BLRFactors assemble_blr(const NNIHamiltonian& h, const EigenSystem& es, int j, int l,
                        const BLRConfig& config) {
  const ChainGeometry& geo = h.geo;
  if (es.eigenvectors.rows() != geo.dim())
    throw std::invalid_argument("assemble_blr: eigensystem does not match the chain");

  const double q =
      config.q_override.value_or(config.kappa * 2.0 * l / (es.gap * es.gap));
  if (q < 0) throw std::invalid_argument("assemble_blr: q must be >= 0");

  LocalizationOptions options;
  options.reference = config.reference;
  const LocalizedBlocks blocks = build_localized_blocks(h, es, j, l, q, options);
  const Vector psi0 = es.ground_vector();

  auto [wl, wr] = build_LR(blocks, es, geo, config.threshold);
  const SupportInterval window_b = clip_interval(j - 3 * l - 2, j + 3 * l + 3, geo);
  BuildBResult built = build_B(blocks, geo, q, config.k_steps, window_b,
                               config.quad_nodes, es.degeneracy, config.reference, &psi0);

  const Matrix l_full = embed(wl.op, geo);
  const Matrix r_full = embed(wr.op, geo);
  const Matrix b_full = embed(built.b, geo);
  const Matrix lr = l_full * r_full;
  const Matrix blr = b_full * lr;
  const Matrix p0 = ground_projection(es, ProjectionMode::kTraceNormalized).matrix;

  BLRFactors out{std::move(wl.op), std::move(wr.op), built.b,
                 j,      l,        q,       config.kappa,
                 wl.threshold,     wr.threshold,     built.corrections,
                 0.0,    0.0,      0.0,     {}};
  out.error = operator_norm(p0 - blr);
  out.ordering_gap = operator_norm(blr - lr * b_full);

  // Stage-error audit: an exact telescope from P0 to BLR whose measured terms
  // must dominate the final error.
  const Matrix rho_q = gaussian_filter(es, q);
  const Eigenbasis s_basis(blocks.m_L + blocks.m_B + blocks.m_R);
  const Eigenbasis d_basis(blocks.m_L + blocks.m_R);
  Matrix rho_bar =
      s_basis.vectors *
      ((-0.5 * q * s_basis.values.array().square()).exp() / es.degeneracy)
          .matrix()
          .asDiagonal() *
      s_basis.vectors.adjoint();
  const Matrix b_tilde =
      ordered_filter(s_basis, d_basis, q, config.quad_nodes, es.degeneracy);

  const double s_filter = operator_norm(rho_q - p0);
  const double s_swap = operator_norm(rho_bar - rho_q);
  const double s_window = operator_norm(p0 - p0 * lr);
  const double s_ordered = operator_norm((rho_bar - b_tilde) * lr);
  const double s_localize = operator_norm((b_tilde - embed(built.b_raw, geo)) * lr);
  const double s_positivity = built.corrections.total;
  out.stage_bound = s_filter + s_swap + s_window + s_ordered + s_localize + s_positivity;

  auto add = [&](const char* stage, const char* op, double value,
                 SupportInterval support) {
    out.diagnostics.push_back(StageDiagnostic{stage, op, value, support});
  };
  const SupportInterval whole{1, geo.sites()};
  add("filter", "rho_q", s_filter, whole);
  add("filter_swap", "rho_bar_q", s_swap, whole);
  add("annihilation", "H_L", (blocks.smeared_L * psi0).norm(), whole);
  add("annihilation", "H_B", (blocks.smeared_B * psi0).norm(), whole);
  add("annihilation", "H_R", (blocks.smeared_R * psi0).norm(), whole);
  add("localization", "M_L", operator_norm(blocks.smeared_L - blocks.m_L), blocks.window_L);
  add("localization", "M_B", operator_norm(blocks.smeared_B - blocks.m_B), blocks.window_B);
  add("localization", "M_R", operator_norm(blocks.smeared_R - blocks.m_R), blocks.window_R);
  add("window", "L", wl.psi_residual, out.L.support());
  add("window", "R", wr.psi_residual, out.R.support());
  add("window", "P0LR", s_window, whole);
  add("ordered", "B_tilde", s_ordered, whole);
  add("localize_B", "B_raw", s_localize, window_b);
  add("positivity", "hermitize", built.corrections.hermitize, window_b);
  add("positivity", "clamp", built.corrections.clamp, window_b);
  add("positivity", "rescale", built.corrections.rescale, window_b);
  add("positivity", "total", s_positivity, window_b);
  add("ordering", "LRB", out.ordering_gap, whole);
  add("final", "BLR", out.error, whole);
  return out;
}

void write_stage_csv(std::ostream& out, const BLRFactors& factors) {
  out << "stage,operator,norm_error,support_lo,support_hi\n";
  char buf[64];
  for (const auto& diag : factors.diagnostics) {
    std::snprintf(buf, sizeof(buf), "%.12g", diag.norm_error);
    out << diag.stage << ',' << diag.op << ',' << buf << ',' << diag.support.lo
        << ',' << diag.support.hi << '\n';
  }
}

}  // namespace gsplab
