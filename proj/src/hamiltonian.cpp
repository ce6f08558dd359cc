#include "gsplab/hamiltonian.hpp"

#include <fstream>
#include <istream>
#include <random>
#include <sstream>

namespace gsplab {

namespace {

Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

Matrix random_hermitian_unit_norm(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix g(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) g(i, j) = Complex(gauss(rng), gauss(rng));
  Matrix h = 0.5 * (g + g.adjoint());
  const double norm = operator_norm(h);
  if (norm > 0) h /= norm;
  return h;
}

void check_terms(const NNIHamiltonian& h) {
  const int d = h.geo.sites();
  if (static_cast<int>(h.site_terms.size()) != d)
    throw std::invalid_argument("NNIHamiltonian: expected one site term per site");
  if (static_cast<int>(h.interaction_terms.size()) != d - 1)
    throw std::invalid_argument("NNIHamiltonian: expected one interaction per bond");
}

}  // namespace

NNIHamiltonian build_tfim(int d, double coupling, double field, long dim_cap) {
  if (d < 3) throw std::invalid_argument("build_tfim: need at least 3 sites");
  ChainGeometry geo(d, 2, dim_cap);
  const Matrix sx = pauli_x();
  const Matrix zz = kron(pauli_z(), pauli_z());

  NNIHamiltonian h{geo, {}, {}};
  for (int j = 1; j <= d; ++j)
    h.site_terms.emplace_back(SupportInterval{j, j}, Matrix(-field * sx), 2);
  for (int k = 1; k <= d - 1; ++k)
    h.interaction_terms.emplace_back(SupportInterval{k, k + 1},
                                     Matrix(-coupling * zz), 2);
  for (auto& t : h.site_terms) t.declare_hermitian();
  for (auto& t : h.interaction_terms) t.declare_hermitian();
  return h;
}

NNIHamiltonian build_random_chain(int d, int n, std::uint64_t seed, long dim_cap) {
  if (d < 3) throw std::invalid_argument("build_random_chain: need at least 3 sites");
  ChainGeometry geo(d, n, dim_cap);
  std::mt19937_64 rng(seed);

  NNIHamiltonian h{geo, {}, {}};
  for (int j = 1; j <= d; ++j)
    h.site_terms.emplace_back(SupportInterval{j, j},
                              random_hermitian_unit_norm(n, rng), n);
  for (int k = 1; k <= d - 1; ++k)
    h.interaction_terms.emplace_back(SupportInterval{k, k + 1},
                                     random_hermitian_unit_norm(n * n, rng), n);
  for (auto& t : h.site_terms) t.declare_hermitian();
  for (auto& t : h.interaction_terms) t.declare_hermitian();
  return h;
}

NNIHamiltonian build_free_chain(int d, int n, long dim_cap) {
  if (d < 3) throw std::invalid_argument("build_free_chain: need at least 3 sites");
  ChainGeometry geo(d, n, dim_cap);
  Matrix number = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) number(i, i) = i;

  NNIHamiltonian h{geo, {}, {}};
  for (int j = 1; j <= d; ++j)
    h.site_terms.emplace_back(SupportInterval{j, j}, number, n);
  for (int k = 1; k <= d - 1; ++k)
    h.interaction_terms.emplace_back(SupportInterval{k, k + 1},
                                     Matrix(Matrix::Zero(n * n, n * n)), n);
  return h;
}

LocalOperator bond_term(const NNIHamiltonian& h, int k) {
  check_terms(h);
  const int d = h.geo.sites();
  if (k < 1 || k > d - 1) throw std::invalid_argument("bond_term: bond index out of range");

  const int n = h.geo.local_dim();
  const Matrix eye = Matrix::Identity(n, n);
  const double left_share = (k == 1) ? 1.0 : 0.5;
  const double right_share = (k + 1 == d) ? 1.0 : 0.5;

  Matrix m = h.interaction_terms[k - 1].matrix();
  m += left_share * kron(h.site_terms[k - 1].matrix(), eye);
  m += right_share * kron(eye, h.site_terms[k].matrix());
  return LocalOperator(SupportInterval{k, k + 1}, std::move(m), n);
}

Matrix assemble(const NNIHamiltonian& h) {
  check_terms(h);
  const long dim = h.geo.dim();
  Matrix out = Matrix::Zero(dim, dim);
  for (int k = 1; k <= h.geo.sites() - 1; ++k)
    out += embed(bond_term(h, k), h.geo);
  return out;
}

double interaction_strength(const NNIHamiltonian& h) {
  check_terms(h);
  const int n = h.geo.local_dim();
  const Matrix eye = Matrix::Identity(n, n);
  double j_max = 0.0;
  for (int k = 1; k <= h.geo.sites() - 1; ++k) {
    const Matrix& phi = h.interaction_terms[k - 1].matrix();
    const Matrix left = kron(h.site_terms[k - 1].matrix(), eye);
    const Matrix right = kron(eye, h.site_terms[k].matrix());
    j_max = std::max(j_max, operator_norm(phi));
    j_max = std::max(j_max, operator_norm(commutator(phi, right)));
    j_max = std::max(j_max, operator_norm(commutator(left, phi)));
  }
  return j_max;
}

PartitionedHamiltonian partition(const NNIHamiltonian& h, int j, int l) {
  check_terms(h);
  const int d = h.geo.sites();
  if (l < 0) throw std::invalid_argument("partition: l must be >= 0");
  if (j < 1 + l || j > d - 2 - l)
    throw std::invalid_argument("partition: (j, l) outside the admissibility window 1+l <= j <= d-2-l");

  const long dim = h.geo.dim();
  PartitionedHamiltonian p;
  p.j = j;
  p.l = l;
  p.h_left = Matrix::Zero(dim, dim);
  p.h_bulk = Matrix::Zero(dim, dim);
  p.h_right = Matrix::Zero(dim, dim);

  for (int k = 1; k <= d - 1; ++k) {
    const Matrix term = embed(bond_term(h, k), h.geo);
    if (k <= j - l - 2)
      p.h_left += term;
    else if (k <= j + l + 1)
      p.h_bulk += term;
    else
      p.h_right += term;
  }

  p.left_empty = (j - l - 2) < 1;
  p.right_empty = (j + l + 2) > d - 1;
  p.left_support = p.left_empty ? SupportInterval{1, 1}
                                : SupportInterval{1, j - l - 1};
  p.bulk_support = clip_interval(j - l - 1, j + l + 2, h.geo);
  p.right_support = p.right_empty ? SupportInterval{d, d}
                                  : SupportInterval{j + l + 2, d};
  return p;
}

Matrix recenter(const Matrix& block, const Vector& ground_state) {
  if (block.rows() != block.cols() || block.rows() != ground_state.size())
    throw std::invalid_argument("recenter: dimension mismatch");
  if (std::abs(ground_state.norm() - 1.0) > 1e-8)
    throw std::invalid_argument("recenter: ground state is not normalized");
  const double expectation = std::real(ground_state.dot(block * ground_state));
  Matrix out = block;
  out.diagonal().array() -= expectation;
  return out;
}

ModelSpec parse_model_spec(std::istream& in) {
  ModelSpec spec;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    // trim
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);

    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("model spec line " + std::to_string(lineno) +
                                  ": expected key=value");
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    auto strip = [](std::string& s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      s = (b == std::string::npos) ? "" : s.substr(b, e - b + 1);
    };
    strip(key);
    strip(value);

    try {
      if (key == "model") spec.model = value;
      else if (key == "d") spec.d = std::stoi(value);
      else if (key == "n") spec.n = std::stoi(value);
      else if (key == "coupling") spec.coupling = std::stod(value);
      else if (key == "field") spec.field = std::stod(value);
      else if (key == "seed") spec.seed = std::stoull(value);
      else
        throw std::invalid_argument("unknown key '" + key + "'");
    } catch (const std::invalid_argument&) {
      throw;
    } catch (const std::exception&) {
      throw std::invalid_argument("model spec line " + std::to_string(lineno) +
                                  ": bad value for '" + key + "'");
    }
  }
  if (spec.model != "tfim" && spec.model != "random" && spec.model != "free")
    throw std::invalid_argument("model spec: model must be tfim, random or free");
  return spec;
}

ModelSpec load_model_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("load_model_spec: cannot open " + path);
  return parse_model_spec(in);
}

NNIHamiltonian build_model(const ModelSpec& spec, long dim_cap) {
  if (spec.model == "tfim") return build_tfim(spec.d, spec.coupling, spec.field, dim_cap);
  if (spec.model == "random") return build_random_chain(spec.d, spec.n, spec.seed, dim_cap);
  if (spec.model == "free") return build_free_chain(spec.d, spec.n, dim_cap);
  throw std::invalid_argument("build_model: unknown model '" + spec.model + "'");
}

}  // namespace gsplab
