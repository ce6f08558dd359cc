#include <doctest.h>

#include "gsplab/chain.hpp"
#include "oracles.hpp"

using namespace gsplab;

namespace {

Matrix sigma_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Matrix sigma_y() {
  Matrix m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}

Matrix sigma_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

}  // namespace

TEST_CASE("chain geometry validates its invariants") {
  CHECK_THROWS_AS(ChainGeometry(1, 2), std::invalid_argument);
  CHECK_THROWS_AS(ChainGeometry(4, 1), std::invalid_argument);
  CHECK_THROWS_AS(ChainGeometry(13, 2), std::invalid_argument);  // 8192 > cap
  CHECK(ChainGeometry(12, 2).dim() == 4096);
  CHECK(ChainGeometry(13, 2, 1 << 13).dim() == 8192);
  CHECK(ChainGeometry(4, 3).dim_of(2) == 9);
}

TEST_CASE("interval clipping is explicit") {
  ChainGeometry geo(6, 2);
  CHECK(clip_interval(-3, 4, geo) == SupportInterval{1, 4});
  CHECK(clip_interval(5, 99, geo) == SupportInterval{5, 6});
  CHECK_THROWS_AS(clip_interval(7, 9, geo), std::invalid_argument);
}

TEST_CASE("local operator checks dimensions and cached flags") {
  CHECK_THROWS_AS(LocalOperator(SupportInterval{1, 2}, Matrix::Identity(3, 3), 2),
                  std::invalid_argument);
  LocalOperator x(SupportInterval{1, 1}, sigma_x(), 2);
  CHECK(x.is_hermitian());
  CHECK(x.is_unitary());
  LocalOperator skew(SupportInterval{1, 1}, Matrix(Complex(0, 1) * sigma_x()), 2);
  CHECK(!skew.is_hermitian());
  CHECK_THROWS_AS(skew.declare_hermitian(), std::invalid_argument);
}

TEST_CASE("embed places identity and single-site operators") {
  ChainGeometry geo4(4, 2);
  LocalOperator id23(SupportInterval{2, 3}, Matrix::Identity(4, 4), 2);
  CHECK((embed(id23, geo4) - Matrix::Identity(16, 16)).cwiseAbs().maxCoeff() == 0.0);

  ChainGeometry geo2(2, 2);
  LocalOperator z1(SupportInterval{1, 1}, sigma_z(), 2);
  Matrix expected = Matrix::Zero(4, 4);
  expected.diagonal() << 1, 1, -1, -1;
  CHECK((embed(z1, geo2) - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("embed agrees with the Kronecker oracle and factorizes") {
  ChainGeometry geo(4, 2);
  const Matrix a = oracles::random_matrix(4, 4, 11);
  const Matrix b = oracles::random_matrix(4, 4, 12);

  const Matrix ea = embed(LocalOperator(SupportInterval{1, 2}, a, 2), geo);
  CHECK((ea - oracles::embed_by_kron(a, 1, 2, 4, 2)).cwiseAbs().maxCoeff() < 1e-14);

  const Matrix eb = embed(LocalOperator(SupportInterval{3, 4}, b, 2), geo);
  const Matrix joint = embed(LocalOperator(SupportInterval{1, 4}, kron(a, b), 2), geo);
  CHECK((ea * eb - joint).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("embed is an algebra homomorphism on a fixed support") {
  ChainGeometry geo(4, 2);
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const Matrix a = oracles::random_matrix(4, 4, 100 + seed);
    const Matrix b = oracles::random_matrix(4, 4, 200 + seed);
    const SupportInterval s{2, 3};
    const Matrix ea = embed(LocalOperator(s, a, 2), geo);
    const Matrix eb = embed(LocalOperator(s, b, 2), geo);
    const Matrix eab = embed(LocalOperator(s, Matrix(a * b), 2), geo);
    CHECK((ea * eb - eab).cwiseAbs().maxCoeff() < 1e-12);
    const Matrix ead = embed(LocalOperator(s, Matrix(a.adjoint()), 2), geo);
    CHECK((ea.adjoint() - ead).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("embed rejects bad supports") {
  ChainGeometry geo(4, 2);
  LocalOperator op(SupportInterval{3, 5}, Matrix::Identity(8, 8), 2);
  CHECK_THROWS_AS(embed(op, geo), std::invalid_argument);
}

TEST_CASE("support distance matches the reference examples") {
  CHECK(support_distance(SupportInterval{2, 3}, SupportInterval{3, 4}) == 0);
  CHECK(support_distance(SupportInterval{1, 2}, SupportInterval{4, 5}) == 2);
  CHECK(support_distance(SupportInterval{1, 1}, SupportInterval{1, 1}) == 0);
  // symmetry over a small grid of intervals
  for (int alo = 1; alo <= 5; ++alo)
    for (int ahi = alo; ahi <= 5; ++ahi)
      for (int blo = 1; blo <= 5; ++blo)
        for (int bhi = blo; bhi <= 5; ++bhi) {
          SupportInterval a{alo, ahi}, b{blo, bhi};
          CHECK(support_distance(a, b) == support_distance(b, a));
        }
}

TEST_CASE("commutator basics") {
  const Matrix a = oracles::random_matrix(4, 4, 3);
  CHECK(commutator(a, a).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(commutator(a, Matrix(Matrix::Identity(4, 4))).cwiseAbs().maxCoeff() < 1e-14);
  const Matrix zy = commutator(sigma_z(), sigma_x());
  CHECK((zy - Matrix(Complex(0, 2) * sigma_y())).cwiseAbs().maxCoeff() < 1e-14);
  CHECK_THROWS_AS(commutator(sigma_z(), Matrix(Matrix::Identity(4, 4))),
                  std::invalid_argument);
}

TEST_CASE("operator norm is the largest singular value") {
  CHECK(operator_norm(Matrix(Matrix::Identity(5, 5))) == doctest::Approx(1.0));
  Matrix d = Matrix::Zero(2, 2);
  d.diagonal() << -3, 2;
  CHECK(operator_norm(d) == doctest::Approx(3.0));

  const Matrix xz = kron(sigma_x(), sigma_z());
  CHECK(operator_norm(xz) == doctest::Approx(oracles::spectral_norm(xz)).epsilon(1e-12));
  CHECK(operator_norm(xz) == doctest::Approx(1.0));

  Matrix bad = Matrix::Zero(2, 2);
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(operator_norm(bad), std::invalid_argument);
}

TEST_CASE("operator norm is multiplicative over tensor factors") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const Matrix a = oracles::random_matrix(3, 3, 300 + seed);
    const Matrix b = oracles::random_matrix(4, 4, 400 + seed);
    CHECK(operator_norm(kron(a, b)) ==
          doctest::Approx(operator_norm(a) * operator_norm(b)).epsilon(1e-10));
  }
}
