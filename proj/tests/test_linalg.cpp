#include <Eigen/Eigenvalues>
#include <random>

#include "doctest.h"
#include "support.hpp"

using namespace wva;
using namespace wva::test;

namespace {

template <int N>
void check_against_eigen(const Matrix<N>& a) {
  const auto ours = eigh(a);
  Eigen::SelfAdjointEigenSolver<Matrix<N>> ref(a);
  const double scale = std::max(1.0, a.norm());
  for (int k = 0; k < N; ++k) {
    // Eigen sorts ascending.
    CHECK(std::abs(ours.values[k] - ref.eigenvalues()(N - 1 - k)) <= 1e-12 * scale);
  }
  for (int k = 0; k + 1 < N; ++k) CHECK(ours.values[k] >= ours.values[k + 1]);

  Matrix<N> d = Matrix<N>::Zero();
  for (int k = 0; k < N; ++k) d(k, k) = ours.values[k];
  CHECK(max_abs_entry<N>(ours.vectors * d * ours.vectors.adjoint() - a) <= 1e-12 * scale);
  CHECK(max_abs_entry<N>(ours.vectors.adjoint() * ours.vectors - Matrix<N>::Identity()) <= 1e-12);
}

}  // namespace

TEST_CASE("pauli matrices") {
  CHECK(max_abs_entry<2>(pauli::x() * pauli::x() - Matrix2::Identity()) == 0.0);
  CHECK(max_abs_entry<2>(pauli::y() * pauli::y() - Matrix2::Identity()) == 0.0);
  CHECK(max_abs_entry<2>(pauli::x() * pauli::y() - kI * Matrix2(pauli::z_flipped() * -1.0)) < 1e-15);
  CHECK(pauli::z_flipped()(0, 0).real() == -1.0);
  CHECK(pauli::z_flipped()(1, 1).real() == 1.0);
}

TEST_CASE("kron places the left factor in the outer blocks") {
  Matrix2 a;
  a << 1.0, 2.0, 3.0, 4.0;
  const Matrix4 k = kron(a, pauli::x());
  CHECK(k(0, 1) == Complex(1.0));
  CHECK(k(0, 3) == Complex(2.0));
  CHECK(k(2, 1) == Complex(3.0));
  CHECK(k(3, 2) == Complex(4.0));
  CHECK(k(0, 0) == Complex(0.0));
}

TEST_CASE("2x2 closed-form eigensolver matches Eigen") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 1000; ++i) check_against_eigen<2>(random_hermitian<2>(rng));
  check_against_eigen<2>(Matrix2::Identity());
  check_against_eigen<2>(Matrix2::Zero());
  check_against_eigen<2>(pauli::y());
  Matrix2 diag = Matrix2::Zero();
  diag(1, 1) = 3.0;
  check_against_eigen<2>(diag);
}

TEST_CASE("4x4 Jacobi eigensolver matches Eigen") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 1000; ++i) check_against_eigen<4>(random_hermitian<4>(rng));

  SUBCASE("degenerate spectra") {
    check_against_eigen<4>(Matrix4::Identity());
    check_against_eigen<4>(kron(pauli::x(), pauli::x()));
    check_against_eigen<4>(kron(pauli::y(), Matrix2::Identity()));
    Vector4 v(1.0, kI, 0.0, -1.0);
    v.normalize();
    check_against_eigen<4>(v * v.adjoint());
  }
  SUBCASE("tiny and large scales") {
    const Matrix4 a = random_hermitian<4>(rng);
    check_against_eigen<4>(1e-9 * a);
    check_against_eigen<4>(1e6 * a);
  }
}

TEST_CASE("hermiticity defect") {
  Matrix2 a = pauli::y();
  CHECK(hermiticity_defect<2>(a) == 0.0);
  a(0, 1) += 1e-3;
  CHECK(hermiticity_defect<2>(a) == doctest::Approx(1e-3));
}
