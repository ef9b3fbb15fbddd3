#pragma once

// Small dense complex matrices and Hermitian eigensolvers for 2x2 and 4x4
// density operators.

#include <Eigen/Core>
#include <array>
#include <complex>

namespace wva {

using Complex = std::complex<double>;

template <int N>
using Matrix = Eigen::Matrix<Complex, N, N>;
template <int N>
using Vector = Eigen::Matrix<Complex, N, 1>;

using Matrix2 = Matrix<2>;
using Matrix4 = Matrix<4>;
using Vector2 = Vector<2>;
using Vector4 = Vector<4>;

inline constexpr Complex kI{0.0, 1.0};

namespace pauli {
Matrix2 identity();
Matrix2 x();
Matrix2 y();
// |1><1| - |0><0|; the sign convention used for the meter kick.
Matrix2 z_flipped();
}  // namespace pauli

Matrix4 kron(const Matrix2& a, const Matrix2& b);

/// Largest |A(i,j) - conj(A(j,i))| over all entries.
template <int N>
double hermiticity_defect(const Matrix<N>& a) {
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

template <int N>
double max_abs_entry(const Matrix<N>& a) {
  return a.cwiseAbs().maxCoeff();
}

/// Eigen-decomposition of a Hermitian matrix. Eigenvalues are sorted in
/// descending order and eigenvectors are stored as the columns of
/// `vectors`, so that A = V diag(values) V^dagger.
template <int N>
struct HermitianEigen {
  std::array<double, N> values{};
  Matrix<N> vectors = Matrix<N>::Identity();
};

/// Closed-form solve of a 2x2 Hermitian matrix.
HermitianEigen<2> eigh(const Matrix2& a);

/// Cyclic complex Jacobi sweeps on a 4x4 Hermitian matrix. Converges to
/// off-diagonal norm below 1e-15 relative to the Frobenius norm.
HermitianEigen<4> eigh(const Matrix4& a);

}  // namespace wva
