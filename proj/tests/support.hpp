#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "wva/closed_forms.hpp"
#include "wva/linalg.hpp"
#include "wva/quantum.hpp"

namespace wva::test {

inline constexpr double kPi = std::numbers::pi;

inline bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(std::abs(b), 1.0e-300);
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

template <int N>
Matrix<N> random_hermitian(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix<N> a;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) a(i, j) = Complex(n(rng), n(rng));
  return 0.5 * (a + a.adjoint());
}

/// Random density matrix G G^dagger / tr, optionally rank deficient.
template <int N>
DensityMatrix<N> random_state(std::mt19937_64& rng, int rank = N) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Matrix<Complex, N, Eigen::Dynamic> g(N, rank);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < rank; ++j) g(i, j) = Complex(n(rng), n(rng));
  Matrix<N> m = g * g.adjoint();
  m /= m.trace().real();
  m = 0.5 * (m + m.adjoint());
  return DensityMatrix<N>::from_matrix(m);
}

/// Uniform random main-text configuration.
inline ProtocolConfig random_config(std::mt19937_64& rng) {
  return ProtocolConfig::main_text(uniform(rng, 0.0, 1.0), uniform(rng, 0.0, 2.0 * kPi), uniform(rng, 0.0, 1.0),
                                   uniform(rng, 0.0, 3.0), uniform(rng, -1.0, 1.0));
}

}  // namespace wva::test
