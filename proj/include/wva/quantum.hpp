#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "wva/error.hpp"
#include "wva/linalg.hpp"

namespace wva {

/// Tolerances shared by every state check.
inline constexpr double kStateTolerance = 1e-12;
/// Terms with p_n + p_m below this are dropped from the spectral QFI sum.
inline constexpr double kDegeneracyThreshold = 1e-12;
/// Outcomes with probability below this are dropped from the classical Fisher sum.
inline constexpr double kPositivityThreshold = 1e-12;

/// A validated density operator on an N-dimensional Hilbert space:
/// Hermitian, unit trace and positive semidefinite, each to 1e-12.
template <int N>
class DensityMatrix {
 public:
  /// Throws ErrorKind::Validation when any invariant is violated.
  static DensityMatrix from_matrix(const Matrix<N>& m);
  static DensityMatrix pure(const Vector<N>& psi);
  static DensityMatrix maximally_mixed() { return DensityMatrix(Matrix<N>::Identity() / double(N)); }

  const Matrix<N>& matrix() const noexcept { return m_; }
  Complex operator()(int i, int j) const { return m_(i, j); }

 private:
  explicit DensityMatrix(Matrix<N> m) : m_(std::move(m)) {}
  Matrix<N> m_;
};

using QubitState = DensityMatrix<2>;
using TwoQubitState = DensityMatrix<4>;

template <int N>
struct SpectralDecomposition {
  std::array<double, N> probabilities{};  // descending
  Matrix<N> vectors;                      // column n is |n>
};

SpectralDecomposition<2> spectral_decompose(const QubitState& rho);
SpectralDecomposition<4> spectral_decompose(const TwoQubitState& rho);
/// Raw-matrix entry point; rejects non-Hermitian input.
SpectralDecomposition<2> spectral_decompose(const Matrix2& rho);
SpectralDecomposition<4> spectral_decompose(const Matrix4& rho);

/// Quantum Fisher information 2 sum |<m|drho|n>|^2 / (p_n + p_m) with
/// near-zero denominators dropped. `drho` is the derivative of the state
/// with respect to the field and must be Hermitian.
double qfi_spectral(const QubitState& rho, const Matrix2& drho);
double qfi_spectral(const TwoQubitState& rho, const Matrix4& drho);

/// Outcome distribution as a function of the field.
using ProbabilityFamily = std::function<std::vector<double>(double delta_b)>;

/// Classical Fisher information sum (dp_k)^2 / p_k with central-difference
/// derivatives of half-width `step`.
double classical_fisher(const ProbabilityFamily& family, double delta_b, double step);

class PovmElement {
 public:
  static PovmElement from_matrix(const Matrix2& m);
  const Matrix2& matrix() const noexcept { return m_; }

 private:
  explicit PovmElement(Matrix2 m) : m_(std::move(m)) {}
  Matrix2 m_;
};

/// A complete POVM: elements sum to the identity within 1e-12.
class Povm {
 public:
  static Povm from_elements(std::vector<PovmElement> elements);
  /// Sharp measurement along the equatorial Bloch axis (cos a, sin a, 0).
  static Povm equatorial(double axis_angle);
  static Povm sigma_x() { return equatorial(0.0); }

  const std::vector<PovmElement>& elements() const noexcept { return elements_; }
  std::size_t size() const noexcept { return elements_.size(); }
  /// Born rule; small negative round-off is clamped to zero.
  std::vector<double> probabilities(const QubitState& rho) const;

 private:
  explicit Povm(std::vector<PovmElement> e) : elements_(std::move(e)) {}
  std::vector<PovmElement> elements_;
};

class KrausChannel {
 public:
  /// Throws unless sum K^dagger K = I within 1e-12.
  static KrausChannel from_operators(std::vector<Matrix2> ops);
  /// Phase damping that scales the off-diagonal elements by `attenuation`.
  static KrausChannel dephasing(double attenuation);

  const std::vector<Matrix2>& operators() const noexcept { return ops_; }
  QubitState apply(const QubitState& rho) const;

 private:
  explicit KrausChannel(std::vector<Matrix2> ops) : ops_(std::move(ops)) {}
  std::vector<Matrix2> ops_;
};

/// Traces out the leftmost (system) tensor factor.
QubitState partial_trace_system(const TwoQubitState& joint);
Matrix2 partial_trace_system(const Matrix4& joint);

struct Postselection {
  std::optional<QubitState> state;  // empty when probability < kDegeneracyThreshold
  double probability = 0.0;
  bool defined() const noexcept { return state.has_value(); }
};

/// Conditions the joint state on the system being found in `psi_f`,
/// i.e. applies <psi_f| (x) I on the system slot and renormalizes.
/// Throws ErrorKind::UndefinedState when the probability is exactly zero.
Postselection postselect_system(const TwoQubitState& joint, const Vector2& psi_f);
Postselection postselect_system(const Matrix4& joint, const Vector2& psi_f);

/// Standard Bloch vector (<sigma_x>, <sigma_y>, <sigma_z>).
std::array<double, 3> bloch_vector(const QubitState& rho);

}  // namespace wva
