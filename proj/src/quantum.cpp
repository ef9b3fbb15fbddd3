#include "wva/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace wva {

namespace {

template <int N>
void check_density(const Matrix<N>& m) {
  const double herm = hermiticity_defect<N>(m);
  if (herm > kStateTolerance) {
    std::ostringstream os;
    os << "density matrix is not Hermitian (defect " << herm << ")";
    fail(ErrorKind::Validation, os.str());
  }
  const double trace_error = std::abs(m.trace() - Complex(1.0));
  if (trace_error > kStateTolerance) {
    std::ostringstream os;
    os << "density matrix trace differs from 1 by " << trace_error;
    fail(ErrorKind::Validation, os.str());
  }
  const Matrix<N> sym = 0.5 * (m + m.adjoint());
  const double smallest = eigh(sym).values[N - 1];
  if (smallest < -kStateTolerance) {
    std::ostringstream os;
    os << "density matrix has negative eigenvalue " << smallest;
    fail(ErrorKind::Validation, os.str());
  }
}

template <int N>
SpectralDecomposition<N> decompose(const Matrix<N>& m) {
  const auto e = eigh(Matrix<N>(0.5 * (m + m.adjoint())));
  SpectralDecomposition<N> out;
  out.probabilities = e.values;
  out.vectors = e.vectors;
  return out;
}

template <int N>
double qfi(const DensityMatrix<N>& rho, const Matrix<N>& drho) {
  const double scale = std::max(1.0, max_abs_entry<N>(drho));
  if (hermiticity_defect<N>(drho) > 1e-8 * scale)
    fail(ErrorKind::Validation, "state derivative is not Hermitian");
  const auto spec = decompose<N>(rho.matrix());
  const Matrix<N> d = spec.vectors.adjoint() * (0.5 * (drho + drho.adjoint())) * spec.vectors;
  double h = 0.0;
  for (int n = 0; n < N; ++n) {
    for (int m = 0; m < N; ++m) {
      const double denom = spec.probabilities[n] + spec.probabilities[m];
      if (denom < kDegeneracyThreshold) continue;
      h += 2.0 * std::norm(d(m, n)) / denom;
    }
  }
  return h;
}

}  // namespace

template <int N>
DensityMatrix<N> DensityMatrix<N>::from_matrix(const Matrix<N>& m) {
  if (!m.allFinite()) fail(ErrorKind::Validation, "density matrix has non-finite entries");
  check_density<N>(m);
  return DensityMatrix(Matrix<N>(0.5 * (m + m.adjoint())));
}

template <int N>
DensityMatrix<N> DensityMatrix<N>::pure(const Vector<N>& psi) {
  const double norm = psi.norm();
  if (!(norm > 0.0)) fail(ErrorKind::Validation, "pure state vector is zero");
  const Vector<N> u = psi / norm;
  return DensityMatrix(Matrix<N>(u * u.adjoint()));
}

template class DensityMatrix<2>;
template class DensityMatrix<4>;

SpectralDecomposition<2> spectral_decompose(const QubitState& rho) { return decompose<2>(rho.matrix()); }
SpectralDecomposition<4> spectral_decompose(const TwoQubitState& rho) { return decompose<4>(rho.matrix()); }

SpectralDecomposition<2> spectral_decompose(const Matrix2& rho) {
  if (hermiticity_defect<2>(rho) > kStateTolerance) fail(ErrorKind::Validation, "matrix is not Hermitian");
  return decompose<2>(rho);
}
SpectralDecomposition<4> spectral_decompose(const Matrix4& rho) {
  if (hermiticity_defect<4>(rho) > kStateTolerance) fail(ErrorKind::Validation, "matrix is not Hermitian");
  return decompose<4>(rho);
}

double qfi_spectral(const QubitState& rho, const Matrix2& drho) { return qfi<2>(rho, drho); }
double qfi_spectral(const TwoQubitState& rho, const Matrix4& drho) { return qfi<4>(rho, drho); }

double classical_fisher(const ProbabilityFamily& family, double delta_b, double step) {
  if (!(step > 0.0)) fail(ErrorKind::Domain, "finite-difference step must be positive");
  const auto p = family(delta_b);
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-9) {
    std::ostringstream os;
    os << "outcome probabilities sum to " << total;
    fail(ErrorKind::Validation, os.str());
  }
  const auto up = family(delta_b + step);
  const auto down = family(delta_b - step);
  if (up.size() != p.size() || down.size() != p.size())
    fail(ErrorKind::Validation, "probability family changed its outcome count");
  double f = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] < kPositivityThreshold) continue;
    const double dp = (up[k] - down[k]) / (2.0 * step);
    f += dp * dp / p[k];
  }
  return f;
}

PovmElement PovmElement::from_matrix(const Matrix2& m) {
  if (hermiticity_defect<2>(m) > kStateTolerance) fail(ErrorKind::Validation, "POVM element is not Hermitian");
  if (eigh(Matrix2(0.5 * (m + m.adjoint()))).values[1] < -kStateTolerance)
    fail(ErrorKind::Validation, "POVM element is not positive semidefinite");
  return PovmElement(Matrix2(0.5 * (m + m.adjoint())));
}

Povm Povm::from_elements(std::vector<PovmElement> elements) {
  if (elements.empty()) fail(ErrorKind::Validation, "POVM has no elements");
  Matrix2 sum = Matrix2::Zero();
  for (const auto& e : elements) sum += e.matrix();
  if (max_abs_entry<2>(Matrix2(sum - Matrix2::Identity())) > kStateTolerance)
    fail(ErrorKind::Validation, "POVM elements do not sum to the identity");
  return Povm(std::move(elements));
}

Povm Povm::equatorial(double axis_angle) {
  const Matrix2 n = std::cos(axis_angle) * pauli::x() + std::sin(axis_angle) * pauli::y();
  return from_elements({PovmElement::from_matrix(0.5 * (Matrix2::Identity() + n)),
                        PovmElement::from_matrix(0.5 * (Matrix2::Identity() - n))});
}

std::vector<double> Povm::probabilities(const QubitState& rho) const {
  std::vector<double> p;
  p.reserve(elements_.size());
  for (const auto& e : elements_) p.push_back(std::max(0.0, (rho.matrix() * e.matrix()).trace().real()));
  return p;
}

KrausChannel KrausChannel::from_operators(std::vector<Matrix2> ops) {
  if (ops.empty()) fail(ErrorKind::Validation, "Kraus channel has no operators");
  Matrix2 sum = Matrix2::Zero();
  for (const auto& k : ops) sum += k.adjoint() * k;
  if (max_abs_entry<2>(Matrix2(sum - Matrix2::Identity())) > kStateTolerance)
    fail(ErrorKind::Validation, "Kraus operators are not trace preserving");
  return KrausChannel(std::move(ops));
}

KrausChannel KrausChannel::dephasing(double attenuation) {
  if (!(attenuation >= 0.0 && attenuation <= 1.0)) fail(ErrorKind::Domain, "attenuation must lie in [0, 1]");
  const Matrix2 z = pauli::z_flipped();
  return from_operators({std::sqrt(0.5 * (1.0 + attenuation)) * Matrix2::Identity(),
                         std::sqrt(0.5 * (1.0 - attenuation)) * z});
}

QubitState KrausChannel::apply(const QubitState& rho) const {
  Matrix2 out = Matrix2::Zero();
  for (const auto& k : ops_) out += k * rho.matrix() * k.adjoint();
  return QubitState::from_matrix(out);
}

Matrix2 partial_trace_system(const Matrix4& joint) {
  Matrix2 out = Matrix2::Zero();
  for (int s = 0; s < 2; ++s) out += joint.block<2, 2>(2 * s, 2 * s);
  return out;
}

QubitState partial_trace_system(const TwoQubitState& joint) {
  return QubitState::from_matrix(partial_trace_system(joint.matrix()));
}

Postselection postselect_system(const Matrix4& joint, const Vector2& psi_f) {
  if (std::abs(psi_f.norm() - 1.0) > kStateTolerance) fail(ErrorKind::Validation, "postselection state is not normalized");
  Matrix2 conditional = Matrix2::Zero();
  for (int s = 0; s < 2; ++s)
    for (int r = 0; r < 2; ++r)
      conditional += std::conj(psi_f(s)) * psi_f(r) * joint.block<2, 2>(2 * s, 2 * r);
  Postselection out;
  out.probability = conditional.trace().real();
  if (out.probability == 0.0) fail(ErrorKind::UndefinedState, "postselection probability is exactly zero");
  if (out.probability < kDegeneracyThreshold) return out;
  // Check positivity before dividing by q; afterwards round-off is magnified by 1/q.
  const auto e = eigh(Matrix2(0.5 * (conditional + conditional.adjoint())));
  if (e.values[1] < -kStateTolerance) {
    std::ostringstream os;
    os << "postselected operator has negative eigenvalue " << e.values[1];
    fail(ErrorKind::Validation, os.str());
  }
  Matrix2 diag = Matrix2::Zero();
  for (int k = 0; k < 2; ++k) diag(k, k) = std::max(e.values[k], 0.0);
  const Matrix2 cleaned = e.vectors * diag * e.vectors.adjoint();
  out.state = QubitState::from_matrix(cleaned / cleaned.trace().real());
  return out;
}

Postselection postselect_system(const TwoQubitState& joint, const Vector2& psi_f) {
  return postselect_system(joint.matrix(), psi_f);
}

std::array<double, 3> bloch_vector(const QubitState& rho) {
  const auto& m = rho.matrix();
  return {2.0 * m(0, 1).real(), -2.0 * m(0, 1).imag(), (m(0, 0) - m(1, 1)).real()};
}

}  // namespace wva
