#include <random>

#include "doctest.h"
#include "support.hpp"
#include "wva/noise.hpp"
#include "wva/oracle.hpp"

using namespace wva;
using namespace wva::test;

namespace {

Matrix2 dm(Complex a, Complex b, Complex c, Complex d) {
  Matrix2 m;
  m << a, b, c, d;
  return m;
}

// Analytic field derivative of the direct-sensing state.
Matrix2 direct_drho(double delta_b, double t, double xi) {
  const Complex d12 = -kI * (-kI * t) * std::exp(-kI * delta_b * t) * xi / 2.0;
  return dm(0.0, d12, std::conj(d12), 0.0);
}

template <int N>
double reconstruction_error(const DensityMatrix<N>& rho) {
  const auto sd = spectral_decompose(rho);
  Matrix<N> r = Matrix<N>::Zero();
  for (int k = 0; k < N; ++k) r += sd.probabilities[k] * sd.vectors.col(k) * sd.vectors.col(k).adjoint();
  return max_abs_entry<N>(r - rho.matrix());
}

template <int N>
void check_decomposition(const DensityMatrix<N>& rho) {
  const auto sd = spectral_decompose(rho);
  double sum = 0.0;
  for (int k = 0; k < N; ++k) sum += sd.probabilities[k];
  CHECK(std::abs(sum - 1.0) <= 1e-10);
  for (int k = 0; k + 1 < N; ++k) CHECK(sd.probabilities[k] >= sd.probabilities[k + 1]);
  CHECK(max_abs_entry<N>(sd.vectors.adjoint() * sd.vectors - Matrix<N>::Identity()) <= 1e-10);
  CHECK(reconstruction_error(rho) <= 1e-10);
}

}  // namespace

TEST_CASE("density matrix validation") {
  CHECK_NOTHROW(QubitState::from_matrix(dm(0.5, 0.0, 0.0, 0.5)));
  CHECK_NOTHROW(QubitState::from_matrix(dm(1.0, 0.0, 0.0, 0.0)));

  auto kind_of = [](const Matrix2& m) {
    try {
      QubitState::from_matrix(m);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::Io;
  };
  CHECK(kind_of(dm(0.5, 0.1, 0.2, 0.5)) == ErrorKind::Validation);        // not Hermitian
  CHECK(kind_of(dm(0.6, 0.0, 0.0, 0.5)) == ErrorKind::Validation);        // trace 1.1
  CHECK(kind_of(dm(0.5, 0.6, 0.6, 0.5)) == ErrorKind::Validation);        // eigenvalue -0.1
  CHECK(kind_of(dm(1.1, 0.0, 0.0, -0.1)) == ErrorKind::Validation);       // negative population
  CHECK(kind_of(dm(std::nan(""), 0.0, 0.0, 0.5)) == ErrorKind::Validation);
  // Round-off well inside the tolerance is accepted.
  CHECK_NOTHROW(QubitState::from_matrix(dm(1.0 + 1e-14, 0.0, 0.0, -1e-14)));
}

TEST_CASE("spectral decomposition examples") {
  SUBCASE("maximally mixed") {
    const auto sd = spectral_decompose(QubitState::maximally_mixed());
    CHECK(sd.probabilities[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(sd.probabilities[1] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(max_abs_entry<2>(sd.vectors.adjoint() * sd.vectors - Matrix2::Identity()) <= 1e-12);
  }
  SUBCASE("pure projector") {
    const auto sd = spectral_decompose(QubitState::pure(Vector2(1.0, 0.0)));
    CHECK(sd.probabilities[0] == doctest::Approx(1.0));
    CHECK(std::abs(sd.probabilities[1]) <= 1e-15);
  }
  SUBCASE("dephased state") {
    const double xi = std::exp(-1.0);
    const QubitState rho = system_density(0.3, 1.0, 1.0, xi);
    const auto sd = spectral_decompose(rho);
    CHECK(std::abs(sd.probabilities[0] - (1.0 + xi) / 2.0) <= 1e-14);
    CHECK(std::abs(sd.probabilities[1] - (1.0 - xi) / 2.0) <= 1e-14);
    // Roots of the characteristic polynomial l^2 - l + det.
    const double det = (rho(0, 0) * rho(1, 1) - rho(0, 1) * rho(1, 0)).real();
    const double disc = std::sqrt(1.0 - 4.0 * det);
    CHECK(std::abs(sd.probabilities[0] - (1.0 + disc) / 2.0) <= 1e-14);
    CHECK(std::abs(sd.probabilities[1] - (1.0 - disc) / 2.0) <= 1e-14);
  }
  SUBCASE("non-Hermitian raw input") {
    CHECK_THROWS_AS(spectral_decompose(dm(0.5, 0.1, 0.0, 0.5)), Error);
    Matrix4 m = Matrix4::Identity() / 4.0;
    m(0, 3) = 0.1;
    CHECK_THROWS_AS(spectral_decompose(m), Error);
  }
}

TEST_CASE("spectral reconstruction on random states") {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 1000; ++i) {
    check_decomposition(random_state<2>(rng, 1 + i % 2));
    check_decomposition(random_state<4>(rng, 1 + i % 4));
  }
}

TEST_CASE("spectral QFI") {
  SUBCASE("parameter-independent family") {
    CHECK(qfi_spectral(QubitState::maximally_mixed(), Matrix2::Zero()) == 0.0);
    CHECK(qfi_spectral(TwoQubitState::maximally_mixed(), Matrix4::Zero()) == 0.0);
  }
  SUBCASE("direct family gives Xi^2 t^2") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 200; ++i) {
      const double t = uniform(rng, 0.1, 3.0), xi = uniform(rng, 0.0, 1.0), db = uniform(rng, -2.0, 2.0);
      const double h = qfi_spectral(system_density(db, t, 1.0, xi), direct_drho(db, t, xi));
      CHECK(std::abs(h - xi * xi * t * t) <= 1e-12 * std::max(1.0, t * t));
    }
  }
  SUBCASE("pure-state family keeps only the cross terms") {
    const double t = 1.7;
    CHECK(qfi_spectral(system_density(0.4, t, 1.0, 1.0), direct_drho(0.4, t, 1.0)) ==
          doctest::Approx(t * t).epsilon(1e-12));
  }
  SUBCASE("postselected meter by central difference") {
    const ProtocolConfig cfg = ProtocolConfig::main_text(0.5, 2.0, 0.8, 1.0);
    const double h = 1e-5;
    ProtocolConfig up = cfg, down = cfg;
    up.field += h;
    down.field += -h;
    const Matrix2 drho = (meter_state_simplified(up).eta.matrix() - meter_state_simplified(down).eta.matrix()) / (2 * h);
    const double numeric = qfi_spectral(meter_state_simplified(cfg).eta, drho);
    CHECK(close_rel(numeric, wva_report(cfg).h_wva, 1e-6));
  }
  SUBCASE("non-Hermitian derivative is rejected") {
    Matrix2 bad = Matrix2::Zero();
    bad(0, 1) = 1.0;
    try {
      qfi_spectral(QubitState::maximally_mixed(), bad);
      FAIL("expected a validation error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Validation);
    }
  }
  SUBCASE("4x4 product family adds the factor information") {
    // d/db (rho(b) (x) eta) = drho (x) eta has the QFI of rho(b).
    const double t = 1.3, xi = 0.6;
    const QubitState rho = system_density(0.2, t, 1.0, xi);
    const QubitState eta = QubitState::pure(Vector2(1.0, -kI));
    const TwoQubitState joint = TwoQubitState::from_matrix(kron(rho.matrix(), eta.matrix()));
    const double h = qfi_spectral(joint, kron(direct_drho(0.2, t, xi), eta.matrix()));
    CHECK(h == doctest::Approx(xi * xi * t * t).epsilon(1e-12));
  }
}

TEST_CASE("classical Fisher information") {
  auto sigma_x_family = [](double t, double xi) -> ProbabilityFamily {
    return [=](double b) { return Povm::sigma_x().probabilities(system_density(b, t, 1.0, xi)); };
  };
  SUBCASE("optimal angle reaches Xi^2 t^2") {
    const double t = 2.0, xi = 0.7;
    CHECK(classical_fisher(sigma_x_family(t, xi), 0.0, 1e-5) == doctest::Approx(xi * xi * t * t).epsilon(1e-9));
  }
  SUBCASE("pessimal angle gives zero") {
    for (double xi : {0.5, 0.9, 1.0}) {
      const double t = 1.0;
      CHECK(std::abs(classical_fisher(sigma_x_family(t, xi), kPi / 2.0, 1e-5)) <= 1e-9);
    }
  }
  SUBCASE("no projective basis beats the spectral QFI") {
    std::mt19937_64 rng(99);
    const double t = 1.5, xi = 0.85, b = 0.3;
    for (int i = 0; i < 100; ++i) {
      const Povm povm = Povm::equatorial(uniform(rng, 0.0, 2.0 * kPi));
      ProbabilityFamily fam = [&](double x) { return povm.probabilities(system_density(x, t, 1.0, xi)); };
      CHECK(classical_fisher(fam, b, 1e-5) <= xi * xi * t * t + 1e-8);
    }
  }
  SUBCASE("QFI bounds every POVM over random families") {
    std::mt19937_64 rng(123);
    for (int i = 0; i < 150; ++i) {
      const double t = uniform(rng, 0.1, 3.0), xi = uniform(rng, 0.0, 0.999), b = uniform(rng, -1.0, 1.0);
      // Mixture of two random projective measurements, four outcomes.
      const Matrix2 p1 = random_state<2>(rng, 1).matrix(), p2 = random_state<2>(rng, 1).matrix();
      const double w = uniform(rng, 0.1, 0.9);
      const Povm povm = Povm::from_elements({PovmElement::from_matrix(w * p1),
                                             PovmElement::from_matrix(w * (Matrix2::Identity() - p1)),
                                             PovmElement::from_matrix((1 - w) * p2),
                                             PovmElement::from_matrix((1 - w) * (Matrix2::Identity() - p2))});
      ProbabilityFamily fam = [&](double x) { return povm.probabilities(system_density(x, t, 1.0, xi)); };
      const double f = classical_fisher(fam, b, 1e-5);
      const double h = qfi_spectral(system_density(b, t, 1.0, xi), direct_drho(b, t, xi));
      CHECK(f >= -1e-12);
      CHECK(f <= h + 1e-8);
    }
  }
  SUBCASE("distribution must be normalized") {
    ProbabilityFamily bad = [](double) { return std::vector<double>{0.5, 0.4}; };
    CHECK_THROWS_AS(classical_fisher(bad, 0.0, 1e-5), Error);
  }
  SUBCASE("vanishing outcomes are excluded") {
    ProbabilityFamily fam = [](double x) { return std::vector<double>{0.0, 0.5 + 0.25 * x, 0.5 - 0.25 * x}; };
    const double expected = 0.0625 / 0.5 * 2.0;
    CHECK(classical_fisher(fam, 0.0, 1e-4) == doctest::Approx(expected));
  }
}

TEST_CASE("POVMs") {
  const auto p = Povm::sigma_x().probabilities(QubitState::maximally_mixed());
  REQUIRE(p.size() == 2);
  CHECK(p[0] == doctest::Approx(0.5));
  CHECK(p[1] == doctest::Approx(0.5));
  CHECK_THROWS_AS(Povm::from_elements({PovmElement::from_matrix(Matrix2::Identity() * 0.5)}), Error);
  CHECK_THROWS_AS(PovmElement::from_matrix(dm(1.0, 0.0, 0.0, -0.5)), Error);

  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const auto probs = Povm::equatorial(uniform(rng, 0.0, 6.3)).probabilities(random_state<2>(rng));
    CHECK(probs[0] + probs[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(probs[0] >= 0.0);
    CHECK(probs[1] >= 0.0);
  }
}

TEST_CASE("Kraus channels") {
  CHECK_THROWS_AS(KrausChannel::from_operators({Matrix2::Identity() * 0.9}), Error);
  CHECK_NOTHROW(KrausChannel::from_operators({pauli::x()}));

  SUBCASE("dephasing after precession reproduces the evolved state") {
    std::mt19937_64 rng(8);
    for (int i = 0; i < 100; ++i) {
      const double t = uniform(rng, 0.0, 3.0), xi = uniform(rng, 0.0, 1.0), b = uniform(rng, -2.0, 2.0);
      const QubitState prepared = QubitState::pure(Vector2(1.0, kI));
      Matrix2 u = Matrix2::Identity();
      u(1, 1) = std::exp(kI * b * t);
      const QubitState out =
          KrausChannel::dephasing(xi).apply(QubitState::from_matrix(u * prepared.matrix() * u.adjoint()));
      CHECK(max_abs_entry<2>(out.matrix() - system_density(b, t, 1.0, xi).matrix()) <= 1e-12);
    }
  }
  SUBCASE("trace preserving") {
    std::mt19937_64 rng(9);
    const auto ch = KrausChannel::dephasing(0.3);
    for (int i = 0; i < 50; ++i) CHECK(ch.apply(random_state<2>(rng)).matrix().trace().real() == doctest::Approx(1.0));
  }
}

TEST_CASE("partial trace") {
  std::mt19937_64 rng(17);
  SUBCASE("product states") {
    for (int i = 0; i < 200; ++i) {
      const QubitState a = random_state<2>(rng), b = random_state<2>(rng);
      const QubitState r = partial_trace_system(TwoQubitState::from_matrix(kron(a.matrix(), b.matrix())));
      CHECK(max_abs_entry<2>(r.matrix() - b.matrix()) <= 1e-12);
    }
  }
  SUBCASE("Bell state") {
    const Vector4 bell = Vector4(1.0, 0.0, 0.0, 1.0) / std::sqrt(2.0);
    const QubitState r = partial_trace_system(TwoQubitState::pure(bell));
    CHECK(max_abs_entry<2>(r.matrix() - Matrix2::Identity() / 2.0) <= 1e-15);
  }
  SUBCASE("strong coupling transfers the full direct information") {
    const double t = 1.4, xi = 0.75, b = 0.2;
    ProtocolConfig cfg = ProtocolConfig::main_text(1.0, 0.0, xi, t, b);
    cfg.control_angle = b * t + kPi / 2.0;
    CircuitSpec spec{cfg, NoisePlacement::SystemBeforeCoupling, Readout::Traced};
    const double h = 1e-5;
    const QubitState c = run_circuit(spec, b).eta;
    const Matrix2 d = (run_circuit(spec, b + h).eta.matrix() - run_circuit(spec, b - h).eta.matrix()) / (2 * h);
    CHECK(close_rel(qfi_spectral(c, d), xi * xi * t * t, 1e-8));
  }
}

TEST_CASE("postselection") {
  SUBCASE("strong measurement halves the probability") {
    std::mt19937_64 rng(4);
    for (int i = 0; i < 50; ++i) {
      const auto cfg = ProtocolConfig::main_text(1.0, uniform(rng, 0.0, 2 * kPi), 1.0, uniform(rng, 0.1, 2.0));
      CHECK(std::abs(run_circuit(CircuitSpec{cfg}, cfg.field).q - 0.5) <= 1e-12);
    }
  }
  SUBCASE("antiparallel postselection at G = 0.5") {
    const auto cfg = ProtocolConfig::main_text(0.5, kPi, 1.0, 1.0);
    const double expected = (1.0 - std::cos(kPi / 4.0)) / 2.0;
    CHECK(std::abs(run_circuit(CircuitSpec{cfg}, 0.0).q - expected) <= 1e-12);
    CHECK(expected == doctest::Approx(0.146447).epsilon(1e-6));
    // Direct trace of (|psi_f><psi_f| (x) I) M rho M^dagger.
    const Matrix4 m = measurement_unitary(0.5, cfg.control_angle);
    const Matrix4 joint = m * kron(system_density(0.0, 1.0, 1.0, 1.0).matrix(), initial_meter().matrix()) * m.adjoint();
    const Vector2 f = postselection_vector(cfg.postselection_angle);
    const Complex q = (kron(f * f.adjoint(), Matrix2::Identity()) * joint).trace();
    CHECK(std::abs(q.real() - expected) <= 1e-12);
  }
  SUBCASE("vanishing coupling with parallel postselection") {
    const auto cfg = ProtocolConfig::main_text(1e-7, 0.0, 1.0, 1.0);
    CHECK(run_circuit(CircuitSpec{cfg}, 0.0).q >= 1.0 - 1e-12);
  }
  SUBCASE("both branches sum to one") {
    std::mt19937_64 rng(44);
    for (int i = 0; i < 300; ++i) {
      const auto cfg = random_config(rng);
      const Matrix4 m = measurement_unitary(cfg.strength, cfg.control_angle);
      const TwoQubitState joint = TwoQubitState::from_matrix(
          m * kron(system_density(cfg.field, cfg.time, 1.0, cfg.attenuation).matrix(), initial_meter().matrix()) *
          m.adjoint());
      const double q1 = postselect_system(joint, postselection_vector(cfg.postselection_angle)).probability;
      const double q2 = postselect_system(joint, postselection_vector(cfg.postselection_angle + kPi)).probability;
      CHECK(std::abs(q1 + q2 - 1.0) <= 1e-12);
    }
  }
  SUBCASE("exactly zero probability is an error, tiny probability is flagged") {
    const QubitState eta = initial_meter();
    const TwoQubitState joint = TwoQubitState::from_matrix(kron(QubitState::pure(Vector2(1.0, 0.0)).matrix(), eta.matrix()));
    try {
      postselect_system(joint, Vector2(0.0, 1.0));
      FAIL("expected an undefined-state error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::UndefinedState);
    }
    const Vector2 almost = Vector2(1e-7, 1.0).normalized();
    const auto post = postselect_system(joint, almost);
    CHECK_FALSE(post.defined());
    CHECK(post.probability > 0.0);
    CHECK(post.probability < 1e-12);
  }
  SUBCASE("conditional states stay valid") {
    std::mt19937_64 rng(45);
    for (int i = 0; i < 100; ++i) {
      const auto post = postselect_system(random_state<4>(rng), Vector2(uniform(rng, -1, 1), Complex(0, 1)).normalized());
      REQUIRE(post.defined());
      CHECK(post.state->matrix().trace().real() == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}
