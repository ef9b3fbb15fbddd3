#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "support.hpp"
#include "wva/noise.hpp"

using namespace wva;
using namespace wva::test;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::Io;
}

}  // namespace

TEST_CASE("attenuation laws") {
  CHECK(xi_eval(ExponentialDephasing{1.0}, 0.0) == 1.0);
  CHECK(xi_eval(ExponentialDephasing{1.0}, 1.0) == doctest::Approx(0.367879).epsilon(1e-6));
  CHECK(xi_eval(ExponentialDephasing{1.0}, 1.0) == std::exp(-1.0));
  CHECK(xi_eval(GaussianDecay{3.0}, 0.0) == 1.0);

  // exp(-0.5) by its Taylor series.
  double series = 0.0, term = 1.0;
  for (int k = 0; k < 30; ++k) {
    series += term;
    term *= -0.5 / double(k + 1);
  }
  CHECK(xi_eval(GaussianDecay{2.0}, 0.5) == doctest::Approx(series).epsilon(1e-15));
  CHECK(xi_eval(ConstantAttenuation{0.3}, 7.0) == 0.3);

  CHECK(kind_of([] { xi_eval(ExponentialDephasing{1.0}, -0.1); }) == ErrorKind::Domain);
  CHECK(kind_of([] { xi_eval(GaussianDecay{1.0}, -1e-9); }) == ErrorKind::Domain);
}

TEST_CASE("attenuation stays in the unit interval") {
  for (double t = 0.0; t <= 20.0; t += 0.01) {
    for (const AttenuationModel& m : {AttenuationModel{ExponentialDephasing{0.7}}, AttenuationModel{GaussianDecay{0.2}},
                                      AttenuationModel{ConstantAttenuation{0.9}}}) {
      const double xi = xi_eval(m, t);
      CHECK((xi >= 0.0 && xi <= 1.0));
    }
  }
}

TEST_CASE("tabulated attenuation") {
  const TabulatedAttenuation table = parse_tabulated_csv("t,xi\n0,1\n1,0.5\n3,0.1\n");
  REQUIRE(table.samples.size() == 3);
  CHECK(xi_eval(table, 0.0) == 1.0);
  CHECK(xi_eval(table, 0.5) == doctest::Approx(0.75));
  CHECK(xi_eval(table, 2.0) == doctest::Approx(0.3));
  CHECK(xi_eval(table, 3.0) == doctest::Approx(0.1));
  CHECK(kind_of([&] { xi_eval(table, 3.0001); }) == ErrorKind::Domain);
  CHECK(kind_of([&] { xi_eval(table, -1.0); }) == ErrorKind::Domain);

  const TabulatedAttenuation late = parse_tabulated_csv("t,xi\n1,0.5\n2,0.4\n");
  CHECK(kind_of([&] { xi_eval(late, 0.5); }) == ErrorKind::Domain);

  SUBCASE("malformed tables") {
    CHECK(kind_of([] { parse_tabulated_csv(""); }) == ErrorKind::Config);
    CHECK(kind_of([] { parse_tabulated_csv("time,xi\n0,1\n"); }) == ErrorKind::Config);
    CHECK(kind_of([] { parse_tabulated_csv("t,xi\n"); }) == ErrorKind::Config);
    CHECK(kind_of([] { parse_tabulated_csv("t,xi\n0,1\n0,0.9\n"); }) == ErrorKind::Config);
    CHECK(kind_of([] { parse_tabulated_csv("t,xi\n0,1\n1,abc\n"); }) == ErrorKind::Config);
    CHECK(kind_of([] { parse_tabulated_csv("t,xi\n0,1.2\n"); }) == ErrorKind::Config);
    CHECK(kind_of([] { parse_tabulated_csv("t,xi\n0\n"); }) == ErrorKind::Config);
  }
  SUBCASE("file round trip") {
    const auto path = std::filesystem::temp_directory_path() / "wva_test_table.csv";
    {
      std::ofstream out(path);
      out << "t,xi\n0,1\n2,0.2\n";
    }
    CHECK(xi_eval(load_tabulated_csv(path), 1.0) == doctest::Approx(0.6));
    std::filesystem::remove(path);
    CHECK(kind_of([&] { load_tabulated_csv(path); }) == ErrorKind::Io);
  }
}

TEST_CASE("system state construction") {
  SUBCASE("initial state is pure with 2 rho_12 = -i") {
    for (const AttenuationModel& m : {AttenuationModel{ExponentialDephasing{2.0}}, AttenuationModel{GaussianDecay{1.0}}}) {
      const SystemState s = system_state(0.7, 0.0, m);
      CHECK(std::abs(2.0 * s.rho(0, 1) - Complex(0.0, -1.0)) <= 1e-15);
      CHECK(spectral_decompose(s.rho).probabilities[0] == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(std::abs(2.0 * system_state(0.3, 0.0, Relaxation{2.0}).rho(0, 1) - Complex(0.0, -1.0)) <= 1e-15);
  }
  SUBCASE("dephased coherence") {
    const SystemState s = system_state(0.0, 1.0, ExponentialDephasing{1.0});
    CHECK(std::abs(2.0 * s.rho(0, 1) - Complex(0.0, -std::exp(-1.0))) <= 1e-15);
    CHECK(s.attenuation == std::exp(-1.0));
    CHECK(s.population == 1.0);
  }
  SUBCASE("relaxation law") {
    const SystemState s = system_state(0.4, 1.0, Relaxation{2.0});
    CHECK(2.0 * s.rho(0, 0).real() == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
    CHECK(std::abs(2.0 * s.rho(0, 1)) == doctest::Approx(std::exp(-0.25)).epsilon(1e-15));
    const auto sd = spectral_decompose(s.rho);
    CHECK(sd.probabilities[1] >= -1e-12);
  }
  SUBCASE("coherence phase follows the field") {
    std::mt19937_64 rng(21);
    for (int i = 0; i < 200; ++i) {
      const double b = uniform(rng, -3, 3), t = uniform(rng, 0, 4), g = uniform(rng, 0, 2);
      const SystemState s = system_state(b, t, ExponentialDephasing{g});
      const Complex expected = -kI * std::exp(-kI * b * t) * std::exp(-g * t);
      CHECK(std::abs(2.0 * s.rho(0, 1) - expected) <= 1e-12);
      CHECK(std::abs(s.rho(0, 1)) == doctest::Approx(std::exp(-g * t) / 2.0).epsilon(1e-14));
    }
  }
}

TEST_CASE("positivity is checked over a dense time grid") {
  const std::vector<PopulationModel> models{Unpolarized{ExponentialDephasing{0.5}}, Unpolarized{GaussianDecay{0.3}},
                                            Unpolarized{ConstantAttenuation{1.0}}, Relaxation{0.7}, Relaxation{5.0}};
  for (const auto& m : models) {
    for (double t = 0.0; t <= 10.0; t += 0.005) {
      const SystemState s = system_state(0.9, t, m);
      CHECK(spectral_decompose(s.rho).probabilities[1] >= -1e-12);
    }
  }
}

TEST_CASE("positivity violations name the time") {
  // Full coherence with a depleted population is not a state.
  const PopulationModel bad = CustomPopulation{[](double t) { return std::exp(-t); }, [](double) { return 1.0; }};
  CHECK_NOTHROW(system_state(0.0, 0.0, bad));
  try {
    system_state(0.0, 0.5, bad);
    FAIL("expected a model error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Model);
    CHECK(std::string(e.what()).find("t = 0.5") != std::string::npos);
  }
  CHECK(kind_of([] { check_positivity(1.0, 1.0 + 1e-6, 0.0); }) == ErrorKind::Model);
  CHECK(kind_of([] { check_positivity(2.5, 0.0, 0.0); }) == ErrorKind::Model);
  CHECK_NOTHROW(check_positivity(1.0, 1.0, 0.0));
  CHECK_NOTHROW(check_positivity(0.5, std::sqrt(0.75), 0.0));
}
