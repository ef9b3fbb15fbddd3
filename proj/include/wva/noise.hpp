#pragma once

#include <filesystem>
#include <functional>
#include <utility>
#include <variant>
#include <vector>

#include "wva/quantum.hpp"

namespace wva {

/// Xi(t) = exp(-gamma t), Markovian pure dephasing.
struct ExponentialDephasing {
  double gamma = 0.0;
};
/// Xi(t) = exp(-gamma t^2), 1/f-type decay.
struct GaussianDecay {
  double gamma = 0.0;
};
struct ConstantAttenuation {
  double xi = 1.0;
};
/// Linearly interpolated samples with strictly increasing times. Queries
/// outside the table are rejected.
struct TabulatedAttenuation {
  std::vector<std::pair<double, double>> samples;  // (t, xi)
};

using AttenuationModel = std::variant<ExponentialDephasing, GaussianDecay, ConstantAttenuation, TabulatedAttenuation>;

/// Coherence attenuation Xi(t) in [0, 1]. Throws ErrorKind::Domain for
/// t < 0 or a tabulated query out of range.
double xi_eval(const AttenuationModel& model, double t);

/// Reads a two-column CSV with header `t,xi`.
TabulatedAttenuation load_tabulated_csv(const std::filesystem::path& path);
TabulatedAttenuation parse_tabulated_csv(const std::string& text);

// Population laws. The stored population is R = 2 rho_11 in [0, 2]; R = 1
// is the unpolarized main-text case.
struct Unpolarized {
  AttenuationModel attenuation;
};
/// R(t) = exp(-t/T1), Xi(t) = exp(-t/(2 T1)).
struct Relaxation {
  double t1 = 1.0;
};
struct CustomPopulation {
  std::function<double(double)> population;
  std::function<double(double)> attenuation;
};

using PopulationModel = std::variant<Unpolarized, Relaxation, CustomPopulation>;

double population_eval(const PopulationModel& model, double t);
double attenuation_eval(const PopulationModel& model, double t);

/// Throws ErrorKind::Model (naming t) unless Xi^2 <= R (2 - R), which is
/// the determinant condition for the state to be positive.
void check_positivity(double population, double attenuation, double t);

struct SystemState {
  QubitState rho;
  double t = 0.0;
  double delta_b = 0.0;
  double population = 1.0;   // R = 2 rho_11
  double attenuation = 1.0;  // Xi
};

/// rho_11 = R/2, rho_12 = -i exp(-i delta_b t) Xi / 2.
SystemState system_state(double delta_b, double t, const PopulationModel& model);
SystemState system_state(double delta_b, double t, const AttenuationModel& model);

/// Same state built directly from already-evaluated R and Xi.
QubitState system_density(double delta_b, double t, double population, double attenuation);

}  // namespace wva
