#pragma once

// Brute-force two-qubit simulation of the sensing protocol. Nothing in
// this module evaluates a closed form; it builds the joint state, applies
// the coupling, conditions or traces, and differentiates numerically.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "wva/closed_forms.hpp"
#include "wva/grid.hpp"
#include "wva/noise.hpp"

namespace wva {

enum class NoisePlacement {
  SystemBeforeCoupling,    // system dephased by Xi, meter ideal
  MeterAfterPostselection  // system ideal, meter dephased by Sigma after readout
};

enum class Readout {
  Postselected,  // conditioned on psi_f(theta)
  Orthogonal,    // conditioned on the state orthogonal to psi_f(theta)
  Traced         // system traced out, no postselection
};

struct CircuitSpec {
  ProtocolConfig cfg;
  NoisePlacement placement = NoisePlacement::SystemBeforeCoupling;
  Readout readout = Readout::Postselected;
  /// When set, the system populations and coherence come from this model
  /// at cfg.time instead of (R = 1, Xi = cfg.attenuation).
  std::optional<PopulationModel> population;
};

/// Pi_+ (x) I + Pi_- (x) exp(i G pi sigma_z / 2) with
/// Pi_+ - Pi_- = cos(Theta) sigma_y - sin(Theta) sigma_x.
Matrix4 measurement_unitary(double strength, double control_angle);

/// (|0> + i e^{i angle} |1>) / sqrt(2).
Vector2 postselection_vector(double angle);

/// Meter preparation: the -1 eigenstate of sigma_y.
QubitState initial_meter();

/// System state at `field` built as pure preparation, coherent phase
/// rotation and a dephasing channel (or directly from a population model).
QubitState oracle_system_state(const CircuitSpec& spec, double field);

struct MeterSample {
  QubitState eta;
  double q = 1.0;  // 1 for the traced readout
};

/// Runs the circuit at an arbitrary field value with every experimenter
/// angle held at its configured value.
MeterSample run_circuit(const CircuitSpec& spec, double field);

struct QfiEstimate {
  double value = 0.0;       // step h
  double halved = 0.0;      // step h / 2
  bool consistent = true;   // relative disagreement <= 1e-4
};

/// Spectral QFI of the meter family with central differences of
/// half-width step * max(1, |field|). `step` must lie in [1e-7, 1e-3].
QfiEstimate qfi_numeric(const CircuitSpec& spec, double step = 1e-5);

struct OracleResult {
  MeterState meter;
  double q = 1.0;
  double h_numeric = 0.0;
  std::map<std::string, double> deviations;  // filled by comparisons, empty from simulate_protocol
  std::vector<std::string> warnings;
};

/// Throws ErrorKind::UndefinedState when the postselection probability is
/// below the degeneracy threshold.
OracleResult simulate_protocol(const CircuitSpec& spec, double step = 1e-5);

/// Direct-strategy helpers on the oracle system family.
double h_direct_numeric(const ProtocolConfig& cfg, double step = 1e-5);
double f_direct_numeric(const ProtocolConfig& cfg, const Povm& povm, double step = 1e-5);

/// One closed-form/brute-force pair at a grid point.
struct Comparison {
  std::string quantity;
  double closed = 0.0;
  double numeric = 0.0;
  double deviation = 0.0;
  bool skipped = false;  // degenerate point
};

struct ComparisonOptions {
  double step = 1e-5;
  /// Control-angle offset from the paired value used for the general-angle checks.
  double general_offset = 0.6;
  /// Test hook: closed form of this quantity is scaled by (1 + 1e-3).
  std::string corrupt;
};

/// Evaluates every closed form at `cfg` (main-text angles) and the matching
/// brute-force value.
std::vector<Comparison> compare_point(const ProtocolConfig& cfg, const ComparisonOptions& options = {});

/// Names of the quantities produced by compare_point, in output order.
const std::vector<std::string>& compared_quantities();

struct QuantityStats {
  std::string name;
  double max_deviation = 0.0;
  double sum_deviation = 0.0;
  std::size_t evaluated = 0;
  std::size_t skipped = 0;
  std::size_t failed = 0;
  double mean_deviation() const { return evaluated ? sum_deviation / double(evaluated) : 0.0; }
};

struct GridFailure {
  std::map<std::string, double> point;
  Comparison comparison;
};

struct DeviationReport {
  double tolerance = 1e-6;
  std::size_t points = 0;
  std::size_t degenerate_points = 0;  // points with at least one skipped quantity
  std::vector<QuantityStats> quantities;
  std::vector<GridFailure> failures;  // worst first
  bool passed() const { return failures.empty(); }
  nlohmann::ordered_json to_json(std::size_t max_failures = 20) const;
};

struct VerifyOptions {
  double tolerance = 1e-6;
  unsigned threads = 1;
  ComparisonOptions comparison;
};

/// Grid over (G, theta, xi, delta_b) with fixed or swept t and sigma.
/// Defaults for unspecified t, delta_b, sigma: 1, 0, 1.
DeviationReport verify_closed_forms(const SweepGrid& grid, const VerifyOptions& options = {});

/// The default 10^4-point verification grid.
SweepGrid default_verify_grid();

}  // namespace wva
