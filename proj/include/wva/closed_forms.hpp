#pragma once

#include "wva/quantum.hpp"

namespace wva {

/// Experimental settings for one run of the protocol. Angles are radians
/// and share the frame of the initial system state: the system Bloch
/// vector sits at angle `field * time`, the control observable at
/// `control_angle` and the postselection state at `postselection_angle`.
/// The gyromagnetic ratio is 1.
struct ProtocolConfig {
  double strength = 1.0;             // G in [0, 1]
  double postselection_angle = 0.0;  // theta
  double control_angle = 0.0;        // Theta
  double field = 0.0;                // delta B
  double time = 1.0;
  double attenuation = 1.0;        // Xi(t) of the system
  double meter_attenuation = 1.0;  // Sigma(t) of the meter

  /// theta - t delta B, the only angle the postselected closed forms see.
  double relative_postselection() const { return postselection_angle - time * field; }
  double phase() const { return time * field; }

  /// Main-text configuration: postselection at `relative_angle` from the
  /// evolved system state and the control observable a quarter turn
  /// ahead of the postselection state.
  static ProtocolConfig main_text(double strength, double relative_angle, double attenuation, double time,
                                  double field = 0.0);

  /// Throws ErrorKind::Domain when a field is out of range or not finite.
  void validate() const;
};

/// Control angle paired with a given postselection angle in the
/// simplified protocol.
double paired_control_angle(double postselection_angle);

/// Below this, denominators of the closed forms count as vanishing.
inline constexpr double kSingularThreshold = 1e-12;

// Direct strategy.
double f_direct(const ProtocolConfig& cfg);
double h_direct(double time, double attenuation);

// Unpostselected ancilla readout.
double h_anc(const ProtocolConfig& cfg);
double h_anc_optimal(const ProtocolConfig& cfg);

struct MeterState {
  QubitState eta;  // eta_11 = 1/2
  Complex coherence() const { return eta(0, 1); }
};

/// Postselected meter state for the paired control angle.
MeterState meter_state_simplified(const ProtocolConfig& cfg);
/// Postselected meter state for independent postselection and control angles.
MeterState meter_state_general(const ProtocolConfig& cfg);

/// QFI of an equatorial qubit with x + i y = 2 eta_12 and field
/// derivatives (dx, dy). Near-pure inputs use the pure-state limit.
double qfi_equatorial(double x, double y, double dx, double dy);

/// All postselected-strategy quantities for one configuration, evaluated
/// with the paired control angle. Quantities that divide by a vanishing
/// denominator are NaN and the corresponding flag is cleared.
struct WvaReport {
  double a_factor = 0.0;
  double q = 0.0;
  double h_d = 0.0;
  double h_anc = 0.0;  // optimized control angle
  double h_wva = 0.0;
  double q_h_wva = 0.0;
  double h_perp = 0.0;
  double weighted_h_perp = 0.0;  // (1 - q) H_perp
  double h_total = 0.0;
  double ratio_direct = 0.0;  // q H_wva / H_d
  double ratio_anc = 0.0;     // q H_wva / H_anc
  bool postselected_defined = true;
  bool orthogonal_defined = true;
};

WvaReport wva_report(const ProtocolConfig& cfg);

/// q H_wva / H_d at theta - t delta B = pi, including the removable point
/// G = 0, Xi = 1 where it tends to 1.
double ratio_direct_antiparallel(double strength, double attenuation);

/// Noiseless system read out through a meter whose coherences decay by
/// Sigma after the postselection.
struct NoisyMeterReport {
  double h_anc_tilde = 0.0;
  double h_wva_tilde = 0.0;
  double q_h_wva_tilde = 0.0;
  double q = 0.0;
  bool defined = true;
};

NoisyMeterReport noisy_meter_report(const ProtocolConfig& cfg);

}  // namespace wva
