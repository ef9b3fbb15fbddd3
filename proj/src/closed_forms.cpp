#include "wva/closed_forms.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace wva {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Trig {
  double c;  // cos(G pi / 2)
  double s;  // sin(G pi / 2)
};

Trig strength_trig(double strength) { return {std::cos(strength * kPi / 2.0), std::sin(strength * kPi / 2.0)}; }

void require_unit(const char* name, double v) {
  if (!(std::isfinite(v) && v >= 0.0 && v <= 1.0)) {
    std::ostringstream os;
    os << name << " must lie in [0, 1] (got " << v << ")";
    fail(ErrorKind::Domain, os.str());
  }
}

MeterState meter_from_coherence(Complex eta12) {
  Matrix2 m;
  m << 0.5, eta12, std::conj(eta12), 0.5;
  return MeterState{QubitState::from_matrix(m)};
}

}  // namespace

double paired_control_angle(double postselection_angle) { return postselection_angle + kPi / 2.0; }

ProtocolConfig ProtocolConfig::main_text(double strength, double relative_angle, double attenuation, double time,
                                         double field) {
  ProtocolConfig cfg;
  cfg.strength = strength;
  cfg.attenuation = attenuation;
  cfg.time = time;
  cfg.field = field;
  cfg.postselection_angle = relative_angle + time * field;
  cfg.control_angle = paired_control_angle(cfg.postselection_angle);
  return cfg;
}

void ProtocolConfig::validate() const {
  require_unit("measurement strength G", strength);
  require_unit("attenuation Xi", attenuation);
  require_unit("meter attenuation Sigma", meter_attenuation);
  if (!(std::isfinite(time) && time >= 0.0)) fail(ErrorKind::Domain, "time must be finite and non-negative");
  if (!std::isfinite(field) || !std::isfinite(postselection_angle) || !std::isfinite(control_angle))
    fail(ErrorKind::Domain, "angles and field must be finite");
}

double f_direct(const ProtocolConfig& cfg) {
  cfg.validate();
  const double phase = cfg.phase();
  const double xi2 = cfg.attenuation * cfg.attenuation;
  const double sin_phase = std::sin(phase);
  const double denom = 1.0 - xi2 * sin_phase * sin_phase;
  if (denom <= kSingularThreshold) fail(ErrorKind::Singular, "direct Fisher information is singular (pure state at pessimal angle)");
  const double cos_phase = std::cos(phase);
  return cfg.time * cfg.time * cos_phase * cos_phase * xi2 / denom;
}

double h_direct(double time, double attenuation) {
  if (!(time >= 0.0)) fail(ErrorKind::Domain, "time must be non-negative");
  return attenuation * attenuation * time * time;
}

double h_anc(const ProtocolConfig& cfg) {
  cfg.validate();
  const auto [c, s] = strength_trig(cfg.strength);
  const double offset = cfg.control_angle - cfg.phase();
  const double xi2 = cfg.attenuation * cfg.attenuation;
  const double cos_off = std::cos(offset);
  const double denom = 1.0 - xi2 * cos_off * cos_off;
  if (denom <= kSingularThreshold) fail(ErrorKind::Singular, "ancilla QFI is singular (control observable parallel to a pure state)");
  const double sin_off = std::sin(offset);
  return xi2 * cfg.time * cfg.time * s * s * sin_off * sin_off / denom;
}

double h_anc_optimal(const ProtocolConfig& cfg) {
  cfg.validate();
  const double s = strength_trig(cfg.strength).s;
  return h_direct(cfg.time, cfg.attenuation) * s * s;
}

MeterState meter_state_simplified(const ProtocolConfig& cfg) {
  cfg.validate();
  const auto [c, s] = strength_trig(cfg.strength);
  const double rel = cfg.relative_postselection();
  const double xi = cfg.attenuation;
  const double denom = 2.0 + 2.0 * xi * c * std::cos(rel);
  if (denom <= 2.0 * kSingularThreshold) fail(ErrorKind::UndefinedState, "postselected meter state is undefined (q -> 0)");
  const Complex numer = std::exp(-0.5 * kI * kPi * cfg.strength) *
                        Complex(xi * s * std::sin(rel), c + xi * std::cos(rel));
  return meter_from_coherence(numer / denom);
}

MeterState meter_state_general(const ProtocolConfig& cfg) {
  cfg.validate();
  const auto [c, s] = strength_trig(cfg.strength);
  const double quarter_c = std::cos(cfg.strength * kPi / 4.0);
  const double quarter_s = std::sin(cfg.strength * kPi / 4.0);
  const double cc = quarter_c * quarter_c;
  const double ss = quarter_s * quarter_s;
  const double theta = cfg.postselection_angle;
  const double control = cfg.control_angle;
  const double phase = cfg.phase();
  const double xi = cfg.attenuation;

  const double aligned = std::cos(theta - phase);
  const double mirrored = std::cos(theta - 2.0 * control + phase);
  const double denom = 8.0 + 8.0 * (cc * aligned + mirrored * ss) * xi;
  if (denom <= 8.0 * kSingularThreshold) fail(ErrorKind::UndefinedState, "postselected meter state is undefined (q -> 0)");

  const Complex bracket = c + kI * std::cos(theta - control) * s +
                          (cc * aligned - mirrored * ss + kI * std::cos(control - phase) * s) * xi;
  const Complex numer = 4.0 * kI * std::exp(-0.5 * kI * cfg.strength * kPi) * bracket;
  return meter_from_coherence(numer / denom);
}

double qfi_equatorial(double x, double y, double dx, double dy) {
  const double r2 = x * x + y * y;
  if (r2 > 1.0 + 1e-12) fail(ErrorKind::Domain, "equatorial Bloch vector longer than 1");
  if (1.0 - r2 < 1e-9) return dx * dx + dy * dy;
  return ((y * y - 1.0) * dx * dx - 2.0 * x * y * dx * dy + (x * x - 1.0) * dy * dy) / (r2 - 1.0);
}

WvaReport wva_report(const ProtocolConfig& cfg) {
  cfg.validate();
  const auto [c, s] = strength_trig(cfg.strength);
  const double xi = cfg.attenuation;
  const double t2 = cfg.time * cfg.time;
  const double x = xi * c * std::cos(cfg.relative_postselection());
  const double info = xi * xi * t2 * s * s;  // H_d sin^2(G pi / 2)

  WvaReport r;
  r.h_d = h_direct(cfg.time, xi);
  r.h_anc = info;
  r.q = 0.5 * (1.0 + x);

  const double plus = 1.0 + x;
  const double minus = 1.0 - x;
  r.postselected_defined = plus > kSingularThreshold;
  r.orthogonal_defined = minus > kSingularThreshold;

  if (r.postselected_defined) {
    r.a_factor = 1.0 / (plus * plus);
    r.h_wva = info * r.a_factor;
    r.q_h_wva = info / (2.0 * plus);
    r.ratio_direct = s * s / (2.0 * plus);
    r.ratio_anc = 1.0 / (2.0 * plus);
  } else {
    r.a_factor = r.h_wva = r.q_h_wva = r.ratio_direct = r.ratio_anc = kNaN;
  }
  if (r.orthogonal_defined) {
    r.h_perp = info / (minus * minus);
    r.weighted_h_perp = info / (2.0 * minus);
  } else {
    r.h_perp = r.weighted_h_perp = kNaN;
  }
  r.h_total = (r.postselected_defined && r.orthogonal_defined) ? info / (plus * minus) : kNaN;
  return r;
}

double ratio_direct_antiparallel(double strength, double attenuation) {
  require_unit("measurement strength G", strength);
  require_unit("attenuation Xi", attenuation);
  const auto [c, s] = strength_trig(strength);
  // At Xi = 1 the ratio simplifies exactly to (1 + cos(G pi / 2)) / 2.
  if (attenuation == 1.0) return 0.5 * (1.0 + c);
  return s * s / (2.0 * (1.0 - attenuation * c));
}

NoisyMeterReport noisy_meter_report(const ProtocolConfig& cfg) {
  cfg.validate();
  const auto [c, s] = strength_trig(cfg.strength);
  const double sigma2t2 = cfg.meter_attenuation * cfg.meter_attenuation * cfg.time * cfg.time;
  const double plus = 1.0 + c * std::cos(cfg.relative_postselection());

  NoisyMeterReport r;
  r.h_anc_tilde = sigma2t2;
  r.q = 0.5 * plus;
  r.defined = plus > kSingularThreshold;
  if (r.defined) {
    r.h_wva_tilde = sigma2t2 * s * s / (plus * plus);
    r.q_h_wva_tilde = sigma2t2 * s * s / (2.0 * plus);
  } else {
    r.h_wva_tilde = r.q_h_wva_tilde = kNaN;
  }
  return r;
}

}  // namespace wva
