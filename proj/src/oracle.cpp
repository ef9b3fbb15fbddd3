#include "wva/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "parallel.hpp"

namespace wva {

namespace {

constexpr double kPi = std::numbers::pi;

double field_step(double step, double field) { return step * std::max(1.0, std::abs(field)); }

double meter_qfi(const CircuitSpec& spec, double h) {
  const double field = spec.cfg.field;
  const auto center = run_circuit(spec, field);
  const auto up = run_circuit(spec, field + h);
  const auto down = run_circuit(spec, field - h);
  const Matrix2 drho = (up.eta.matrix() - down.eta.matrix()) / (2.0 * h);
  return qfi_spectral(center.eta, drho);
}

double deviation(double closed, double numeric, double scale) {
  return std::abs(numeric - closed) / std::max(std::abs(closed), 1e-9 * scale);
}

}  // namespace

Matrix4 measurement_unitary(double strength, double control_angle) {
  const Matrix2 axis = std::cos(control_angle) * pauli::y() - std::sin(control_angle) * pauli::x();
  const Matrix2 plus = 0.5 * (Matrix2::Identity() + axis);
  const Matrix2 minus = 0.5 * (Matrix2::Identity() - axis);
  // exp(i a sigma_z) is diagonal because sigma_z is.
  const Matrix2 z = pauli::z_flipped();
  Matrix2 kick = Matrix2::Zero();
  for (int k = 0; k < 2; ++k) kick(k, k) = std::exp(kI * (strength * kPi / 2.0) * z(k, k));
  return kron(plus, Matrix2::Identity()) + kron(minus, kick);
}

Vector2 postselection_vector(double angle) {
  return Vector2(1.0, kI * std::exp(kI * angle)) / std::sqrt(2.0);
}

QubitState initial_meter() { return QubitState::pure(Vector2(1.0, -kI)); }

QubitState oracle_system_state(const CircuitSpec& spec, double field) {
  const auto& cfg = spec.cfg;
  if (spec.population) {
    const double r = population_eval(*spec.population, cfg.time);
    const double xi = attenuation_eval(*spec.population, cfg.time);
    check_positivity(r, xi, cfg.time);
    return system_density(field, cfg.time, r, xi);
  }
  const double xi = spec.placement == NoisePlacement::MeterAfterPostselection ? 1.0 : cfg.attenuation;
  const QubitState prepared = QubitState::pure(Vector2(1.0, kI));
  Matrix2 rotation = Matrix2::Identity();
  rotation(1, 1) = std::exp(kI * (field * cfg.time));
  const QubitState precessed = QubitState::from_matrix(rotation * prepared.matrix() * rotation.adjoint());
  return KrausChannel::dephasing(xi).apply(precessed);
}

MeterSample run_circuit(const CircuitSpec& spec, double field) {
  const auto& cfg = spec.cfg;
  const QubitState system = oracle_system_state(spec, field);
  const Matrix4 coupling = measurement_unitary(cfg.strength, cfg.control_angle);
  const Matrix4 joint = coupling * kron(system.matrix(), initial_meter().matrix()) * coupling.adjoint();

  MeterSample out{initial_meter(), 1.0};
  switch (spec.readout) {
    case Readout::Traced:
      out.eta = QubitState::from_matrix(partial_trace_system(joint));
      break;
    case Readout::Postselected:
    case Readout::Orthogonal: {
      const double angle = cfg.postselection_angle + (spec.readout == Readout::Orthogonal ? kPi : 0.0);
      auto post = postselect_system(joint, postselection_vector(angle));
      if (!post.defined()) fail(ErrorKind::UndefinedState, "postselection probability below threshold");
      out.eta = *post.state;
      out.q = post.probability;
      break;
    }
  }
  if (spec.placement == NoisePlacement::MeterAfterPostselection)
    out.eta = KrausChannel::dephasing(cfg.meter_attenuation).apply(out.eta);
  return out;
}

QfiEstimate qfi_numeric(const CircuitSpec& spec, double step) {
  if (!(step >= 1e-7 && step <= 1e-3)) fail(ErrorKind::Domain, "finite-difference step must lie in [1e-7, 1e-3]");
  spec.cfg.validate();
  const double h = field_step(step, spec.cfg.field);
  QfiEstimate e;
  e.value = meter_qfi(spec, h);
  e.halved = meter_qfi(spec, 0.5 * h);
  e.consistent = std::abs(e.value - e.halved) <= 1e-4 * std::max(std::abs(e.value), 1e-12);
  return e;
}

OracleResult simulate_protocol(const CircuitSpec& spec, double step) {
  spec.cfg.validate();
  const auto sample = run_circuit(spec, spec.cfg.field);
  const auto qfi = qfi_numeric(spec, step);
  OracleResult r{MeterState{sample.eta}, sample.q, qfi.value, {}, {}};
  if (!qfi.consistent) r.warnings.push_back("finite-difference QFI changed by more than 1e-4 under step halving");
  return r;
}

double h_direct_numeric(const ProtocolConfig& cfg, double step) {
  const CircuitSpec spec{cfg};
  const double h = field_step(step, cfg.field);
  const auto center = oracle_system_state(spec, cfg.field);
  const Matrix2 drho =
      (oracle_system_state(spec, cfg.field + h).matrix() - oracle_system_state(spec, cfg.field - h).matrix()) / (2.0 * h);
  return qfi_spectral(center, drho);
}

double f_direct_numeric(const ProtocolConfig& cfg, const Povm& povm, double step) {
  const CircuitSpec spec{cfg};
  ProbabilityFamily family = [&](double field) { return povm.probabilities(oracle_system_state(spec, field)); };
  return classical_fisher(family, cfg.field, field_step(step, cfg.field));
}

const std::vector<std::string>& compared_quantities() {
  static const std::vector<std::string> names{
      "eta12",     "eta12_general", "q",       "f_direct",     "h_d",         "h_anc",
      "h_anc_optimal", "h_wva",     "h_wva_equatorial", "q_h_wva", "h_perp",  "h_total",
      "ratio_direct",  "ratio_anc", "h_anc_tilde", "h_wva_tilde", "q_h_wva_tilde"};
  return names;
}

std::vector<Comparison> compare_point(const ProtocolConfig& cfg, const ComparisonOptions& options) {
  cfg.validate();
  const double h = field_step(options.step, cfg.field);
  const double info_scale = std::max(1.0, cfg.time * cfg.time);
  std::vector<Comparison> out;

  // Each closure returns {closed, numeric}; Singular/UndefinedState or a
  // NaN closed form marks the point as degenerate for that quantity.
  auto record = [&](const std::string& name, double scale, const std::function<std::pair<double, double>()>& eval) {
    Comparison c{name};
    try {
      auto [closed, numeric] = eval();
      if (name == options.corrupt) closed *= 1.0 + 1e-3;
      c.closed = closed;
      c.numeric = numeric;
      if (!std::isfinite(closed) || !std::isfinite(numeric)) {
        c.skipped = true;
      } else {
        c.deviation = deviation(closed, numeric, scale);
      }
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Singular && e.kind() != ErrorKind::UndefinedState) throw;
      c.skipped = true;
    }
    out.push_back(c);
  };

  const WvaReport report = wva_report(cfg);
  const CircuitSpec post{cfg, NoisePlacement::SystemBeforeCoupling, Readout::Postselected};
  const CircuitSpec orth{cfg, NoisePlacement::SystemBeforeCoupling, Readout::Orthogonal};

  ProtocolConfig general = cfg;
  general.control_angle = cfg.control_angle + options.general_offset;
  ProtocolConfig optimal = cfg;
  optimal.control_angle = cfg.phase() + kPi / 2.0;

  // Brute-force meter families shared by several comparisons.
  std::optional<MeterSample> post_c, post_u, post_d;
  auto ensure_post = [&] {
    if (post_c) return;
    post_c = run_circuit(post, cfg.field);
    post_u = run_circuit(post, cfg.field + h);
    post_d = run_circuit(post, cfg.field - h);
  };
  auto post_qfi = [&] {
    ensure_post();
    return qfi_spectral(post_c->eta, Matrix2((post_u->eta.matrix() - post_d->eta.matrix()) / (2.0 * h)));
  };
  auto orth_weighted = [&] {
    const auto centre = run_circuit(orth, cfg.field);
    return centre.q * meter_qfi(orth, h);
  };
  std::optional<double> direct_cache;
  auto direct = [&] {
    if (!direct_cache) direct_cache = h_direct_numeric(cfg, options.step);
    return *direct_cache;
  };
  auto anc_optimal = [&] { return meter_qfi(CircuitSpec{optimal, NoisePlacement::SystemBeforeCoupling, Readout::Traced}, h); };

  // Complex coherences: deviation is |numeric - closed| / |closed|; the
  // record keeps the moduli.
  auto record_coherence = [&](const std::string& name, const std::function<std::pair<Complex, Complex>()>& eval) {
    Comparison c{name};
    try {
      auto [closed, numeric] = eval();
      if (name == options.corrupt) closed *= 1.0 + 1e-3;
      c.closed = std::abs(closed);
      c.numeric = std::abs(numeric);
      c.deviation = std::abs(numeric - closed) / std::max(std::abs(closed), 1e-9);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Singular && e.kind() != ErrorKind::UndefinedState) throw;
      c.skipped = true;
    }
    out.push_back(c);
  };

  record_coherence("eta12", [&] {
    const Complex closed = meter_state_simplified(cfg).coherence();
    ensure_post();
    return std::pair{closed, post_c->eta(0, 1)};
  });
  record_coherence("eta12_general", [&] {
    return std::pair{meter_state_general(general).coherence(), run_circuit(CircuitSpec{general}, cfg.field).eta(0, 1)};
  });
  record("q", 1.0, [&] {
    ensure_post();
    return std::pair{report.q, post_c->q};
  });
  record("f_direct", info_scale, [&] { return std::pair{f_direct(cfg), f_direct_numeric(cfg, Povm::sigma_x(), options.step)}; });
  record("h_d", info_scale, [&] { return std::pair{h_direct(cfg.time, cfg.attenuation), direct()}; });
  record("h_anc", info_scale, [&] {
    const double closed = h_anc(general);
    return std::pair{closed, meter_qfi(CircuitSpec{general, NoisePlacement::SystemBeforeCoupling, Readout::Traced}, h)};
  });
  record("h_anc_optimal", info_scale, [&] { return std::pair{h_anc_optimal(cfg), anc_optimal()}; });
  record("h_wva", info_scale, [&] { return std::pair{report.h_wva, post_qfi()}; });
  record("h_wva_equatorial", info_scale, [&] {
    ensure_post();
    const Complex c = 2.0 * post_c->eta(0, 1);
    const Complex d = (post_u->eta(0, 1) - post_d->eta(0, 1)) / h;  // 2 * derivative of eta_12
    return std::pair{report.h_wva, qfi_equatorial(c.real(), c.imag(), d.real(), d.imag())};
  });
  record("q_h_wva", info_scale, [&] {
    ensure_post();
    return std::pair{report.q_h_wva, post_c->q * post_qfi()};
  });
  record("h_perp", info_scale, [&] {
    if (!report.orthogonal_defined) return std::pair{report.h_perp, 0.0};
    return std::pair{report.h_perp, meter_qfi(orth, h)};
  });
  record("h_total", info_scale, [&] {
    if (!report.orthogonal_defined || !report.postselected_defined) return std::pair{report.h_total, 0.0};
    ensure_post();
    return std::pair{report.h_total, post_c->q * post_qfi() + orth_weighted()};
  });
  record("ratio_direct", 1.0, [&] {
    const double hd = direct();
    if (hd < 1e-9 * info_scale || !report.postselected_defined) return std::pair{report.ratio_direct, std::nan("")};
    ensure_post();
    return std::pair{report.ratio_direct, post_c->q * post_qfi() / hd};
  });
  record("ratio_anc", 1.0, [&] {
    const double ha = anc_optimal();
    if (ha < 1e-9 * info_scale || !report.postselected_defined) return std::pair{report.ratio_anc, std::nan("")};
    ensure_post();
    return std::pair{report.ratio_anc, post_c->q * post_qfi() / ha};
  });

  // Meter-side noise with an ideal system.
  const NoisyMeterReport noisy = noisy_meter_report(cfg);
  ProtocolConfig strong = optimal;
  strong.strength = 1.0;
  record("h_anc_tilde", info_scale, [&] {
    return std::pair{noisy.h_anc_tilde,
                     meter_qfi(CircuitSpec{strong, NoisePlacement::MeterAfterPostselection, Readout::Traced}, h)};
  });
  const CircuitSpec noisy_post{cfg, NoisePlacement::MeterAfterPostselection, Readout::Postselected};
  std::optional<double> noisy_h;
  auto noisy_qfi = [&] {
    if (!noisy_h) noisy_h = meter_qfi(noisy_post, h);
    return *noisy_h;
  };
  record("h_wva_tilde", info_scale, [&] { return std::pair{noisy.h_wva_tilde, noisy_qfi()}; });
  record("q_h_wva_tilde", info_scale, [&] {
    return std::pair{noisy.q_h_wva_tilde, run_circuit(noisy_post, cfg.field).q * noisy_qfi()};
  });
  return out;
}

nlohmann::ordered_json DeviationReport::to_json(std::size_t max_failures) const {
  nlohmann::ordered_json j;
  j["passed"] = passed();
  j["tolerance"] = tolerance;
  j["points"] = points;
  j["degenerate_points"] = degenerate_points;
  auto& qs = j["quantities"] = nlohmann::ordered_json::array();
  for (const auto& q : quantities) {
    qs.push_back({{"name", q.name},
                  {"max_deviation", q.max_deviation},
                  {"mean_deviation", q.mean_deviation()},
                  {"evaluated", q.evaluated},
                  {"skipped", q.skipped},
                  {"failed", q.failed}});
  }
  j["failure_count"] = failures.size();
  auto& fs = j["worst_failures"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < std::min(max_failures, failures.size()); ++i) {
    const auto& f = failures[i];
    nlohmann::ordered_json point(f.point);
    fs.push_back({{"quantity", f.comparison.quantity},
                  {"point", point},
                  {"closed", f.comparison.closed},
                  {"numeric", f.comparison.numeric},
                  {"deviation", f.comparison.deviation}});
  }
  return j;
}

DeviationReport verify_closed_forms(const SweepGrid& grid, const VerifyOptions& options) {
  grid.require({"G", "theta", "xi"});
  const std::size_t n = grid.size();
  if (n == 0) fail(ErrorKind::Config, "verification grid is empty");

  std::vector<std::vector<Comparison>> results(n);
  detail::parallel_for(n, options.threads, [&](std::size_t i) {
    const GridPoint p = grid.point(i);
    ProtocolConfig cfg = ProtocolConfig::main_text(p.get("G", 0.0), p.get("theta", 0.0), p.get("xi", 1.0),
                                                   p.get("t", 1.0), p.get("delta_b", 0.0));
    cfg.meter_attenuation = p.get("sigma", 1.0);
    results[i] = compare_point(cfg, options.comparison);
  });

  DeviationReport report;
  report.tolerance = options.tolerance;
  report.points = n;
  for (const auto& name : compared_quantities()) report.quantities.push_back(QuantityStats{name});
  for (std::size_t i = 0; i < n; ++i) {
    bool degenerate = false;
    for (std::size_t k = 0; k < results[i].size(); ++k) {
      const auto& c = results[i][k];
      auto& stats = report.quantities[k];
      if (c.skipped) {
        ++stats.skipped;
        degenerate = true;
        continue;
      }
      ++stats.evaluated;
      stats.sum_deviation += c.deviation;
      stats.max_deviation = std::max(stats.max_deviation, c.deviation);
      if (!(c.deviation <= options.tolerance)) {
        ++stats.failed;
        report.failures.push_back(GridFailure{grid.point(i).values(), c});
      }
    }
    if (degenerate) ++report.degenerate_points;
  }
  std::stable_sort(report.failures.begin(), report.failures.end(),
                   [](const GridFailure& a, const GridFailure& b) { return a.comparison.deviation > b.comparison.deviation; });
  return report;
}

SweepGrid default_verify_grid() {
  return SweepGrid({{"G", 0.05, 1.0, 10}, {"theta", 0.0, 2.0 * kPi, 10}, {"xi", 0.1, 1.0, 10}, {"delta_b", -1.0, 1.0, 10}},
                   {{"t", 1.5}, {"sigma", 0.8}});
}

}  // namespace wva
