#include "wva/wva.h"

#include <cmath>
#include <cstring>
#include <memory>
#include <numbers>
#include <optional>
#include <string>

#include "json.hpp"

#include "wva/closed_forms.hpp"
#include "wva/error.hpp"
#include "wva/estimation.hpp"
#include "wva/noise.hpp"
#include "wva/oracle.hpp"
#include "wva/sweep.hpp"

struct wva_config {
  double strength = 1.0;
  double theta = 0.0;
  bool theta_relative = true;
  std::optional<double> control;
  double field = 0.0;
  double time = 1.0;
  double xi = 1.0;
  double sigma = 1.0;

  wva::ProtocolConfig resolve() const {
    wva::ProtocolConfig cfg;
    cfg.strength = strength;
    cfg.field = field;
    cfg.time = time;
    cfg.attenuation = xi;
    cfg.meter_attenuation = sigma;
    cfg.postselection_angle = theta_relative ? theta + time * field : theta;
    cfg.control_angle = control ? *control : wva::paired_control_angle(cfg.postselection_angle);
    return cfg;
  }
};

struct wva_noise_model {
  wva::AttenuationModel model;
};

namespace {

using json = nlohmann::json;

thread_local std::string g_last_error;

wva_status status_for(wva::ErrorKind kind) {
  switch (kind) {
    case wva::ErrorKind::Validation: return WVA_ERROR_VALIDATION;
    case wva::ErrorKind::Domain: return WVA_ERROR_DOMAIN;
    case wva::ErrorKind::Singular: return WVA_ERROR_SINGULAR;
    case wva::ErrorKind::UndefinedState: return WVA_ERROR_UNDEFINED_STATE;
    case wva::ErrorKind::Model: return WVA_ERROR_MODEL;
    case wva::ErrorKind::Config: return WVA_ERROR_CONFIG;
    case wva::ErrorKind::Io: return WVA_ERROR_IO;
  }
  return WVA_ERROR_INTERNAL;
}

template <class F>
wva_status guarded(F&& body) {
  g_last_error.clear();
  try {
    body();
    return WVA_OK;
  } catch (const wva::Error& e) {
    g_last_error = e.what();
    return status_for(e.kind());
  } catch (const json::exception& e) {
    g_last_error = std::string("invalid options: ") + e.what();
    return WVA_ERROR_CONFIG;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return WVA_ERROR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return WVA_ERROR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr) wva::fail(wva::ErrorKind::Validation, std::string(what) + " is null");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

json parse_options(const char* text) {
  if (text == nullptr || *text == '\0') return json::object();
  json j = json::parse(text);
  if (!j.is_object()) wva::fail(wva::ErrorKind::Config, "options must be a JSON object");
  return j;
}

double number_or_angle(const json& v, const std::string& key) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return wva::parse_angle(v.get<std::string>());
  wva::fail(wva::ErrorKind::Config, "option '" + key + "' must be a number or an angle string");
}

double opt_double(const json& j, const std::string& key, double fallback) {
  auto it = j.find(key);
  return it == j.end() ? fallback : number_or_angle(*it, key);
}

std::optional<double> opt_maybe(const json& j, const std::string& key) {
  auto it = j.find(key);
  if (it == j.end()) return std::nullopt;
  return number_or_angle(*it, key);
}

std::uint64_t opt_count(const json& j, const std::string& key, std::uint64_t fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  double v = number_or_angle(*it, key);
  if (!(v >= 1.0) || v != std::floor(v) || v > 1e15)
    wva::fail(wva::ErrorKind::Config, "option '" + key + "' must be a positive integer");
  return static_cast<std::uint64_t>(v);
}

unsigned opt_threads(const json& j) {
  return static_cast<unsigned>(opt_count(j, "threads", 1));
}

/// Protocol configuration from flat option keys: G, theta_rel | theta,
/// Theta, xi | gamma, t, delta_b, sigma.
wva::ProtocolConfig config_from_options(const json& j, const wva::ProtocolConfig& defaults) {
  wva_config c;
  c.strength = opt_double(j, "G", defaults.strength);
  c.time = opt_double(j, "t", defaults.time);
  c.field = opt_double(j, "delta_b", defaults.field);
  c.sigma = opt_double(j, "sigma", defaults.meter_attenuation);
  auto xi = opt_maybe(j, "xi");
  auto gamma = opt_maybe(j, "gamma");
  if (xi && gamma) wva::fail(wva::ErrorKind::Config, "give either xi or gamma, not both");
  if (gamma) {
    if (!(*gamma >= 0.0)) wva::fail(wva::ErrorKind::Config, "gamma must be non-negative");
    c.xi = std::exp(-*gamma * c.time);
  } else {
    c.xi = xi.value_or(defaults.attenuation);
  }
  auto rel = opt_maybe(j, "theta_rel");
  auto abs = opt_maybe(j, "theta");
  if (rel && abs) wva::fail(wva::ErrorKind::Config, "give either theta_rel or theta, not both");
  if (abs) {
    c.theta = *abs;
    c.theta_relative = false;
  } else {
    c.theta = rel.value_or(defaults.relative_postselection());
  }
  c.control = opt_maybe(j, "Theta");
  wva::ProtocolConfig cfg = c.resolve();
  cfg.validate();
  return cfg;
}

}  // namespace

extern "C" {

const char* wva_version(void) { return "1.0.0"; }

const char* wva_last_error(void) { return g_last_error.c_str(); }

const char* wva_status_string(wva_status status) {
  switch (status) {
    case WVA_OK: return "ok";
    case WVA_ERROR_INVALID_ARGUMENT: return "invalid argument";
    case WVA_ERROR_VALIDATION: return "validation error";
    case WVA_ERROR_DOMAIN: return "domain error";
    case WVA_ERROR_SINGULAR: return "singular configuration";
    case WVA_ERROR_UNDEFINED_STATE: return "undefined state";
    case WVA_ERROR_MODEL: return "model error";
    case WVA_ERROR_CONFIG: return "configuration error";
    case WVA_ERROR_IO: return "i/o error";
    case WVA_ERROR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void wva_string_free(char* s) { std::free(s); }

wva_status wva_config_create(wva_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = new wva_config();
  });
}

void wva_config_destroy(wva_config* cfg) { delete cfg; }

wva_status wva_config_set(wva_config* cfg, const char* name, double value) {
  return guarded([&] {
    require(cfg, "config");
    require(name, "name");
    if (!std::isfinite(value)) wva::fail(wva::ErrorKind::Domain, std::string(name) + " must be finite");
    std::string n(name);
    if (n == "G") cfg->strength = value;
    else if (n == "theta") { cfg->theta = value; cfg->theta_relative = false; }
    else if (n == "theta_rel") { cfg->theta = value; cfg->theta_relative = true; }
    else if (n == "Theta") cfg->control = value;
    else if (n == "delta_b") cfg->field = value;
    else if (n == "t") cfg->time = value;
    else if (n == "xi") cfg->xi = value;
    else if (n == "sigma") cfg->sigma = value;
    else wva::fail(wva::ErrorKind::Config, "unknown parameter '" + n + "'");
  });
}

wva_status wva_config_get(const wva_config* cfg, const char* name, double* out) {
  return guarded([&] {
    require(cfg, "config");
    require(name, "name");
    require(out, "out");
    std::string n(name);
    wva::ProtocolConfig r = cfg->resolve();
    if (n == "G") *out = r.strength;
    else if (n == "theta") *out = r.postselection_angle;
    else if (n == "theta_rel") *out = r.relative_postselection();
    else if (n == "Theta") *out = r.control_angle;
    else if (n == "delta_b") *out = r.field;
    else if (n == "t") *out = r.time;
    else if (n == "xi") *out = r.attenuation;
    else if (n == "sigma") *out = r.meter_attenuation;
    else wva::fail(wva::ErrorKind::Config, "unknown parameter '" + n + "'");
  });
}

wva_status wva_config_validate(const wva_config* cfg) {
  return guarded([&] {
    require(cfg, "config");
    cfg->resolve().validate();
  });
}

wva_status wva_config_from_json(const char* options_json, wva_config** out) {
  return guarded([&] {
    require(out, "out");
    json j = parse_options(options_json);
    wva::ProtocolConfig cfg =
        config_from_options(j, wva::ProtocolConfig::main_text(1.0, std::numbers::pi, 1.0, 1.0));
    auto c = std::make_unique<wva_config>();
    c->strength = cfg.strength;
    c->theta = cfg.postselection_angle;
    c->theta_relative = false;
    c->control = cfg.control_angle;
    c->field = cfg.field;
    c->time = cfg.time;
    c->xi = cfg.attenuation;
    c->sigma = cfg.meter_attenuation;
    *out = c.release();
  });
}

wva_status wva_parse_angle(const char* text, double* out) {
  return guarded([&] {
    require(text, "text");
    require(out, "out");
    *out = wva::parse_angle(text);
  });
}

wva_status wva_compute_report(const wva_config* cfg, wva_report* out) {
  return guarded([&] {
    require(cfg, "config");
    require(out, "out");
    wva::WvaReport r = wva::wva_report(cfg->resolve());
    *out = wva_report{r.a_factor,     r.q,           r.h_d,
                      r.h_anc,        r.h_wva,       r.q_h_wva,
                      r.h_perp,       r.weighted_h_perp, r.h_total,
                      r.ratio_direct, r.ratio_anc,   r.postselected_defined ? 1 : 0,
                      r.orthogonal_defined ? 1 : 0};
  });
}

wva_status wva_f_direct(const wva_config* cfg, double* out) {
  return guarded([&] {
    require(cfg, "config");
    require(out, "out");
    *out = wva::f_direct(cfg->resolve());
  });
}

wva_status wva_h_direct(double t, double xi, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = wva::h_direct(t, xi);
  });
}

wva_status wva_h_anc(const wva_config* cfg, double* out) {
  return guarded([&] {
    require(cfg, "config");
    require(out, "out");
    *out = wva::h_anc(cfg->resolve());
  });
}

wva_status wva_meter_coherence(const wva_config* cfg, int general, double* re, double* im) {
  return guarded([&] {
    require(cfg, "config");
    require(re, "re");
    require(im, "im");
    wva::ProtocolConfig r = cfg->resolve();
    wva::MeterState m = general ? wva::meter_state_general(r) : wva::meter_state_simplified(r);
    *re = m.coherence().real();
    *im = m.coherence().imag();
  });
}

wva_status wva_noisy_meter(const wva_config* cfg, wva_noisy_meter_report* out) {
  return guarded([&] {
    require(cfg, "config");
    require(out, "out");
    wva::NoisyMeterReport r = wva::noisy_meter_report(cfg->resolve());
    *out = wva_noisy_meter_report{r.h_anc_tilde, r.h_wva_tilde, r.q_h_wva_tilde, r.q, r.defined ? 1 : 0};
  });
}

wva_status wva_oracle_qfi(const wva_config* cfg, wva_readout readout, wva_placement placement, double step, double* h,
                          double* q) {
  return guarded([&] {
    require(cfg, "config");
    require(h, "h");
    wva::CircuitSpec spec;
    spec.cfg = cfg->resolve();
    switch (readout) {
      case WVA_READOUT_POSTSELECTED: spec.readout = wva::Readout::Postselected; break;
      case WVA_READOUT_ORTHOGONAL: spec.readout = wva::Readout::Orthogonal; break;
      case WVA_READOUT_TRACED: spec.readout = wva::Readout::Traced; break;
      default: wva::fail(wva::ErrorKind::Validation, "unknown readout");
    }
    switch (placement) {
      case WVA_NOISE_ON_SYSTEM: spec.placement = wva::NoisePlacement::SystemBeforeCoupling; break;
      case WVA_NOISE_ON_METER: spec.placement = wva::NoisePlacement::MeterAfterPostselection; break;
      default: wva::fail(wva::ErrorKind::Validation, "unknown noise placement");
    }
    wva::OracleResult r = wva::simulate_protocol(spec, step);
    *h = r.h_numeric;
    if (q) *q = r.q;
  });
}

wva_status wva_noise_model_exponential(double gamma, wva_noise_model** out) {
  return guarded([&] {
    require(out, "out");
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) wva::fail(wva::ErrorKind::Domain, "gamma must be non-negative");
    *out = new wva_noise_model{wva::ExponentialDephasing{gamma}};
  });
}

wva_status wva_noise_model_gaussian(double gamma, wva_noise_model** out) {
  return guarded([&] {
    require(out, "out");
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) wva::fail(wva::ErrorKind::Domain, "gamma must be non-negative");
    *out = new wva_noise_model{wva::GaussianDecay{gamma}};
  });
}

wva_status wva_noise_model_constant(double xi, wva_noise_model** out) {
  return guarded([&] {
    require(out, "out");
    if (!(xi >= 0.0 && xi <= 1.0)) wva::fail(wva::ErrorKind::Domain, "xi must lie in [0, 1]");
    *out = new wva_noise_model{wva::ConstantAttenuation{xi}};
  });
}

wva_status wva_noise_model_load_csv(const char* path, wva_noise_model** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new wva_noise_model{wva::load_tabulated_csv(path)};
  });
}

void wva_noise_model_destroy(wva_noise_model* model) { delete model; }

wva_status wva_noise_model_xi(const wva_noise_model* model, double t, double* out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    *out = wva::xi_eval(model->model, t);
  });
}

wva_status wva_point_json(const wva_config* cfg, char** out_json) {
  return guarded([&] {
    require(cfg, "config");
    require(out_json, "out_json");
    wva::ProtocolConfig r = cfg->resolve();
    r.validate();
    *out_json = dup_string(wva::point_report(r).dump(2));
  });
}

wva_status wva_figure_write(const char* name, const char* options_json, const char* out_dir, char** summary_json) {
  return guarded([&] {
    require(name, "name");
    require(out_dir, "out_dir");
    json j = parse_options(options_json);
    wva::FigureOptions o;
    o.steps = static_cast<int>(opt_count(j, "steps", static_cast<std::uint64_t>(o.steps)));
    o.xi = opt_double(j, "xi", o.xi);
    o.time = opt_double(j, "t", o.time);
    o.strength = opt_double(j, "G", o.strength);
    o.t_max = opt_double(j, "t_max", o.t_max);
    o.gamma_max = opt_double(j, "gamma_max", o.gamma_max);
    o.threads = opt_threads(j);
    if (auto it = j.find("xi_list"); it != j.end()) {
      if (!it->is_array() || it->empty()) wva::fail(wva::ErrorKind::Config, "xi_list must be a non-empty array");
      o.xi_list.clear();
      for (const auto& v : *it) o.xi_list.push_back(number_or_angle(v, "xi_list"));
    }
    auto files = wva::make_figure(name, o);
    wva::write_figure(files, out_dir);
    if (summary_json) {
      nlohmann::ordered_json s;
      s["figure"] = name;
      s["directory"] = out_dir;
      auto& list = s["files"] = nlohmann::ordered_json::array();
      for (const auto& f : files) list.push_back({{"file", f.file_name}, {"rows", f.table.rows.size()}});
      *summary_json = dup_string(s.dump(2));
    }
  });
}

wva_status wva_verify_json(const char* options_json, int* passed, char** report_json) {
  return guarded([&] {
    require(passed, "passed");
    json j = parse_options(options_json);
    wva::VerifyOptions o;
    o.tolerance = opt_double(j, "tolerance", o.tolerance);
    if (!(o.tolerance > 0.0)) wva::fail(wva::ErrorKind::Config, "tolerance must be positive");
    o.threads = opt_threads(j);
    o.comparison.step = opt_double(j, "step", o.comparison.step);
    if (auto it = j.find("inject_fault"); it != j.end()) o.comparison.corrupt = it->get<std::string>();

    wva::SweepGrid grid = wva::default_verify_grid();
    if (auto it = j.find("steps"); it != j.end()) {
      int steps = static_cast<int>(opt_count(j, "steps", 10));
      std::vector<wva::Axis> axes = grid.axes();
      for (auto& a : axes) a.steps = steps;
      grid = wva::SweepGrid(axes, grid.fixed());
    }
    if (auto it = j.find("grid"); it != j.end()) {
      std::vector<wva::Axis> axes;
      for (const auto& a : it->at("axes")) {
        axes.push_back(wva::Axis{a.at("name").get<std::string>(), number_or_angle(a.at("min"), "min"),
                                 number_or_angle(a.at("max"), "max"), a.at("steps").get<int>()});
      }
      std::map<std::string, double> fixed;
      if (auto f = it->find("fixed"); f != it->end())
        for (const auto& [k, v] : f->items()) fixed[k] = number_or_angle(v, k);
      grid = wva::SweepGrid(axes, fixed);
    }
    wva::DeviationReport report = wva::verify_closed_forms(grid, o);
    *passed = report.passed() ? 1 : 0;
    if (report_json) *report_json = dup_string(report.to_json().dump(2));
  });
}

wva_status wva_mle_json(const char* options_json, char** report_json) {
  return guarded([&] {
    require(report_json, "report_json");
    json j = parse_options(options_json);
    std::string protocol = j.value("protocol", std::string("direct"));
    std::uint64_t seed = 42;
    if (auto it = j.find("seed"); it != j.end()) {
      if (it->is_number_unsigned()) {
        seed = it->get<std::uint64_t>();
      } else {
        double v = number_or_angle(*it, "seed");
        if (!(v >= 0.0) || v != std::floor(v) || v > 9e15)
          wva::fail(wva::ErrorKind::Config, "seed must be a non-negative integer");
        seed = static_cast<std::uint64_t>(v);
      }
    }
    std::size_t experiments = opt_count(j, "M", 300);
    unsigned threads = opt_threads(j);

    wva::CrbReport report;
    if (protocol == "direct") {
      wva::ProtocolConfig defaults;
      defaults.strength = 0.0;
      wva::ProtocolConfig cfg = config_from_options(j, defaults);
      report = wva::crb_check(cfg, wva::Povm::sigma_x(), opt_count(j, "N", 1000), experiments, seed, threads);
    } else if (protocol == "postselected") {
      wva::ProtocolConfig defaults = wva::ProtocolConfig::main_text(0.02, std::numbers::pi, 1.0, 1.0);
      wva::ProtocolConfig cfg = config_from_options(j, defaults);
      // Without an explicit N, aim for about 10^3 accepted trials per experiment.
      std::uint64_t trials = 0;
      if (j.contains("N")) {
        trials = opt_count(j, "N", 1000);
      } else {
        double q = wva::wva_report(cfg).q;
        if (!(q > 0.0)) wva::fail(wva::ErrorKind::UndefinedState, "postselection probability vanishes");
        trials = static_cast<std::uint64_t>(std::ceil(1000.0 / q));
      }
      report = wva::crb_check_postselected(cfg, trials, experiments, seed, threads);
    } else {
      wva::fail(wva::ErrorKind::Config, "protocol must be 'direct' or 'postselected'");
    }
    *report_json = dup_string(report.to_json().dump(2));
  });
}

}  // extern "C"
