// wvasense: command-line front end over the wva C API.
//
//   wvasense point  [--G --theta-rel|--theta --Theta --xi|--gamma --t --delta-b --sigma]
//   wvasense figure fig2|fig3|fig4|fig5 --out DIR [--steps --xi --t --G --threads]
//   wvasense verify [--tolerance --steps --threads --inject-fault QUANTITY]
//   wvasense mle    [--protocol direct|postselected --N --M --seed ...]
//
// Exit codes: 0 success, 1 verification failure, 2 configuration error,
// 3 I/O error.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "wva/wva.h"

namespace {

using json = nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

int exit_code_for(wva_status s) { return s == WVA_ERROR_IO ? kExitIo : kExitConfig; }

int report_error(wva_status s) {
  std::cerr << "wvasense: " << wva_status_string(s) << ": " << wva_last_error() << "\n";
  return exit_code_for(s);
}

struct CliError {
  int code;
  std::string message;
};

// Flag values are kept as strings so angles like "pi/2" reach the library
// unparsed; the library validates every value.
struct Options {
  std::string config_path;
  std::map<std::string, std::string> flags;

  void bind(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    app->add_option_function<std::string>(flag, [this, key](const std::string& v) { flags[key] = v; }, help);
  }

  json merged() const {
    json j = json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw CliError{kExitIo, "cannot read config file '" + config_path + "'"};
      try {
        j = json::parse(in);
      } catch (const json::exception& e) {
        throw CliError{kExitConfig, "config file '" + config_path + "': " + e.what()};
      }
      if (!j.is_object()) throw CliError{kExitConfig, "config file must hold a flat JSON object"};
      // Keys may be spelled like the flags (theta-rel) or with underscores.
      json normalized = json::object();
      for (auto& [k, v] : j.items()) {
        std::string key = k;
        std::replace(key.begin(), key.end(), '-', '_');
        normalized[key] = v;
      }
      j = std::move(normalized);
    }
    for (const auto& [k, v] : flags) j[k] = v;
    return j;
  }
};

void add_protocol_flags(CLI::App* app, Options& o) {
  o.bind(app, "--G", "G", "Measurement strength in [0, 1]");
  o.bind(app, "--theta-rel", "theta_rel", "Postselection angle relative to t*delta_b");
  o.bind(app, "--theta", "theta", "Absolute postselection angle");
  o.bind(app, "--Theta", "Theta", "Control angle (default theta + pi/2)");
  o.bind(app, "--xi", "xi", "System coherence attenuation");
  o.bind(app, "--gamma", "gamma", "Dephasing rate; sets xi = exp(-gamma t)");
  o.bind(app, "--t", "t", "Interrogation time");
  o.bind(app, "--delta-b", "delta_b", "Field offset");
  o.bind(app, "--sigma", "sigma", "Meter coherence attenuation");
}

int write_output(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text << "\n";
    return kExitOk;
  }
  std::ofstream out(path);
  if (!out || !(out << text << "\n")) {
    std::cerr << "wvasense: cannot write '" << path << "'\n";
    return kExitIo;
  }
  return kExitOk;
}

// Owns a char* returned by the library.
using LibString = std::unique_ptr<char, decltype(&wva_string_free)>;

int run_point(const Options& o, const std::string& out_path) {
  json merged = o.merged();
  if (!merged.contains("G")) throw CliError{kExitConfig, "point needs the measurement strength (--G or \"G\" in --config)"};
  std::string opts = merged.dump();
  wva_config* raw = nullptr;
  if (wva_status s = wva_config_from_json(opts.c_str(), &raw); s != WVA_OK) return report_error(s);
  std::unique_ptr<wva_config, decltype(&wva_config_destroy)> cfg(raw, wva_config_destroy);
  char* text = nullptr;
  if (wva_status s = wva_point_json(cfg.get(), &text); s != WVA_OK) return report_error(s);
  LibString owned(text, wva_string_free);
  return write_output(text, out_path);
}

int run_figure(const Options& o, const std::string& name, const std::string& out_dir) {
  std::string opts = o.merged().dump();
  char* summary = nullptr;
  if (wva_status s = wva_figure_write(name.c_str(), opts.c_str(), out_dir.c_str(), &summary); s != WVA_OK)
    return report_error(s);
  LibString owned(summary, wva_string_free);
  std::cout << summary << "\n";
  return kExitOk;
}

int run_verify(const Options& o, const std::string& out_path) {
  std::string opts = o.merged().dump();
  int passed = 0;
  char* report = nullptr;
  if (wva_status s = wva_verify_json(opts.c_str(), &passed, &report); s != WVA_OK) return report_error(s);
  LibString owned(report, wva_string_free);
  if (int rc = write_output(report, out_path); rc != kExitOk) return rc;
  std::cerr << (passed ? "verification passed" : "verification FAILED") << "\n";
  return passed ? kExitOk : kExitVerifyFailed;
}

int run_mle(const Options& o, const std::string& out_path) {
  std::string opts = o.merged().dump();
  char* report = nullptr;
  if (wva_status s = wva_mle_json(opts.c_str(), &report); s != WVA_OK) return report_error(s);
  LibString owned(report, wva_string_free);
  return write_output(report, out_path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weak-value amplification sensing toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(wva_version()));

  Options point_opts, figure_opts, verify_opts, mle_opts;
  std::string point_out, figure_name, figure_dir, verify_out, mle_out;

  auto* point = app.add_subcommand("point", "Closed forms and brute-force values at one configuration");
  add_protocol_flags(point, point_opts);
  point->add_option("--config", point_opts.config_path, "Flat JSON file of parameters (flags override)");
  point->add_option("--out", point_out, "Write the JSON report here instead of stdout");

  auto* figure = app.add_subcommand("figure", "Write the CSV data behind a figure");
  figure->add_option("name", figure_name, "fig2, fig3, fig4 or fig5")->required();
  figure->add_option("--out", figure_dir, "Output directory")->required();
  figure->add_option("--config", figure_opts.config_path, "Flat JSON file of options (flags override)");
  figure_opts.bind(figure, "--steps", "steps", "Points per axis");
  figure_opts.bind(figure, "--xi", "xi", "Attenuation for fig2 and fig5");
  figure_opts.bind(figure, "--t", "t", "Interrogation time for fig2, fig3 and fig5");
  figure_opts.bind(figure, "--G", "G", "Measurement strength for fig4");
  figure_opts.bind(figure, "--t-max", "t_max", "Largest time for fig4");
  figure_opts.bind(figure, "--gamma-max", "gamma_max", "Largest dephasing rate for fig4");
  figure_opts.bind(figure, "--threads", "threads", "Worker threads");

  auto* verify = app.add_subcommand("verify", "Check every closed form against the circuit simulation");
  verify->add_option("--config", verify_opts.config_path, "Flat JSON file of options (flags override)");
  verify->add_option("--out", verify_out, "Write the JSON report here instead of stdout");
  verify_opts.bind(verify, "--tolerance", "tolerance", "Maximum relative deviation");
  verify_opts.bind(verify, "--steps", "steps", "Points per axis of the default grid");
  verify_opts.bind(verify, "--threads", "threads", "Worker threads");
  verify_opts.bind(verify, "--step", "step", "Finite-difference step");
  verify_opts.bind(verify, "--inject-fault", "inject_fault", "Perturb one closed form by 1e-3 (self-test)");

  auto* mle = app.add_subcommand("mle", "Maximum-likelihood estimation against the Cramer-Rao bound");
  add_protocol_flags(mle, mle_opts);
  mle->add_option("--config", mle_opts.config_path, "Flat JSON file of options (flags override)");
  mle->add_option("--out", mle_out, "Write the JSON report here instead of stdout");
  mle_opts.bind(mle, "--protocol", "protocol", "direct or postselected");
  mle_opts.bind(mle, "--N", "N", "Trials per experiment");
  mle_opts.bind(mle, "--M", "M", "Number of experiments");
  mle_opts.bind(mle, "--seed", "seed", "Random seed");
  mle_opts.bind(mle, "--threads", "threads", "Worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*point) return run_point(point_opts, point_out);
    if (*figure) return run_figure(figure_opts, figure_name, figure_dir);
    if (*verify) return run_verify(verify_opts, verify_out);
    if (*mle) return run_mle(mle_opts, mle_out);
  } catch (const CliError& e) {
    std::cerr << "wvasense: " << e.message << "\n";
    return e.code;
  }
  return kExitConfig;
}
