#include "wva/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <regex>
#include <sstream>

#include "parallel.hpp"
#include "wva/oracle.hpp"

namespace wva {

namespace {

constexpr double kPi = std::numbers::pi;

double safe_div(double a, double b) { return b == 0.0 ? std::nan("") : a / b; }

double quantity_value(const std::string& name, const ProtocolConfig& cfg, const WvaReport& r) {
  const double s = std::sin(cfg.strength * kPi / 2.0);
  if (name == "q") return r.q;
  if (name == "a_factor") return r.a_factor;
  if (name == "h_d") return r.h_d;
  if (name == "h_anc") return r.h_anc;
  if (name == "h_wva") return r.h_wva;
  if (name == "q_h_wva") return r.q_h_wva;
  if (name == "h_perp") return r.h_perp;
  if (name == "weighted_h_perp") return r.weighted_h_perp;
  if (name == "h_total") return r.h_total;
  if (name == "ratio_direct") return r.ratio_direct;
  if (name == "ratio_anc") return r.ratio_anc;
  // Ratios to H_d are taken algebraically so they stay defined when H_d = 0.
  if (name == "h_wva_over_h_d") return s * s * r.a_factor;
  if (name == "h_d_over_h_wva") return safe_div(1.0, s * s * r.a_factor);
  fail(ErrorKind::Config, "unknown sweep quantity `" + name + "`");
}

}  // namespace

double parse_angle(const std::string& text) {
  static const std::regex pi_form(
      R"(^\s*([+-])?\s*((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\s*\*?\s*pi\s*(?:/\s*((?:\d+\.?\d*|\.\d+)))?\s*$)");
  std::smatch m;
  if (std::regex_match(text, m, pi_form)) {
    double v = kPi;
    if (m[2].matched) v *= std::stod(m[2].str());
    if (m[3].matched) {
      const double d = std::stod(m[3].str());
      if (d == 0.0) fail(ErrorKind::Config, "angle `" + text + "` divides by zero");
      v /= d;
    }
    return (m[1].matched && m[1].str() == "-") ? -v : v;
  }
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (text.find_first_not_of(" \t", used) == std::string::npos && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  fail(ErrorKind::Config, "cannot parse angle `" + text + "`");
}

std::string format_csv_value(double v) {
  if (!std::isfinite(v)) return "degenerate";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string CsvTable::to_string() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_csv_value(row[i]);
    os << '\n';
  }
  return os.str();
}

void CsvTable::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out << to_string();
  if (!out) fail(ErrorKind::Io, "failed writing " + path.string());
}

ProtocolConfig config_at(const GridPoint& p) {
  const double t = p.get("t", 1.0);
  const auto xi = p.find("xi");
  const auto gamma = p.find("gamma");
  if (xi && gamma) fail(ErrorKind::Config, "specify either xi or gamma, not both");
  const double attenuation = gamma ? std::exp(-*gamma * t) : xi.value_or(1.0);
  ProtocolConfig cfg =
      ProtocolConfig::main_text(p.get("G", 1.0), p.get("theta", 0.0), attenuation, t, p.get("delta_b", 0.0));
  cfg.meter_attenuation = p.get("sigma", 1.0);
  return cfg;
}

const std::vector<std::string>& sweep_quantities() {
  static const std::vector<std::string> names{"q",       "a_factor", "h_d",          "h_anc",          "h_wva",
                                              "q_h_wva", "h_perp",   "weighted_h_perp", "h_total",     "ratio_direct",
                                              "ratio_anc", "h_wva_over_h_d", "h_d_over_h_wva"};
  return names;
}

CsvTable run_sweep(const SweepGrid& grid, const std::vector<std::string>& quantities, unsigned threads) {
  grid.require({"G", "theta", "t"});
  if (!grid.provides("xi") && !grid.provides("gamma")) fail(ErrorKind::Config, "grid leaves free symbols unspecified: xi");
  for (const auto& q : quantities)
    if (std::find(sweep_quantities().begin(), sweep_quantities().end(), q) == sweep_quantities().end())
      fail(ErrorKind::Config, "unknown sweep quantity `" + q + "`");

  CsvTable table;
  for (const auto& a : grid.axes()) table.header.push_back(a.name);
  table.header.insert(table.header.end(), quantities.begin(), quantities.end());
  table.rows.resize(grid.size());

  detail::parallel_for(grid.size(), threads, [&](std::size_t i) {
    const GridPoint p = grid.point(i);
    const ProtocolConfig cfg = config_at(p);
    const WvaReport report = wva_report(cfg);
    auto& row = table.rows[i];
    for (const auto& a : grid.axes()) row.push_back(*p.find(a.name));
    for (const auto& q : quantities) row.push_back(quantity_value(q, cfg, report));
  });
  return table;
}

std::vector<FigureFile> make_figure(const std::string& name, const FigureOptions& o) {
  if (o.steps < 2) fail(ErrorKind::Config, "figures need at least 2 steps per axis");
  const Axis strength{"G", 0.0, 1.0, o.steps};
  const Axis angle{"theta", 0.0, 2.0 * kPi, o.steps};

  if (name == "fig2") {
    const SweepGrid grid({strength, angle}, {{"xi", o.xi}, {"t", o.time}});
    std::vector<FigureFile> files;
    const std::vector<std::pair<std::string, std::string>> panes{{"fig2_hwva_over_hd.csv", "h_wva_over_h_d"},
                                                                 {"fig2_hd_over_hwva.csv", "h_d_over_h_wva"},
                                                                 {"fig2_q.csv", "q"},
                                                                 {"fig2_qhwva_over_hd.csv", "ratio_direct"}};
    for (const auto& [file, quantity] : panes) files.push_back({file, run_sweep(grid, {quantity}, o.threads)});
    return files;
  }
  if (name == "fig3") {
    if (o.xi_list.empty()) fail(ErrorKind::Config, "fig3 needs at least one xi value");
    CsvTable table{{"xi", "G", "ratio_direct"}, {}};
    for (double xi : o.xi_list) {
      const SweepGrid grid({strength}, {{"xi", xi}, {"theta", kPi}, {"t", o.time}});
      for (auto& row : run_sweep(grid, {"ratio_direct"}, o.threads).rows) {
        row.insert(row.begin(), xi);
        table.rows.push_back(std::move(row));
      }
    }
    return {{"fig3.csv", table}};
  }
  if (name == "fig4") {
    const SweepGrid grid({{"t", 0.0, o.t_max, o.steps}, {"gamma", 0.0, o.gamma_max, o.steps}},
                         {{"G", o.strength}, {"theta", kPi}});
    return {{"fig4.csv", run_sweep(grid, {"h_d", "q_h_wva", "ratio_direct"}, o.threads)}};
  }
  if (name == "fig5") {
    const SweepGrid grid({strength, angle}, {{"xi", 1.0}, {"t", o.time}});
    return {{"fig5.csv", run_sweep(grid, {"q_h_wva", "weighted_h_perp", "h_total"}, o.threads)}};
  }
  fail(ErrorKind::Config, "unknown figure `" + name + "` (expected fig2, fig3, fig4 or fig5)");
}

void write_figure(const std::vector<FigureFile>& files, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) fail(ErrorKind::Io, "cannot create output directory " + out_dir.string() + ": " + ec.message());
  for (const auto& f : files) f.table.write(out_dir / f.file_name);
}

nlohmann::ordered_json point_report(const ProtocolConfig& cfg) {
  cfg.validate();
  using json = nlohmann::ordered_json;
  auto number = [](double v) { return std::isfinite(v) ? json(v) : json("degenerate"); };
  auto guarded = [&](auto&& eval) -> json {
    try {
      return number(eval());
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::Singular || e.kind() == ErrorKind::UndefinedState) return "degenerate";
      throw;
    }
  };

  json j;
  j["config"] = {{"G", cfg.strength},
                 {"theta", cfg.postselection_angle},
                 {"theta_rel", cfg.relative_postselection()},
                 {"Theta", cfg.control_angle},
                 {"delta_b", cfg.field},
                 {"t", cfg.time},
                 {"xi", cfg.attenuation},
                 {"sigma", cfg.meter_attenuation}};

  const WvaReport r = wva_report(cfg);
  json closed;
  closed["a_factor"] = number(r.a_factor);
  closed["q"] = number(r.q);
  closed["h_d"] = number(r.h_d);
  closed["h_anc"] = number(r.h_anc);
  closed["h_wva"] = number(r.h_wva);
  closed["q_h_wva"] = number(r.q_h_wva);
  closed["h_perp"] = number(r.h_perp);
  closed["weighted_h_perp"] = number(r.weighted_h_perp);
  closed["h_total"] = number(r.h_total);
  closed["ratio_direct"] = number(r.ratio_direct);
  closed["ratio_anc"] = number(r.ratio_anc);
  closed["h_wva_over_h_d"] = number(quantity_value("h_wva_over_h_d", cfg, r));
  closed["f_direct"] = guarded([&] { return f_direct(cfg); });
  closed["h_anc_at_Theta"] = guarded([&] { return h_anc(cfg); });
  const NoisyMeterReport noisy = noisy_meter_report(cfg);
  closed["h_anc_tilde"] = number(noisy.h_anc_tilde);
  closed["h_wva_tilde"] = number(noisy.h_wva_tilde);
  closed["q_h_wva_tilde"] = number(noisy.q_h_wva_tilde);
  j["closed_form"] = closed;

  json oracle;
  try {
    ProtocolConfig paired = cfg;
    paired.control_angle = paired_control_angle(cfg.postselection_angle);
    const OracleResult o = simulate_protocol(CircuitSpec{paired});
    oracle["q"] = o.q;
    oracle["h_numeric"] = o.h_numeric;
    oracle["eta12_re"] = o.meter.coherence().real();
    oracle["eta12_im"] = o.meter.coherence().imag();
    oracle["warnings"] = o.warnings;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::UndefinedState) throw;
    oracle["status"] = "degenerate";
  }
  j["oracle"] = oracle;

  ProtocolConfig paired = cfg;
  paired.control_angle = paired_control_angle(cfg.postselection_angle);
  json deviations;
  for (const auto& c : compare_point(paired)) {
    deviations[c.quantity] = c.skipped ? json("degenerate")
                                       : json{{"closed", c.closed}, {"numeric", c.numeric}, {"deviation", c.deviation}};
  }
  j["comparison"] = deviations;
  return j;
}

}  // namespace wva
