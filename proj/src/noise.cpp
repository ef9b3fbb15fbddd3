#include "wva/noise.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace wva {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_time(double t) {
  if (!(t >= 0.0)) {
    std::ostringstream os;
    os << "time must be non-negative (got " << t << ")";
    fail(ErrorKind::Domain, os.str());
  }
}

double interpolate(const TabulatedAttenuation& table, double t) {
  const auto& s = table.samples;
  if (s.empty()) fail(ErrorKind::Domain, "tabulated attenuation is empty");
  if (t < s.front().first || t > s.back().first) {
    std::ostringstream os;
    os << "t = " << t << " outside tabulated range [" << s.front().first << ", " << s.back().first << "]";
    fail(ErrorKind::Domain, os.str());
  }
  auto hi = std::lower_bound(s.begin(), s.end(), t, [](const auto& p, double v) { return p.first < v; });
  if (hi->first == t) return hi->second;
  auto lo = std::prev(hi);
  const double w = (t - lo->first) / (hi->first - lo->first);
  return (1.0 - w) * lo->second + w * hi->second;
}

}  // namespace

double xi_eval(const AttenuationModel& model, double t) {
  require_time(t);
  const double xi = std::visit(
      overloaded{[&](const ExponentialDephasing& m) { return std::exp(-m.gamma * t); },
                 [&](const GaussianDecay& m) { return std::exp(-m.gamma * t * t); },
                 [&](const ConstantAttenuation& m) { return m.xi; },
                 [&](const TabulatedAttenuation& m) { return interpolate(m, t); }},
      model);
  if (!(xi >= 0.0 && xi <= 1.0)) {
    std::ostringstream os;
    os << "attenuation " << xi << " at t = " << t << " lies outside [0, 1]";
    fail(ErrorKind::Domain, os.str());
  }
  return xi;
}

TabulatedAttenuation parse_tabulated_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::Config, "attenuation table is empty");
  line.erase(std::remove_if(line.begin(), line.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); }),
             line.end());
  if (line != "t,xi") fail(ErrorKind::Config, "attenuation table header must be `t,xi`");

  TabulatedAttenuation table;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    std::string ts, xs;
    if (!std::getline(fields, ts, ',') || !std::getline(fields, xs)) {
      fail(ErrorKind::Config, "attenuation table row " + std::to_string(row) + " needs two columns");
    }
    double t = 0.0, xi = 0.0;
    try {
      t = std::stod(ts);
      xi = std::stod(xs);
    } catch (const std::exception&) {
      fail(ErrorKind::Config, "attenuation table row " + std::to_string(row) + " is not numeric");
    }
    if (!table.samples.empty() && !(t > table.samples.back().first))
      fail(ErrorKind::Config, "attenuation table times must be strictly increasing (row " + std::to_string(row) + ")");
    if (!(xi >= 0.0 && xi <= 1.0))
      fail(ErrorKind::Config, "attenuation table value outside [0, 1] (row " + std::to_string(row) + ")");
    table.samples.emplace_back(t, xi);
  }
  if (table.samples.empty()) fail(ErrorKind::Config, "attenuation table has no rows");
  return table;
}

TabulatedAttenuation load_tabulated_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_tabulated_csv(buf.str());
}

double population_eval(const PopulationModel& model, double t) {
  require_time(t);
  return std::visit(overloaded{[](const Unpolarized&) { return 1.0; },
                               [&](const Relaxation& m) { return std::exp(-t / m.t1); },
                               [&](const CustomPopulation& m) { return m.population(t); }},
                    model);
}

double attenuation_eval(const PopulationModel& model, double t) {
  require_time(t);
  return std::visit(overloaded{[&](const Unpolarized& m) { return xi_eval(m.attenuation, t); },
                               [&](const Relaxation& m) { return std::exp(-t / (2.0 * m.t1)); },
                               [&](const CustomPopulation& m) { return m.attenuation(t); }},
                    model);
}

void check_positivity(double population, double attenuation, double t) {
  if (!(population >= 0.0 && population <= 2.0) || !(attenuation >= 0.0 && attenuation <= 1.0) ||
      attenuation * attenuation > population * (2.0 - population) + kStateTolerance) {
    std::ostringstream os;
    os << "noise model is not positive at t = " << t << " (R = " << population << ", Xi = " << attenuation
       << "; need Xi^2 <= R(2-R))";
    fail(ErrorKind::Model, os.str());
  }
}

QubitState system_density(double delta_b, double t, double population, double attenuation) {
  Matrix2 m;
  const Complex coherence = -kI * std::exp(-kI * (delta_b * t)) * (0.5 * attenuation);
  m << 0.5 * population, coherence, std::conj(coherence), 1.0 - 0.5 * population;
  return QubitState::from_matrix(m);
}

SystemState system_state(double delta_b, double t, const PopulationModel& model) {
  const double r = population_eval(model, t);
  const double xi = attenuation_eval(model, t);
  check_positivity(r, xi, t);
  return SystemState{system_density(delta_b, t, r, xi), t, delta_b, r, xi};
}

SystemState system_state(double delta_b, double t, const AttenuationModel& model) {
  return system_state(delta_b, t, PopulationModel{Unpolarized{model}});
}

}  // namespace wva
