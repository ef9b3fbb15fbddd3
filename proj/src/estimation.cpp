#include "wva/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "parallel.hpp"
#include "wva/noise.hpp"
#include "wva/oracle.hpp"

namespace wva {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kGolden = 0.6180339887498949;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Projective measurement on the eigenbasis of the symmetric logarithmic derivative.
Povm sld_povm(const QubitState& rho, const Matrix2& drho) {
  const auto e = eigh(Matrix2(0.5 * (rho.matrix() + rho.matrix().adjoint())));
  const Matrix2 d = e.vectors.adjoint() * (0.5 * (drho + drho.adjoint())) * e.vectors;
  Matrix2 sld = Matrix2::Zero();
  for (int m = 0; m < 2; ++m)
    for (int n = 0; n < 2; ++n) {
      const double denom = e.values[m] + e.values[n];
      if (denom >= kDegeneracyThreshold) sld(m, n) = 2.0 * d(m, n) / denom;
    }
  const auto basis = eigh(Matrix2(e.vectors * sld * e.vectors.adjoint()));
  std::vector<PovmElement> elements;
  for (int k = 0; k < 2; ++k) {
    const Vector2 v = basis.vectors.col(k);
    elements.push_back(PovmElement::from_matrix(v * v.adjoint()));
  }
  return Povm::from_elements(std::move(elements));
}

/// Golden-section search for a maximum on [a, b].
double golden_max(const std::function<double(double)>& f, double a, double b, double width, int* evaluations) {
  double c = b - kGolden * (b - a);
  double d = a + kGolden * (b - a);
  double fc = f(c);
  double fd = f(d);
  int evals = 2;
  while (b - a > width && evals < 400) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kGolden * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kGolden * (b - a);
      fd = f(d);
    }
    ++evals;
  }
  if (evaluations) *evaluations += evals;
  return 0.5 * (a + b);
}

double sample_variance(const std::vector<double>& xs, double* mean_out) {
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / double(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  if (mean_out) *mean_out = mean;
  return xs.size() > 1 ? ss / double(xs.size() - 1) : 0.0;
}

void finish_report(CrbReport& r, const std::vector<double>& estimates) {
  r.n_experiments = estimates.size();
  if (estimates.size() < 2) {
    r.warnings.push_back("fewer than two usable experiments; variance undefined");
    r.empirical_variance = std::nan("");
  } else {
    r.empirical_variance = sample_variance(estimates, &r.mean_estimate);
  }
  r.ratio = r.empirical_variance / r.crb;
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream) : key_(splitmix64(seed ^ splitmix64(stream + 1))) {}

CounterRng::result_type CounterRng::operator()() {
  return splitmix64(key_ + 0x632be59bd9b4e019ULL * ++counter_);
}

OutcomeRecord sample_counts(const std::vector<double>& probabilities, std::uint64_t trials, CounterRng& rng) {
  OutcomeRecord rec;
  rec.trials = trials;
  rec.counts.assign(probabilities.size(), 0);
  std::uint64_t remaining = trials;
  double mass = 1.0;
  for (std::size_t k = 0; k + 1 < probabilities.size() && remaining > 0; ++k) {
    const double p = mass > 0.0 ? std::clamp(probabilities[k] / mass, 0.0, 1.0) : 0.0;
    std::binomial_distribution<std::uint64_t> draw(remaining, p);
    rec.counts[k] = draw(rng);
    remaining -= rec.counts[k];
    mass -= probabilities[k];
  }
  if (!rec.counts.empty()) rec.counts.back() += remaining;
  return rec;
}

OutcomeRecord sample_outcomes(const QubitState& rho, const Povm& povm, std::uint64_t trials, std::uint64_t seed,
                              std::uint64_t stream) {
  if (trials < 1) fail(ErrorKind::Domain, "need at least one trial");
  CounterRng rng(seed, stream);
  auto rec = sample_counts(povm.probabilities(rho), trials, rng);
  rec.seed = seed;
  return rec;
}

SearchInterval default_interval(double time) {
  if (!(time > 0.0)) fail(ErrorKind::Domain, "default search interval needs t > 0");
  return {-kPi / (2.0 * time), kPi / (2.0 * time)};
}

double log_likelihood(const OutcomeRecord& record, const ProbabilityFamily& family, double field) {
  const auto p = family(field);
  if (p.size() != record.counts.size()) fail(ErrorKind::Validation, "outcome count does not match the model");
  double ll = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (record.counts[k] == 0) continue;
    if (p[k] <= 0.0) return -std::numeric_limits<double>::infinity();
    ll += double(record.counts[k]) * std::log(p[k]);
  }
  return ll;
}

EstimationResult mle_estimate(const OutcomeRecord& record, const ProbabilityFamily& family, SearchInterval interval,
                              int grid_points) {
  if (!(interval.hi > interval.lo)) fail(ErrorKind::Domain, "search interval is empty");
  grid_points = std::max(grid_points, 256);
  auto ll = [&](double x) { return log_likelihood(record, family, x); };

  const double dx = (interval.hi - interval.lo) / double(grid_points - 1);
  int best = 0;
  double best_ll = -std::numeric_limits<double>::infinity();
  double worst_ll = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid_points; ++i) {
    const double v = ll(interval.lo + dx * i);
    if (v > best_ll) {
      best_ll = v;
      best = i;
    }
    worst_ll = std::min(worst_ll, v);
  }

  EstimationResult r;
  r.n_evaluations = grid_points;
  if (best_ll - worst_ll <= 1e-12 * (1.0 + std::abs(best_ll))) r.warnings.push_back("likelihood is flat on the search interval");
  if (best == 0 || best == grid_points - 1)
    r.warnings.push_back("likelihood maximum on the search-interval boundary (possible phase wrapping)");

  const double a = interval.lo + dx * std::max(best - 1, 0);
  const double b = interval.lo + dx * std::min(best + 1, grid_points - 1);
  r.delta_b_hat = std::clamp(golden_max(ll, a, b, 1e-10, &r.n_evaluations), interval.lo, interval.hi);
  r.log_likelihood = ll(r.delta_b_hat);
  ++r.n_evaluations;
  if (r.log_likelihood < best_ll) {  // refinement can only tie or improve on the grid point
    r.delta_b_hat = interval.lo + dx * best;
    r.log_likelihood = best_ll;
  }
  return r;
}

double observed_information(const OutcomeRecord& record, const ProbabilityFamily& family, double field, double step) {
  if (!(step > 0.0)) fail(ErrorKind::Domain, "step must be positive");
  const double up = log_likelihood(record, family, field + step);
  const double mid = log_likelihood(record, family, field);
  const double down = log_likelihood(record, family, field - step);
  return -(up - 2.0 * mid + down) / (step * step) / double(record.trials);
}

nlohmann::ordered_json CrbReport::to_json() const {
  nlohmann::ordered_json j;
  j["protocol"] = protocol;
  j["true_delta_b"] = true_field;
  j["trials"] = trials;
  j["n_experiments"] = n_experiments;
  j["skipped_experiments"] = skipped_experiments;
  j["fisher_per_trial"] = fisher;
  j["acceptance_probability"] = acceptance;
  j["mean_estimate"] = mean_estimate;
  j["empirical_variance"] = empirical_variance;
  j["crb"] = crb;
  j["ratio"] = ratio;
  j["qfi_crb"] = qfi_crb;
  j["warnings"] = warnings;
  return j;
}

CrbReport crb_check(const ProtocolConfig& cfg, const Povm& povm, std::uint64_t trials, std::size_t experiments,
                    std::uint64_t seed, unsigned threads) {
  cfg.validate();
  if (trials < 1 || experiments < 1) fail(ErrorKind::Domain, "need at least one trial and one experiment");
  const AttenuationModel model = ConstantAttenuation{cfg.attenuation};
  ProbabilityFamily family = [&](double field) { return povm.probabilities(system_state(field, cfg.time, model).rho); };

  CrbReport r;
  r.protocol = "direct";
  r.true_field = cfg.field;
  r.trials = trials;
  r.fisher = classical_fisher(family, cfg.field, 1e-5 * std::max(1.0, std::abs(cfg.field)));
  if (!(r.fisher > 1e-300)) fail(ErrorKind::Domain, "Fisher information vanishes; Cramer-Rao bound undefined");
  r.crb = 1.0 / (double(trials) * r.fisher);
  r.qfi_crb = 1.0 / (double(trials) * h_direct(cfg.time, cfg.attenuation));
  if (double(trials) * r.fisher < 100.0) r.warnings.push_back("N*F < 100: asymptotic Cramer-Rao regime not reached");

  const SearchInterval interval = default_interval(cfg.time);
  const auto probabilities = family(cfg.field);
  std::vector<double> estimates(experiments);
  std::vector<std::size_t> boundary(experiments, 0);
  detail::parallel_for(experiments, threads, [&](std::size_t m) {
    CounterRng rng(seed, m);
    const auto rec = sample_counts(probabilities, trials, rng);
    const auto est = mle_estimate(rec, family, interval);
    estimates[m] = est.delta_b_hat;
    boundary[m] = est.warnings.empty() ? 0 : 1;
  });
  if (const auto b = std::accumulate(boundary.begin(), boundary.end(), std::size_t{0}); b > 0)
    r.warnings.push_back(std::to_string(b) + " experiments hit a boundary or flat likelihood");
  finish_report(r, estimates);
  return r;
}

CrbReport crb_check_postselected(const ProtocolConfig& cfg, std::uint64_t trials, std::size_t experiments,
                                 std::uint64_t seed, unsigned threads) {
  cfg.validate();
  if (trials < 1 || experiments < 1) fail(ErrorKind::Domain, "need at least one trial and one experiment");
  const CircuitSpec spec{cfg, NoisePlacement::SystemBeforeCoupling, Readout::Postselected};
  const MeterSample centre = run_circuit(spec, cfg.field);
  const double h = 1e-5 * std::max(1.0, std::abs(cfg.field));
  const Matrix2 drho = (run_circuit(spec, cfg.field + h).eta.matrix() - run_circuit(spec, cfg.field - h).eta.matrix()) / (2.0 * h);
  const Povm povm = sld_povm(centre.eta, drho);
  ProbabilityFamily family = [&](double field) { return povm.probabilities(run_circuit(spec, field).eta); };

  CrbReport r;
  r.protocol = "postselected";
  r.true_field = cfg.field;
  r.trials = trials;
  r.acceptance = centre.q;
  r.fisher = classical_fisher(family, cfg.field, 1e-5 * std::max(1.0, std::abs(cfg.field)));
  if (!(r.fisher > 1e-300) || !(r.acceptance > 0.0))
    fail(ErrorKind::Domain, "Fisher information vanishes; Cramer-Rao bound undefined");
  r.crb = 1.0 / (double(trials) * r.acceptance * r.fisher);
  const WvaReport closed = wva_report(cfg);
  r.qfi_crb = 1.0 / (double(trials) * closed.q_h_wva);
  if (double(trials) * r.acceptance < 100.0)
    r.warnings.push_back("expected accepted trials N*q < 100: asymptotic regime not reached");
  if (double(trials) * r.acceptance * r.fisher < 100.0)
    r.warnings.push_back("N*q*F < 100: asymptotic Cramer-Rao regime not reached");

  // Window over which the meter angle moves by about +/- pi/4.
  const double half_width = 0.25 * kPi / std::sqrt(r.fisher);
  const SearchInterval interval{cfg.field - half_width, cfg.field + half_width};
  const auto meter_probabilities = family(cfg.field);

  std::vector<double> estimates(experiments, std::nan(""));
  detail::parallel_for(experiments, threads, [&](std::size_t m) {
    CounterRng rng(seed, m);
    std::binomial_distribution<std::uint64_t> accept(trials, r.acceptance);
    const std::uint64_t accepted = accept(rng);
    if (accepted == 0) return;
    const auto rec = sample_counts(meter_probabilities, accepted, rng);
    estimates[m] = mle_estimate(rec, family, interval).delta_b_hat;
  });
  std::vector<double> usable;
  for (double e : estimates)
    if (!std::isnan(e)) usable.push_back(e);
  r.skipped_experiments = experiments - usable.size();
  if (r.skipped_experiments > 0)
    r.warnings.push_back(std::to_string(r.skipped_experiments) + " experiments had no accepted trials");
  finish_report(r, usable);
  return r;
}

double sensitivity(double time, double information) {
  if (!(time >= 0.0)) fail(ErrorKind::Domain, "time must be non-negative");
  if (!(information > 0.0)) fail(ErrorKind::Domain, "sensitivity needs positive Fisher information");
  return std::sqrt(time / information);
}

double maximize_scalar(const std::function<double(double)>& f, double lo, double hi, int grid_points) {
  if (!(hi > lo)) fail(ErrorKind::Domain, "empty optimization interval");
  grid_points = std::max(grid_points, 3);
  const double dx = (hi - lo) / double(grid_points - 1);
  int best = 0;
  double best_v = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid_points; ++i) {
    const double v = f(lo + dx * i);
    if (v > best_v) {
      best_v = v;
      best = i;
    }
  }
  const double a = lo + dx * std::max(best - 1, 0);
  const double b = lo + dx * std::min(best + 1, grid_points - 1);
  return golden_max(f, a, b, 1e-13 * std::max(1.0, std::abs(hi)), nullptr);
}

double optimal_sensitivity_time(const std::function<double(double)>& h_of_t, double lo, double hi, int grid_points) {
  return maximize_scalar(
      [&](double t) {
        const double h = h_of_t(t);
        return (t > 0.0 && h > 0.0) ? -sensitivity(t, h) : -std::numeric_limits<double>::infinity();
      },
      lo, hi, grid_points);
}

}  // namespace wva
